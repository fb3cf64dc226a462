//! Periodic fluid grid and vector fields stored component-wise.

use crate::error::{check_grid, check_positive, Error, Result};

pub type Vec3 = [f64; 3];

/// Uniform `N x N x N` grid on the periodic cube `[0, L)^3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub n: usize,
    pub l: f64,
}

impl Grid {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        check_grid(n)?;
        check_positive("l", l)?;
        Ok(Self { n, l })
    }

    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Linear index of grid point `j`; the first coordinate is fastest.
    #[inline]
    pub fn index(&self, j1: usize, j2: usize, j3: usize) -> usize {
        j1 + self.n * (j2 + self.n * j3)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx % n, (idx / n) % n, idx / (n * n))
    }

    /// Reduce a possibly negative index modulo `N`.
    #[inline]
    pub fn wrap(&self, j: i64) -> usize {
        j.rem_euclid(self.n as i64) as usize
    }
}

/// Real 3-vector field on a [`Grid`], one `Vec` per component.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub grid: Grid,
    pub comps: [Vec<f64>; 3],
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        let len = grid.len();
        Self {
            grid,
            comps: [vec![0.0; len], vec![0.0; len], vec![0.0; len]],
        }
    }

    pub fn constant(grid: Grid, value: Vec3) -> Self {
        let len = grid.len();
        Self {
            grid,
            comps: value.map(|c| vec![c; len]),
        }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(usize, usize, usize) -> Vec3) -> Self {
        let mut out = Self::zeros(grid);
        for idx in 0..grid.len() {
            let (j1, j2, j3) = grid.coords(idx);
            let v = f(j1, j2, j3);
            for a in 0..3 {
                out.comps[a][idx] = v[a];
            }
        }
        out
    }

    #[inline]
    pub fn get(&self, idx: usize) -> Vec3 {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    pub fn fill(&mut self, value: Vec3) {
        for a in 0..3 {
            self.comps[a].iter_mut().for_each(|x| *x = value[a]);
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.comps.iter_mut().flatten().for_each(|x| *x *= s);
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &VectorField) -> Result<()> {
        self.check_same_grid(other)?;
        for a in 0..3 {
            for (x, y) in self.comps[a].iter_mut().zip(&other.comps[a]) {
                *x += s * y;
            }
        }
        Ok(())
    }

    /// Sum over grid points of `|u|^2`, without the volume element.
    pub fn sum_squares(&self) -> f64 {
        self.comps.iter().flatten().map(|x| x * x).sum()
    }

    /// Sum over grid points of `u . v`.
    pub fn dot(&self, other: &VectorField) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flatten()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|x| x.is_finite())
    }

    /// Shift the field by whole grid cells with periodic wrap: `out(j) = self(j - shift)`.
    pub fn shifted(&self, shift: [i64; 3]) -> Self {
        let g = self.grid;
        Self::from_fn(g, |j1, j2, j3| {
            let src = g.index(
                g.wrap(j1 as i64 - shift[0]),
                g.wrap(j2 as i64 - shift[1]),
                g.wrap(j3 as i64 - shift[2]),
            );
            self.get(src)
        })
    }

    pub(crate) fn check_same_grid(&self, other: &VectorField) -> Result<()> {
        if self.grid.n != other.grid.n {
            return Err(Error::GridMismatch(format!(
                "fields on N = {} and N = {}",
                self.grid.n, other.grid.n
            )));
        }
        Ok(())
    }
}
