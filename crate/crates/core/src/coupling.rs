//! Force spreading and velocity interpolation between a planar Lagrangian
//! sheet and the periodic fluid grid.
//!
//! Marker `k` of an `M x M` sheet (`M = NP`) rests at
//! `X0_k = (k1 h_B + σ1, k2 h_B + σ2, σ3)` with `h_B = L / M` and `σ = ε h`.
//! Kernel arguments are taken in units of the fluid meshwidth and the grid
//! index is reduced mod `N`.

use crate::error::{check_grid, Error, Result};
use crate::field::{Grid, Vec3, VectorField};
use crate::kernel::phi;

/// Marker lattice with rest positions, current positions and force densities.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianSheet {
    pub n: usize,
    pub p: usize,
    pub l: f64,
    pub eps: Vec3,
    pub x0: Vec<Vec3>,
    pub x: Vec<Vec3>,
    pub f: Vec<Vec3>,
}

impl LagrangianSheet {
    pub fn new(n: usize, p: usize, l: f64, eps: Vec3) -> Result<Self> {
        check_grid(n)?;
        if p == 0 {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: "grid ratio must be at least 1".into(),
            });
        }
        if !(l.is_finite() && l > 0.0) || eps.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "eps",
                reason: "box length and shift must be finite".into(),
            });
        }
        let m = n * p;
        let hb = l / m as f64;
        let h = l / n as f64;
        let sigma = eps.map(|e| e * h);
        let x0: Vec<Vec3> = (0..m * m)
            .map(|idx| {
                let (k1, k2) = (idx % m, idx / m);
                [
                    k1 as f64 * hb + sigma[0],
                    k2 as f64 * hb + sigma[1],
                    sigma[2],
                ]
            })
            .collect();
        Ok(Self {
            n,
            p,
            l,
            eps,
            x: x0.clone(),
            f: vec![[0.0; 3]; m * m],
            x0,
        })
    }

    /// Boundary lattice size `NP`.
    pub fn m(&self) -> usize {
        self.n * self.p
    }

    pub fn len(&self) -> usize {
        self.x0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x0.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Boundary meshwidth `h_B = h / P`.
    pub fn hb(&self) -> f64 {
        self.l / self.m() as f64
    }

    #[inline]
    pub fn index(&self, k1: usize, k2: usize) -> usize {
        k1 + self.m() * k2
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.l)
    }

    pub(crate) fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.n != self.n || (grid.l - self.l).abs() > 1e-12 * self.l {
            return Err(Error::GridMismatch(format!(
                "sheet built for N = {}, L = {}; grid has N = {}, L = {}",
                self.n, self.l, grid.n, grid.l
            )));
        }
        Ok(())
    }

    pub(crate) fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len != self.len() {
            return Err(Error::GridMismatch(format!(
                "{what} has {len} entries, sheet has {}",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Kernel weights of one marker: four grid indices and weights per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkerWeights {
    pub idx: [[usize; 4]; 3],
    pub w: [[f64; 4]; 3],
}

impl MarkerWeights {
    fn at(s: Vec3, n: usize) -> Self {
        let mut idx = [[0; 4]; 3];
        let mut w = [[0.0; 4]; 3];
        for a in 0..3 {
            let base = s[a].floor() as i64 - 1;
            for t in 0..4 {
                let j = base + t as i64;
                idx[a][t] = j.rem_euclid(n as i64) as usize;
                w[a][t] = phi(j as f64 - s[a]);
            }
        }
        Self { idx, w }
    }
}

/// Precomputed kernel weights for every marker of a sheet.
#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    pub grid: Grid,
    pub markers: Vec<MarkerWeights>,
}

impl Stencil {
    /// Kernels centered at the rest positions: arguments `j - k/P - ε`.
    pub fn at_targets(sheet: &LagrangianSheet) -> Result<Self> {
        let grid = sheet.grid()?;
        let m = sheet.m();
        let p = sheet.p as f64;
        let markers = (0..m * m)
            .map(|idx| {
                let (k1, k2) = (idx % m, idx / m);
                let s = [
                    k1 as f64 / p + sheet.eps[0],
                    k2 as f64 / p + sheet.eps[1],
                    sheet.eps[2],
                ];
                MarkerWeights::at(s, grid.n)
            })
            .collect();
        Ok(Self { grid, markers })
    }

    /// Kernels centered at arbitrary positions (length units).
    pub fn at_positions(grid: Grid, positions: &[Vec3]) -> Self {
        let h = grid.h();
        let markers = positions
            .iter()
            .map(|x| MarkerWeights::at(x.map(|c| c / h), grid.n))
            .collect();
        Self { grid, markers }
    }

    pub fn len(&self) -> usize {
        self.markers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markers.is_empty()
    }

    /// Adds `Σ_k F_k δ_h(x_j - X_k) h_B^2` to `out`, markers in row-major order.
    pub fn spread_into(&self, forces: &[Vec3], hb: f64, out: &mut VectorField) -> Result<()> {
        if forces.len() != self.markers.len() {
            return Err(Error::GridMismatch(format!(
                "{} forces for {} markers",
                forces.len(),
                self.markers.len()
            )));
        }
        if out.grid.n != self.grid.n {
            return Err(Error::GridMismatch(format!(
                "stencil on N = {}, field on N = {}",
                self.grid.n, out.grid.n
            )));
        }
        let g = self.grid;
        let scale = hb * hb / g.h().powi(3);
        for (mk, f) in self.markers.iter().zip(forces) {
            if f[0] == 0.0 && f[1] == 0.0 && f[2] == 0.0 {
                continue;
            }
            for t3 in 0..4 {
                let w3 = mk.w[2][t3] * scale;
                if w3 == 0.0 {
                    continue;
                }
                for t2 in 0..4 {
                    let w23 = w3 * mk.w[1][t2];
                    let row = g.n * (mk.idx[1][t2] + g.n * mk.idx[2][t3]);
                    for t1 in 0..4 {
                        let w = w23 * mk.w[0][t1];
                        let i = row + mk.idx[0][t1];
                        out.comps[0][i] += w * f[0];
                        out.comps[1][i] += w * f[1];
                        out.comps[2][i] += w * f[2];
                    }
                }
            }
        }
        Ok(())
    }

    pub fn spread(&self, forces: &[Vec3], hb: f64) -> Result<VectorField> {
        let mut out = VectorField::zeros(self.grid);
        self.spread_into(forces, hb, &mut out)?;
        Ok(out)
    }

    /// `U_k = Σ_j u(x_j) φ φ φ`, no volume factor.
    pub fn interpolate(&self, u: &VectorField) -> Result<Vec<Vec3>> {
        if u.grid.n != self.grid.n {
            return Err(Error::GridMismatch(format!(
                "stencil on N = {}, field on N = {}",
                self.grid.n, u.grid.n
            )));
        }
        let g = self.grid;
        Ok(self
            .markers
            .iter()
            .map(|mk| {
                let mut acc = [0.0; 3];
                for t3 in 0..4 {
                    let w3 = mk.w[2][t3];
                    if w3 == 0.0 {
                        continue;
                    }
                    for t2 in 0..4 {
                        let w23 = w3 * mk.w[1][t2];
                        let row = g.n * (mk.idx[1][t2] + g.n * mk.idx[2][t3]);
                        for t1 in 0..4 {
                            let w = w23 * mk.w[0][t1];
                            let i = row + mk.idx[0][t1];
                            acc[0] += w * u.comps[0][i];
                            acc[1] += w * u.comps[1][i];
                            acc[2] += w * u.comps[2][i];
                        }
                    }
                }
                acc
            })
            .collect())
    }
}

/// Spread `forces` from the sheet's rest positions onto a fresh fluid field.
pub fn spread(sheet: &LagrangianSheet, forces: &[Vec3], grid: &Grid) -> Result<VectorField> {
    sheet.check_grid(grid)?;
    sheet.check_len(forces.len(), "force array")?;
    Stencil::at_targets(sheet)?.spread(forces, sheet.hb())
}

/// Interpolate `u` to the sheet's rest positions.
pub fn interpolate(sheet: &LagrangianSheet, u: &VectorField) -> Result<Vec<Vec3>> {
    sheet.check_grid(&u.grid)?;
    Stencil::at_targets(sheet)?.interpolate(u)
}
