//! Discrete Fourier transforms and difference-operator symbols.
//!
//! Transforms follow the unnormalized-forward convention
//! `û(ξ) = Σ_j e^{-i 2π j·ξ / N} u(x_j)`; inverses carry the `1/N^3`
//! (or `1/(NP)^2` on the boundary grid).

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_grid, check_positive, Error, Result};
use crate::field::{Grid, VectorField};

/// Complex scalar used by every transform.
pub type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

/// Lines moved together when gathering a strided axis.
const TILE: usize = 8;

/// Cached plans for in-place 3D transforms of an `N^3` complex array laid
/// out with the first index fastest.
pub struct Fft3 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    negation: Arc<Vec<usize>>,
    lines: Vec<C>,
    scratch: Vec<C>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

impl Clone for Fft3 {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            fwd: Arc::clone(&self.fwd),
            inv: Arc::clone(&self.inv),
            negation: Arc::clone(&self.negation),
            lines: vec![ZERO; self.lines.len()],
            scratch: vec![ZERO; self.scratch.len()],
        }
    }
}

impl Fft3 {
    pub fn new(n: usize) -> Result<Self> {
        check_grid(n)?;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Ok(Self {
            n,
            fwd,
            inv,
            negation: Arc::new(negation_table(n)),
            lines: vec![ZERO; n * n * n],
            scratch: vec![ZERO; scratch_len],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Storage index of `-ξ` for each storage index `ξ`.
    pub fn negation(&self) -> &[usize] {
        &self.negation
    }

    /// Forward transform, unnormalized.
    pub fn forward(&mut self, data: &mut [C]) {
        let plan = Arc::clone(&self.fwd);
        self.transform(plan.as_ref(), data);
    }

    /// Inverse transform, unnormalized (the caller divides by `N^3`).
    pub fn inverse(&mut self, data: &mut [C]) {
        let plan = Arc::clone(&self.inv);
        self.transform(plan.as_ref(), data);
    }

    fn transform(&mut self, plan: &dyn Fft<f64>, data: &mut [C]) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "Fft3 buffer length");
        // axis 0 is contiguous: one batched call
        plan.process_with_scratch(data, &mut self.scratch);
        for stride in [n, n * n] {
            // gather every line along this axis into contiguous rows, a few
            // neighbouring lines at a time so both sides stay in cache
            let block = n * stride;
            let tile = if stride % TILE == 0 { TILE } else { 1 };
            for outer in 0..n * n * n / block {
                for inner in (0..stride).step_by(tile) {
                    let row0 = outer * stride + inner;
                    for k in 0..n {
                        let src = &data[outer * block + k * stride + inner..][..tile];
                        for (j, v) in src.iter().enumerate() {
                            self.lines[(row0 + j) * n + k] = *v;
                        }
                    }
                }
            }
            plan.process_with_scratch(&mut self.lines, &mut self.scratch);
            for outer in 0..n * n * n / block {
                for inner in (0..stride).step_by(tile) {
                    let row0 = outer * stride + inner;
                    for k in 0..n {
                        let dst = &mut data[outer * block + k * stride + inner..][..tile];
                        for (j, v) in dst.iter_mut().enumerate() {
                            *v = self.lines[(row0 + j) * n + k];
                        }
                    }
                }
            }
        }
    }
}

/// Fourier coefficients of a real 3-vector field, one array per component.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField3D {
    pub n: usize,
    pub data: [Vec<C>; 3],
}

impl SpectralField3D {
    pub fn zeros(n: usize) -> Self {
        let len = n * n * n;
        Self {
            n,
            data: [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]],
        }
    }

    #[inline]
    pub fn get(&self, idx: usize) -> [C; 3] {
        [self.data[0][idx], self.data[1][idx], self.data[2][idx]]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, v: [C; 3]) {
        for a in 0..3 {
            self.data[a][idx] = v[a];
        }
    }

    /// Wavenumber triple at a linear index.
    #[inline]
    pub fn wavenumber(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx % n, (idx / n) % n, idx / (n * n)]
    }

    /// Linear index of `-ξ mod N`.
    #[inline]
    pub fn negated_index(&self, idx: usize) -> usize {
        let n = self.n;
        let [a, b, c] = self.wavenumber(idx);
        let neg = |x: usize| (n - x) % n;
        neg(a) + n * (neg(b) + n * neg(c))
    }

    /// Largest deviation from `û(-ξ) = conj(û(ξ))` over all entries.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for comp in &self.data {
            for idx in 0..comp.len() {
                let d = comp[idx] - comp[self.negated_index(idx)].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn sum_norm_sqr(&self) -> f64 {
        self.data.iter().flatten().map(|z| z.norm_sqr()).sum()
    }
}

/// Index of `-ξ` for every storage index.
fn negation_table(n: usize) -> Vec<usize> {
    let neg = |x: usize| if x == 0 { 0 } else { n - x };
    let mut out = Vec::with_capacity(n * n * n);
    for c in 0..n {
        for b in 0..n {
            let row = n * (neg(b) + n * neg(c));
            out.extend((0..n).map(|a| neg(a) + row));
        }
    }
    out
}

/// Forward transform of a real field. Two components share one complex
/// transform and are separated by conjugate symmetry.
pub fn dft3_with(fft: &mut Fft3, field: &VectorField) -> Result<SpectralField3D> {
    let n = field.grid.n;
    if fft.n() != n {
        return Err(Error::GridMismatch(format!(
            "transform planned for N = {}, field has N = {n}",
            fft.n()
        )));
    }
    let mut z: Vec<C> = field.comps[0]
        .iter()
        .zip(&field.comps[1])
        .map(|(&a, &b)| C::new(a, b))
        .collect();
    fft.forward(&mut z);
    // split the packed transform using û(-ξ) = conj(û(ξ))
    let neg = fft.negation();
    let u0 = neg
        .iter()
        .enumerate()
        .map(|(i, &j)| (z[i] + z[j].conj()) * 0.5)
        .collect();
    let u1 = neg
        .iter()
        .enumerate()
        .map(|(i, &j)| (z[i] - z[j].conj()) * C::new(0.0, -0.5))
        .collect();
    let mut w: Vec<C> = field.comps[2].iter().map(|&x| C::new(x, 0.0)).collect();
    fft.forward(&mut w);
    Ok(SpectralField3D {
        n,
        data: [u0, u1, w],
    })
}

/// Inverse transform back to a real field; imaginary parts from a
/// non-symmetric spectrum are discarded.
pub fn idft3_with(fft: &mut Fft3, spec: &SpectralField3D, l: f64) -> Result<VectorField> {
    let n = spec.n;
    if fft.n() != n {
        return Err(Error::GridMismatch(format!(
            "transform planned for N = {}, spectrum has N = {n}",
            fft.n()
        )));
    }
    let grid = Grid::new(n, l)?;
    let len = n * n * n;
    let scale = 1.0 / len as f64;
    let mut out = VectorField::zeros(grid);
    // packing û0 + i û1 is only separable when both spectra are Hermitian
    let mut z: Vec<C> = fft
        .negation()
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            let u0 = (spec.data[0][i] + spec.data[0][j].conj()) * 0.5;
            let u1 = (spec.data[1][i] + spec.data[1][j].conj()) * 0.5;
            u0 + C::new(0.0, 1.0) * u1
        })
        .collect();
    fft.inverse(&mut z);
    for i in 0..len {
        out.comps[0][i] = z[i].re * scale;
        out.comps[1][i] = z[i].im * scale;
    }
    let mut w = spec.data[2].clone();
    fft.inverse(&mut w);
    for i in 0..len {
        out.comps[2][i] = w[i].re * scale;
    }
    Ok(out)
}

pub fn dft3(field: &VectorField) -> Result<SpectralField3D> {
    dft3_with(&mut Fft3::new(field.grid.n)?, field)
}

pub fn idft3(spec: &SpectralField3D, l: f64) -> Result<VectorField> {
    idft3_with(&mut Fft3::new(spec.n)?, spec, l)
}

/// Coefficients of a 3-vector field on the `M x M` boundary grid (`M = NP`),
/// indexed `k1 + M k2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralBoundary {
    pub m: usize,
    pub data: [Vec<C>; 3],
}

fn fft2(m: usize, data: &mut [C], inverse: bool) {
    let mut planner = FftPlanner::new();
    let plan = if inverse {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    };
    plan.process(data);
    let mut col = vec![ZERO; m];
    for k1 in 0..m {
        for k2 in 0..m {
            col[k2] = data[k1 + m * k2];
        }
        plan.process(&mut col);
        for k2 in 0..m {
            data[k1 + m * k2] = col[k2];
        }
    }
}

/// Forward 2D transform of a boundary force field on an `M x M` grid.
pub fn dft2_boundary(m: usize, comps: &[Vec<f64>; 3]) -> Result<SpectralBoundary> {
    if m == 0 {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: "boundary grid must be non-empty".into(),
        });
    }
    let mut data: [Vec<C>; 3] = Default::default();
    for a in 0..3 {
        if comps[a].len() != m * m {
            return Err(Error::GridMismatch(format!(
                "boundary component has {} entries, expected {}",
                comps[a].len(),
                m * m
            )));
        }
        let mut z: Vec<C> = comps[a].iter().map(|&x| C::new(x, 0.0)).collect();
        fft2(m, &mut z, false);
        data[a] = z;
    }
    Ok(SpectralBoundary { m, data })
}

/// Inverse of [`dft2_boundary`], real parts only.
pub fn idft2_boundary(spec: &SpectralBoundary) -> [Vec<f64>; 3] {
    let m = spec.m;
    let scale = 1.0 / (m * m) as f64;
    let mut out: [Vec<f64>; 3] = Default::default();
    for a in 0..3 {
        let mut z = spec.data[a].clone();
        fft2(m, &mut z, true);
        out[a] = z.iter().map(|c| c.re * scale).collect();
    }
    out
}

/// `sin(2π ξ / N)`, exactly zero on `ξ ∈ {0, N/2}`.
#[inline]
pub fn centered_sine(xi: usize, n: usize) -> f64 {
    if (2 * xi).is_multiple_of(n) {
        0.0
    } else {
        (2.0 * PI * xi as f64 / n as f64).sin()
    }
}

/// Symbol of the centered-difference gradient, `(i/h) sin(2π ξ_α / N)`.
pub fn grad_symbol(xi: [usize; 3], n: usize, h: f64) -> [C; 3] {
    xi.map(|x| C::new(0.0, centered_sine(x % n, n) / h))
}

/// Symbol of the 7-point Laplacian, `-(4/h^2) Σ sin^2(π ξ_α / N)`.
pub fn laplacian_symbol(xi: [usize; 3], n: usize, h: f64) -> f64 {
    let s: f64 = xi
        .iter()
        .map(|&x| (PI * (x % n) as f64 / n as f64).sin().powi(2))
        .sum();
    -4.0 / (h * h) * s
}

/// True on the eight wavenumbers where the gradient symbol vanishes.
#[inline]
pub fn is_null_mode(xi: [usize; 3], n: usize) -> bool {
    xi.iter().all(|&x| (2 * x) % n == 0)
}

/// Discrete Helmholtz projector at `ξ`; the identity on null modes.
pub fn projection_matrix(xi: [usize; 3], n: usize, h: f64) -> [[C; 3]; 3] {
    let g = grad_symbol(xi, n, h).map(|c| c.im);
    projection_from_sines(g).map(|row| row.map(|x| C::new(x, 0.0)))
}

/// `I - s sᵀ / |s|^2` for the real sine vector `s`, identity when `s = 0`.
#[inline]
pub(crate) fn projection_from_sines(s: [f64; 3]) -> [[f64; 3]; 3] {
    let norm2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
    let mut p = [[0.0; 3]; 3];
    for a in 0..3 {
        p[a][a] = 1.0;
        if norm2 > 0.0 {
            for b in 0..3 {
                p[a][b] -= s[a] * s[b] / norm2;
            }
        }
    }
    p
}

/// Per-axis tables from which every symbol at `ξ` is assembled cheaply.
#[derive(Clone, Debug)]
pub struct OperatorSymbols {
    n: usize,
    h: f64,
    sines: Vec<f64>,
    lap1d: Vec<f64>,
}

impl OperatorSymbols {
    pub fn new(n: usize, h: f64) -> Result<Self> {
        check_grid(n)?;
        check_positive("h", h)?;
        let sines = (0..n).map(|x| centered_sine(x, n)).collect();
        let lap1d = (0..n)
            .map(|x| -4.0 / (h * h) * (PI * x as f64 / n as f64).sin().powi(2))
            .collect();
        Ok(Self { n, h, sines, lap1d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn grad(&self, xi: [usize; 3]) -> [C; 3] {
        xi.map(|x| C::new(0.0, self.sines[x] / self.h))
    }

    #[inline]
    pub fn laplacian(&self, xi: [usize; 3]) -> f64 {
        self.lap1d[xi[0]] + self.lap1d[xi[1]] + self.lap1d[xi[2]]
    }

    pub fn projection(&self, xi: [usize; 3]) -> [[C; 3]; 3] {
        projection_from_sines(xi.map(|x| self.sines[x])).map(|r| r.map(|x| C::new(x, 0.0)))
    }

    /// `P̂(ξ) v` without forming the matrix.
    #[inline]
    pub fn project(&self, xi: [usize; 3], v: [C; 3]) -> [C; 3] {
        let s = xi.map(|x| self.sines[x]);
        let norm2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
        if norm2 == 0.0 {
            return v;
        }
        let dot = (v[0] * s[0] + v[1] * s[1] + v[2] * s[2]) / norm2;
        [v[0] - dot * s[0], v[1] - dot * s[1], v[2] - dot * s[2]]
    }

    /// Symbol of the discrete divergence applied to `v`.
    #[inline]
    pub fn divergence(&self, xi: [usize; 3], v: [C; 3]) -> C {
        let g = self.grad(xi);
        g[0] * v[0] + g[1] * v[1] + g[2] * v[2]
    }
}
