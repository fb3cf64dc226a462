//! Fourier-analytic stability boundary of the leapfrog IB scheme.
//!
//! Everything reduces to the lattice sums
//!
//! * `b(ξ, ε) = Σ_l Phi(ξ + lN) e^{i2π l ε}`, aliasing on the fluid lattice,
//! * `a(m, ε) = Σ_l Phi(m + lNP) e^{i2π P l ε}`, aliasing on the boundary lattice,
//!
//! and the surfaces `C(ξ1, ξ2)` built from them. The scheme is stable while
//! `K Δt^2 / (ρ h) · max C <= 4` (target points) or
//! `(4P^2/h^2) · K Δt^2 / (ρ h) · max C <= 4` (membrane), both taken at the
//! amplification root `z = -1` where viscosity drops out.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{check_grid, check_positive, Error, Result};
use crate::field::Vec3;
use crate::forcing::ForcingKind;
use crate::kernel::{
    fold, phi, phi_coeff_unchecked, symmetric_series, KernelTable, SUM_OF_SQUARES,
};

/// How the lattice sums enter a surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Full `a`/`b` sums at a given shift `ε`.
    Exact,
    /// `Σ_p |a(ξ+Np)|^2 -> |Phi(ξ)|^2` on the folded range and `Σ |b|^2 -> 3/(8N)`.
    BandLimited,
}

fn check_p(p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: "grid ratio must be at least 1".into(),
        });
    }
    Ok(())
}

/// `b(ξ, ε)` from its finite form `(1/N) Σ_j phi(j+ε) e^{-i2π ξ (j+ε)/N}`.
pub fn b_sum(xi: i64, eps: f64, n: usize) -> Result<Complex64> {
    check_grid(n)?;
    let nf = n as f64;
    let lo = (-2.0 - eps).floor() as i64;
    let hi = (2.0 - eps).ceil() as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in lo..=hi {
        let r = j as f64 + eps;
        let w = phi(r);
        if w != 0.0 {
            acc += Complex64::from_polar(w, -2.0 * PI * xi as f64 * r / nf);
        }
    }
    Ok(acc / nf)
}

/// `b(ξ, ε)` from the aliasing series of `Phi`, truncated by the tail rule.
pub fn b_sum_series(xi: i64, eps: f64, n: usize) -> Result<Complex64> {
    check_grid(n)?;
    let ni = n as i64;
    let (xi, wraps) = centered(xi, ni);
    let (s, _) = symmetric_series(2, |l| {
        Complex64::from_polar(
            phi_coeff_unchecked(xi + l * ni, n),
            2.0 * PI * l as f64 * eps,
        )
    });
    Ok(s * Complex64::from_polar(1.0, -2.0 * PI * wraps as f64 * eps))
}

/// Splits `m` into `r + wraps * period` with `r` in `[-period/2, period/2)`.
/// The series are centered on the dominant term so the tail rule sees it.
fn centered(m: i64, period: i64) -> (i64, i64) {
    let wraps = (m + period / 2).div_euclid(period);
    (m - wraps * period, wraps)
}

/// `a(m, ε)` from the aliasing series of `Phi`, truncated by the tail rule.
pub fn a_sum(m: i64, eps: f64, n: usize, p: usize) -> Result<Complex64> {
    check_grid(n)?;
    check_p(p)?;
    let stride = (n * p) as i64;
    let pf = p as f64;
    let (m, wraps) = centered(m, stride);
    let (s, _) = symmetric_series(2, |l| {
        Complex64::from_polar(
            phi_coeff_unchecked(m + l * stride, n),
            2.0 * PI * pf * l as f64 * eps,
        )
    });
    Ok(s * Complex64::from_polar(1.0, -2.0 * PI * pf * wraps as f64 * eps))
}

/// `Σ_ξ |b(ξ, ε)|^2` over `Z_N`.
pub fn b_norm_sqr(eps: f64, n: usize) -> Result<f64> {
    let mut total = 0.0;
    for xi in 0..n as i64 {
        total += b_sum(xi, eps, n)?.norm_sqr();
    }
    Ok(total)
}

/// A stability surface over `Z_N^2` with its maximum.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub kind: ForcingKind,
    pub n: usize,
    pub p: usize,
    /// Shift used in exact mode; `None` for band-limited surfaces.
    pub eps: Option<Vec3>,
    pub mode: Mode,
    /// `C(ξ1, ξ2)` at index `ξ1 + N ξ2`, `ξ ∈ [0, N)`.
    pub surface: Vec<f64>,
    pub cmax: f64,
    /// Canonical maximizer: folded magnitudes, smaller first.
    pub argmax: (usize, usize),
    /// Other canonical pairs within `1e-6` relative of `cmax`.
    pub near_ties: Vec<(usize, usize)>,
    pub dt_critical: Option<f64>,
}

impl StabilityReport {
    fn from_surface(
        kind: ForcingKind,
        n: usize,
        p: usize,
        eps: Option<Vec3>,
        mode: Mode,
        surface: Vec<f64>,
    ) -> Self {
        let cmax = surface.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let canon = |idx: usize| {
            let a = fold((idx % n) as i64, n).unsigned_abs() as usize;
            let b = fold((idx / n) as i64, n).unsigned_abs() as usize;
            (a.min(b), a.max(b))
        };
        let argmax = (0..surface.len())
            .filter(|&i| surface[i] == cmax)
            .map(canon)
            .min()
            .unwrap_or((0, 0));
        let mut near_ties: Vec<(usize, usize)> = (0..surface.len())
            .filter(|&i| cmax - surface[i] <= 1e-6 * cmax.abs())
            .map(canon)
            .filter(|&c| c != argmax)
            .collect();
        near_ties.sort_unstable();
        near_ties.dedup();
        Self {
            kind,
            n,
            p,
            eps,
            mode,
            surface,
            cmax,
            argmax,
            near_ties,
            dt_critical: None,
        }
    }

    #[inline]
    pub fn at(&self, xi1: usize, xi2: usize) -> f64 {
        self.surface[xi1 % self.n + self.n * (xi2 % self.n)]
    }

    /// Attach the critical timestep for the given material constants.
    pub fn with_constants(mut self, k: f64, rho: f64, h: f64) -> Result<Self> {
        self.dt_critical = Some(match self.kind {
            ForcingKind::TargetPoint => dtc_target_from_cmax(k, rho, h, self.cmax)?,
            ForcingKind::Membrane => dtc_membrane_from_cmax(k, rho, h, self.p, self.cmax)?,
        });
        Ok(self)
    }
}

/// `Σ_{p ∈ Z_P} |a(ξ + Np, ε)|^2 w(ξ + Np)` for every `ξ ∈ Z_N`, with
/// `a` evaluated once per boundary wavenumber.
fn aliased_weights(n: usize, p: usize, eps: f64, weight: impl Fn(i64) -> f64) -> Result<Vec<f64>> {
    let m = (n * p) as i64;
    let mut a2 = Vec::with_capacity(m as usize);
    for q in 0..m {
        a2.push(a_sum(q, eps, n, p)?.norm_sqr());
    }
    Ok((0..n)
        .map(|xi| {
            (0..p)
                .map(|pp| {
                    let q = (xi + n * pp) as i64;
                    a2[q as usize] * weight(q)
                })
                .sum()
        })
        .collect())
}

/// Target-point surface `C = N^5 Σ|a1|^2 Σ|a2|^2 Σ|b|^2`.
pub fn c_surface_target(n: usize, p: usize, eps: Vec3, mode: Mode) -> Result<StabilityReport> {
    check_grid(n)?;
    check_p(p)?;
    let n5 = (n as f64).powi(5);
    let (s1, s2, bsum, eps_used) = match mode {
        Mode::Exact => {
            let s1 = aliased_weights(n, p, eps[0], |_| 1.0)?;
            let s2 = if eps[1] == eps[0] {
                s1.clone()
            } else {
                aliased_weights(n, p, eps[1], |_| 1.0)?
            };
            (s1, s2, b_norm_sqr(eps[2], n)?, Some(eps))
        }
        Mode::BandLimited => {
            let t = KernelTable::new(n)?;
            let s: Vec<f64> = (0..n as i64).map(|xi| t.folded(xi).powi(2)).collect();
            (s.clone(), s, SUM_OF_SQUARES / n as f64, None)
        }
    };
    let surface = (0..n * n)
        .map(|idx| n5 * s1[idx % n] * s2[idx / n] * bsum)
        .collect();
    Ok(StabilityReport::from_surface(
        ForcingKind::TargetPoint,
        n,
        p,
        eps_used,
        mode,
        surface,
    ))
}

/// Membrane surface; the sine factor of the boundary Laplacian sits inside
/// the aliasing sums.
pub fn c_surface_membrane(n: usize, p: usize, mode: Mode, eps: Vec3) -> Result<StabilityReport> {
    check_grid(n)?;
    check_p(p)?;
    let n5 = (n as f64).powi(5);
    let np = (n * p) as f64;
    let sin2 = |q: i64| (PI * q as f64 / np).sin().powi(2);
    let surface: Vec<f64> = match mode {
        Mode::Exact => {
            let a1 = aliased_weights(n, p, eps[0], |_| 1.0)?;
            let w1 = aliased_weights(n, p, eps[0], sin2)?;
            let (a2, w2) = if eps[1] == eps[0] {
                (a1.clone(), w1.clone())
            } else {
                (
                    aliased_weights(n, p, eps[1], |_| 1.0)?,
                    aliased_weights(n, p, eps[1], sin2)?,
                )
            };
            let bsum = b_norm_sqr(eps[2], n)?;
            (0..n * n)
                .map(|idx| {
                    let (i, j) = (idx % n, idx / n);
                    n5 * bsum * (w1[i] * a2[j] + a1[i] * w2[j])
                })
                .collect()
        }
        Mode::BandLimited => {
            let t = KernelTable::new(n)?;
            let f: Vec<(f64, f64)> = (0..n as i64)
                .map(|xi| {
                    let q = fold(xi, n);
                    (t.coeff(q).powi(2), sin2(q))
                })
                .collect();
            let c = 3.0 * (n as f64).powi(4) / 8.0;
            (0..n * n)
                .map(|idx| {
                    let (a, b) = (f[idx % n], f[idx / n]);
                    c * a.0 * b.0 * (a.1 + b.1)
                })
                .collect()
        }
    };
    let eps_used = (mode == Mode::Exact).then_some(eps);
    Ok(StabilityReport::from_surface(
        ForcingKind::Membrane,
        n,
        p,
        eps_used,
        mode,
        surface,
    ))
}

/// `Δt_c = sqrt(4 ρ h / (K Cmax))`.
pub fn dtc_target_from_cmax(k: f64, rho: f64, h: f64, cmax: f64) -> Result<f64> {
    check_positive("k", k)?;
    check_positive("rho", rho)?;
    check_positive("h", h)?;
    check_positive("cmax", cmax)?;
    Ok((4.0 * rho * h / (k * cmax)).sqrt())
}

/// Target-point critical step with the band-limited bound `Cmax = 3/8`:
/// `sqrt(32 ρ h / (3K))`.
pub fn dtc_target(k: f64, rho: f64, h: f64) -> Result<f64> {
    dtc_target_from_cmax(k, rho, h, SUM_OF_SQUARES)
}

/// `Δt_c = sqrt(ρ h^3 / (K P^2 Cmax))`.
pub fn dtc_membrane_from_cmax(k: f64, rho: f64, h: f64, p: usize, cmax: f64) -> Result<f64> {
    check_positive("k", k)?;
    check_positive("rho", rho)?;
    check_positive("h", h)?;
    check_positive("cmax", cmax)?;
    check_p(p)?;
    Ok((rho * h.powi(3) / (k * (p * p) as f64 * cmax)).sqrt())
}

/// Membrane critical step from a freshly computed surface.
pub fn dtc_membrane(
    k: f64,
    rho: f64,
    h: f64,
    n: usize,
    p: usize,
    mode: Mode,
    eps: Vec3,
) -> Result<f64> {
    let report = c_surface_membrane(n, p, mode, eps)?;
    dtc_membrane_from_cmax(k, rho, h, p, report.cmax)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table1Row {
    pub n: usize,
    pub p: usize,
    pub cmax: f64,
    pub argmax: (usize, usize),
    pub near_ties: Vec<(usize, usize)>,
}

/// Band-limited membrane maxima for every `(N, P)` combination, `N` outermost.
pub fn table1(n_list: &[usize], p_list: &[usize]) -> Result<Vec<Table1Row>> {
    let mut rows = Vec::new();
    for &n in n_list {
        for &p in p_list {
            let r = c_surface_membrane(n, p, Mode::BandLimited, [0.0; 3])?;
            rows.push(Table1Row {
                n,
                p,
                cmax: r.cmax,
                argmax: r.argmax,
                near_ties: r.near_ties,
            });
        }
    }
    Ok(rows)
}
