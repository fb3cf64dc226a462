//! The standard 4-point IB delta function and its Fourier representations.
//!
//! `phi` is the 1D kernel in units of the fluid meshwidth. Its continuous
//! transform `phi_hat(s) = ∫ phi(r) e^{-isr} dr` is real and even; the
//! periodic Fourier coefficients on a grid of `N` cells follow as
//! `Phi(q) = phi_hat(2πq/N) / N`.
//!
//! `phi_hat` is evaluated by composite Gauss–Legendre quadrature on the two
//! smooth pieces `[0,1]` and `[1,2]` for moderate frequencies, and by an
//! optimally truncated integration-by-parts expansion for large ones, where
//! the oscillatory integrand would need a number of nodes proportional to
//! the frequency. The expansion uses exact Taylor coefficients of the square
//! root branches at the breakpoints; both sides of the switch agree to
//! about `1e-16` absolute.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rustfft::num_complex::Complex64;

use crate::error::{check_grid, Result};

/// Value of `Σ_j phi(j + ε)^2`, independent of the shift `ε`.
pub const SUM_OF_SQUARES: f64 = 3.0 / 8.0;

/// Frequencies at or above this use the asymptotic expansion.
const ASYMPTOTIC_CUTOFF: f64 = 180.0;

const GL_ORDER: usize = 20;

/// The 4-point kernel. Support is `[-2, 2]`; `phi(r) = phi(-r)`.
pub fn phi(r: f64) -> f64 {
    let r = r.abs();
    if r <= 1.0 {
        (3.0 - 2.0 * r + (1.0 + 4.0 * r - 4.0 * r * r).sqrt()) / 8.0
    } else if r < 2.0 {
        // clamp: the radicand is exactly 1 at r = 1, 2 but can dip below
        // zero by an ulp near the ends
        (5.0 - 2.0 * r - (-7.0 + 12.0 * r - 4.0 * r * r).max(0.0).sqrt()) / 8.0
    } else {
        0.0
    }
}

/// Continuous Fourier transform of [`phi`] at angular frequency `s`
/// (radians per fluid meshwidth).
pub fn phi_hat(s: f64) -> f64 {
    let s = s.abs();
    if s >= ASYMPTOTIC_CUTOFF {
        phi_hat_asymptotic(s)
    } else {
        phi_hat_quadrature(s)
    }
}

/// Periodic Fourier coefficient `Phi(q)` of the kernel on `N` cells.
pub fn phi_coeff(q: i64, n: usize) -> Result<f64> {
    check_grid(n)?;
    Ok(phi_coeff_unchecked(q, n))
}

#[inline]
pub(crate) fn phi_coeff_unchecked(q: i64, n: usize) -> f64 {
    let nf = n as f64;
    phi_hat(2.0 * PI * q as f64 / nf) / nf
}

/// Representative of `xi` in `(-N/2, N/2]`.
#[inline]
pub fn fold(xi: i64, n: usize) -> i64 {
    let n = n as i64;
    let r = xi.rem_euclid(n);
    if 2 * r > n {
        r - n
    } else {
        r
    }
}

/// Tabulated `Phi(q)` for one grid size, with `|q| <= qcut`.
///
/// The table is immutable after construction and cheap to share.
#[derive(Clone, Debug)]
pub struct KernelTable {
    n: usize,
    qcut: usize,
    coeffs: Vec<f64>,
}

impl KernelTable {
    /// Table covering `|q| <= 2N`.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_qcut(n, 2 * n)
    }

    pub fn with_qcut(n: usize, qcut: usize) -> Result<Self> {
        check_grid(n)?;
        let coeffs = (0..=qcut as i64)
            .map(|q| phi_coeff_unchecked(q, n))
            .collect();
        Ok(Self { n, qcut, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn qcut(&self) -> usize {
        self.qcut
    }

    /// `Phi(q)`; falls back to direct evaluation outside the table.
    #[inline]
    pub fn coeff(&self, q: i64) -> f64 {
        let a = q.unsigned_abs() as usize;
        if a <= self.qcut {
            self.coeffs[a]
        } else {
            phi_coeff_unchecked(q, self.n)
        }
    }

    /// `Phi` at the band-limit representative of wavenumber `xi`.
    #[inline]
    pub fn folded(&self, xi: i64) -> f64 {
        self.coeff(fold(xi, self.n))
    }
}

/// `Σ_q Phi(q)^2` over all integers, truncated by the tail rule.
///
/// Returns the sum and the half-width of the window that was needed.
pub fn sum_of_squares(n: usize) -> Result<(f64, i64)> {
    check_grid(n)?;
    // Phi vanishes at every multiple of N/2, so the quiet run must span that period
    let (s, l) = symmetric_series((n / 2).max(2), |q| {
        let c = phi_coeff_unchecked(q, n);
        Complex64::new(c * c, 0.0)
    });
    Ok((s.re, l))
}

/// Fraction of `Σ Phi^2` carried by `|p| <= N/2`, with the denominator
/// taken from the closed form `3 / (8N)`.
pub fn bandlimit_ratio(n: usize) -> Result<f64> {
    check_grid(n)?;
    let half = (n / 2) as i64;
    let num: f64 = (-half..=half)
        .map(|p| phi_coeff_unchecked(p, n).powi(2))
        .sum();
    Ok(num / (SUM_OF_SQUARES / n as f64))
}

/// Sums `term(0) + Σ_{l>=1} (term(l) + term(-l))`, growing the window until
/// `quiet_run` consecutive pairs each have terms below `1e-14` and move the
/// partial sum by less than `1e-13`.
pub(crate) fn symmetric_series(
    quiet_run: usize,
    mut term: impl FnMut(i64) -> Complex64,
) -> (Complex64, i64) {
    const TERM_TOL: f64 = 1e-14;
    const SUM_TOL: f64 = 1e-13;
    const MAX_HALF_WIDTH: i64 = 10_000_000;

    let mut sum = term(0);
    let mut quiet = 0;
    let mut l = 0;
    while l < MAX_HALF_WIDTH {
        l += 1;
        let a = term(l);
        let b = term(-l);
        sum += a + b;
        if a.norm() < TERM_TOL && b.norm() < TERM_TOL && (a + b).norm() < SUM_TOL {
            quiet += 1;
            if quiet >= quiet_run {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    (sum, l)
}

fn gauss_legendre() -> &'static ([f64; GL_ORDER], [f64; GL_ORDER]) {
    static RULE: OnceLock<([f64; GL_ORDER], [f64; GL_ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut x = [0.0; GL_ORDER];
        let mut w = [0.0; GL_ORDER];
        for i in 0..n {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
        (x, w)
    })
}

/// `2 ∫_0^2 phi(r) cos(s r) dr` by composite Gauss–Legendre, panels scaled with `s`.
pub(crate) fn phi_hat_quadrature(s: f64) -> f64 {
    let (x, w) = gauss_legendre();
    let panels_per_unit = 8 + (s / 3.0).ceil() as usize;
    let width = 1.0 / panels_per_unit as f64;
    let mut total = 0.0;
    for p in 0..2 * panels_per_unit {
        let mid = (p as f64 + 0.5) * width;
        let half = 0.5 * width;
        let mut acc = 0.0;
        for i in 0..GL_ORDER {
            let r = mid + half * x[i];
            acc += w[i] * phi(r) * (s * r).cos();
        }
        total += half * acc;
    }
    2.0 * total
}

/// Taylor coefficients `c_k` of one smooth kernel piece about `r0`, where the
/// piece is `(a0 + a1 r + sign * sqrt(g0 + g1 r + g2 r^2)) / 8`.
fn piece_taylor(a: [f64; 2], sign: f64, g: [f64; 3], r0: f64, order: usize) -> Vec<f64> {
    let big_g = [
        g[0] + g[1] * r0 + g[2] * r0 * r0,
        g[1] + 2.0 * g[2] * r0,
        g[2],
    ];
    let mut y = vec![0.0; order + 1];
    y[0] = big_g[0].sqrt();
    for k in 1..=order {
        let gk = if k <= 2 { big_g[k] } else { 0.0 };
        let conv: f64 = (1..k).map(|i| y[i] * y[k - i]).sum();
        y[k] = (gk - conv) / (2.0 * y[0]);
    }
    let mut c: Vec<f64> = y.iter().map(|v| sign * v / 8.0).collect();
    c[0] += (a[0] + a[1] * r0) / 8.0;
    if order >= 1 {
        c[1] += a[1] / 8.0;
    }
    c
}

struct AsymptoticData {
    /// `(endpoint r, sign in [f]_a^b, k! c_k)` for each piece endpoint.
    endpoints: Vec<(f64, f64, Vec<f64>)>,
}

const ASYMPTOTIC_ORDER: usize = 90;

fn asymptotic_data() -> &'static AsymptoticData {
    static DATA: OnceLock<AsymptoticData> = OnceLock::new();
    DATA.get_or_init(|| {
        let inner = ([3.0, -2.0], 1.0, [1.0, 4.0, -4.0]);
        let outer = ([5.0, -2.0], -1.0, [-7.0, 12.0, -4.0]);
        let mut endpoints = Vec::new();
        for (piece, a, b) in [(inner, 0.0, 1.0), (outer, 1.0, 2.0)] {
            for (r0, sign) in [(b, 1.0), (a, -1.0)] {
                let c = piece_taylor(piece.0, piece.1, piece.2, r0, ASYMPTOTIC_ORDER);
                let mut fact = 1.0;
                let derivs = c
                    .iter()
                    .enumerate()
                    .map(|(k, ck)| {
                        if k > 0 {
                            fact *= k as f64;
                        }
                        fact * ck
                    })
                    .collect();
                endpoints.push((r0, sign, derivs));
            }
        }
        AsymptoticData { endpoints }
    })
}

/// `2 Re Σ_pieces ∫ f e^{isr} dr` via repeated integration by parts:
/// `∫_a^b f e^{isr} = Σ_k (-1)^k [f^(k) e^{isr}]_a^b / (is)^{k+1}`,
/// truncated at the smallest term.
pub(crate) fn phi_hat_asymptotic(s: f64) -> f64 {
    let data = asymptotic_data();
    let phases: Vec<Complex64> = data
        .endpoints
        .iter()
        .map(|(r, _, _)| Complex64::from_polar(1.0, s * r))
        .collect();
    let is = Complex64::new(0.0, s);
    let mut inv_pow = 1.0 / is;
    let mut total = Complex64::new(0.0, 0.0);
    let mut prev_bound = f64::INFINITY;
    for k in 0..=ASYMPTOTIC_ORDER {
        let mut d = Complex64::new(0.0, 0.0);
        let mut bound = 0.0;
        for ((_, sign, derivs), ph) in data.endpoints.iter().zip(&phases) {
            d += ph * (sign * derivs[k]);
            bound += derivs[k].abs();
        }
        let bound = bound * inv_pow.norm();
        if k >= 3 && (bound > prev_bound || bound < 1e-22) {
            break;
        }
        let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
        total += d * inv_pow * sgn;
        inv_pow /= is;
        prev_bound = bound;
    }
    2.0 * total.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.0), 0.5);
        assert!((phi(1.0) - 0.25).abs() < 1e-15);
        assert_eq!(phi(2.5), 0.0);
        assert_eq!(phi(2.0), 0.0);
        let s = phi(0.5) + phi(-0.5) + phi(1.5) + phi(-1.5);
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phi_continuous_at_breakpoints() {
        for r in [1.0_f64, 2.0] {
            let below = phi(r - 1e-12);
            let above = phi(r + 1e-12);
            assert!((below - above).abs() < 1e-10, "r = {r}");
        }
    }

    #[test]
    fn partition_of_unity_and_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let eps: f64 = rng.random();
            let (mut s1, mut s2) = (0.0, 0.0);
            for j in -3..=3 {
                let v = phi(j as f64 + eps);
                s1 += v;
                s2 += v * v;
            }
            assert!((s1 - 1.0).abs() < 1e-13);
            assert!((s2 - SUM_OF_SQUARES).abs() < 1e-13);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre();
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        // ∫_{-1}^{1} x^38 = 2/39
        let m: f64 = x.iter().zip(w).map(|(x, w)| w * x.powi(38)).sum();
        assert!((m - 2.0 / 39.0).abs() < 1e-14);
    }

    #[test]
    fn phi_hat_at_zero_is_unit_mass() {
        assert!((phi_hat(0.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn phi_hat_vanishes_at_odd_multiples_of_pi_and_even_multiples() {
        // even/odd sub-sums of phi are 1/2 each, so phi_hat(kπ) = 0 for k != 0
        for k in 1..200 {
            let v = phi_hat(k as f64 * PI);
            assert!(v.abs() < 1e-14, "k = {k}: {v:e}");
        }
    }

    #[test]
    fn asymptotic_matches_quadrature_in_overlap() {
        for s in [180.0, 200.5, 250.0, 333.3, 600.0] {
            let q = phi_hat_quadrature(s);
            let a = phi_hat_asymptotic(s);
            assert!((q - a).abs() < 1e-15, "s = {s}: {q:e} vs {a:e}");
        }
    }

    #[test]
    fn coefficient_is_scaled_transform() {
        for n in [4usize, 16, 64] {
            for q in -2 * n as i64..=2 * n as i64 {
                let direct = phi_coeff(q, n).unwrap();
                let via_hat = phi_hat(2.0 * PI * q as f64 / n as f64) / n as f64;
                assert!((direct - via_hat).abs() < 1e-11);
                assert_eq!(direct, phi_coeff(-q, n).unwrap());
            }
        }
    }

    #[test]
    fn coefficient_zero_mode() {
        assert!((phi_coeff(0, 16).unwrap() - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_grids() {
        assert!(phi_coeff(0, 3).is_err());
        assert!(bandlimit_ratio(2).is_err());
        assert!(KernelTable::new(3).is_err());
    }

    #[test]
    fn table_invariants() {
        let t = KernelTable::new(16).unwrap();
        let c0 = t.coeff(0);
        assert!((c0 - 1.0 / 16.0).abs() < 1e-14);
        for q in -40..=40 {
            assert_eq!(t.coeff(q), t.coeff(-q));
            assert!(t.coeff(q).abs() <= c0 + 1e-15);
        }
        assert_eq!(t.folded(15), t.coeff(-1));
        assert_eq!(t.folded(8), t.coeff(8));
    }

    #[test]
    fn fold_range() {
        assert_eq!(fold(0, 8), 0);
        assert_eq!(fold(4, 8), 4);
        assert_eq!(fold(5, 8), -3);
        assert_eq!(fold(-1, 8), -1);
        assert_eq!(fold(17, 8), 1);
    }

    #[test]
    fn sum_of_squares_closed_form() {
        for n in [4usize, 8, 16, 64] {
            let (s, _) = sum_of_squares(n).unwrap();
            // the truncated tail of a q^-6 series leaves a bias of order 1e-12
            assert!((s - 3.0 / (8.0 * n as f64)).abs() < 1e-11, "N = {n}");
        }
    }

    #[test]
    fn bandlimit_ratio_is_a_fraction() {
        let mut n = 4;
        while n <= 256 {
            let r = bandlimit_ratio(n).unwrap();
            assert!(r > 0.0 && r <= 1.0, "N = {n}: {r}");
            n *= 2;
        }
    }

    /// Riemann sums of `phi_hat^2` converge to `2π · 3/8`, not `3/8`.
    #[test]
    fn parseval_constant_of_transform() {
        // Σ_q Phi(q)^2 = 3/(8N) is a Riemann sum with ds = 2π/N of phi_hat^2 / N^2,
        // so ∫ phi_hat^2 ds = 2π · 3/8. Check with direct quadrature over a long window.
        let ds = 0.01;
        let mut total = 0.0;
        let mut s = 0.5 * ds;
        while s < 400.0 {
            total += 2.0 * phi_hat(s).powi(2) * ds;
            s += ds;
        }
        assert!((total - 2.0 * PI * SUM_OF_SQUARES).abs() < 1e-6, "{total}");
    }
}
