//! Boundary force laws and their leapfrog updates.
//!
//! Target points act as integral controllers, `F' = F - Δt K U`, so no
//! position is stored. The membrane keeps positions, `X' = X + Δt U`, and
//! its force is `K` times the periodic 5-point Laplacian of the displacement
//! from the rest lattice. Forces are densities per unit boundary area.

use crate::error::{check_nonnegative, check_positive, Error, Result};
use crate::field::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForcingKind {
    TargetPoint,
    Membrane,
}

/// Where the kernels of a membrane are centered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaMode {
    FixedAtTarget,
    Moving,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForcingModel {
    pub kind: ForcingKind,
    pub k: f64,
    pub delta_mode: DeltaMode,
}

impl ForcingModel {
    /// `k = 0` is accepted and switches the boundary force off.
    pub fn new(kind: ForcingKind, k: f64, delta_mode: DeltaMode) -> Result<Self> {
        check_nonnegative("k", k)?;
        if kind == ForcingKind::TargetPoint && delta_mode == DeltaMode::Moving {
            return Err(Error::InvalidParameter {
                name: "delta_mode",
                reason: "target points always use kernels fixed at the targets".into(),
            });
        }
        Ok(Self {
            kind,
            k,
            delta_mode,
        })
    }

    pub fn target(k: f64) -> Result<Self> {
        Self::new(ForcingKind::TargetPoint, k, DeltaMode::FixedAtTarget)
    }

    pub fn membrane(k: f64, delta_mode: DeltaMode) -> Result<Self> {
        Self::new(ForcingKind::Membrane, k, delta_mode)
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(format!(
            "boundary arrays of length {a} and {b}"
        )));
    }
    Ok(())
}

/// `F^{n+1/2} = F^{n-1/2} - Δt K U^n`.
pub fn target_force_update(f_prev: &[Vec3], u: &[Vec3], k: f64, dt: f64) -> Result<Vec<Vec3>> {
    check_lengths(f_prev.len(), u.len())?;
    let c = dt * k;
    Ok(f_prev
        .iter()
        .zip(u)
        .map(|(f, v)| [f[0] - c * v[0], f[1] - c * v[1], f[2] - c * v[2]])
        .collect())
}

/// `X^{n+1/2} = X^{n-1/2} + Δt U^n`.
pub fn membrane_step(x_prev: &[Vec3], u: &[Vec3], dt: f64) -> Result<Vec<Vec3>> {
    check_lengths(x_prev.len(), u.len())?;
    Ok(x_prev
        .iter()
        .zip(u)
        .map(|(x, v)| [x[0] + dt * v[0], x[1] + dt * v[1], x[2] + dt * v[2]])
        .collect())
}

/// `F = K Δ_{h_B} X` on the periodic `m x m` lattice, evaluated on the
/// displacement `X - X0` so the affine rest lattice contributes nothing.
pub fn membrane_force(x: &[Vec3], x0: &[Vec3], m: usize, k: f64, hb: f64) -> Result<Vec<Vec3>> {
    check_lengths(x.len(), x0.len())?;
    check_lengths(x.len(), m * m)?;
    check_positive("h_b", hb)?;
    let d: Vec<Vec3> = x
        .iter()
        .zip(x0)
        .map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2]])
        .collect();
    let c = k / (hb * hb);
    let mut out = vec![[0.0; 3]; m * m];
    for k2 in 0..m {
        let up = (k2 + 1) % m;
        let dn = (k2 + m - 1) % m;
        for k1 in 0..m {
            let rt = (k1 + 1) % m;
            let lt = (k1 + m - 1) % m;
            let i = k1 + m * k2;
            for a in 0..3 {
                out[i][a] = c
                    * (d[rt + m * k2][a]
                        + d[lt + m * k2][a]
                        + d[k1 + m * up][a]
                        + d[k1 + m * dn][a]
                        - 4.0 * d[i][a]);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn lattice(m: usize, hb: f64) -> Vec<Vec3> {
        (0..m * m)
            .map(|i| [(i % m) as f64 * hb, (i / m) as f64 * hb, 0.0])
            .collect()
    }

    #[test]
    fn model_validation() {
        assert!(ForcingModel::target(1.0).is_ok());
        assert!(ForcingModel::target(0.0).is_ok());
        assert!(ForcingModel::target(-1.0).is_err());
        assert!(ForcingModel::new(ForcingKind::TargetPoint, 1.0, DeltaMode::Moving).is_err());
        assert!(ForcingModel::membrane(1.0, DeltaMode::Moving).is_ok());
    }

    #[test]
    fn target_update_examples() {
        let f = vec![[1.0, 2.0, 3.0]; 4];
        assert_eq!(
            target_force_update(&f, &[[0.0; 3]; 4], 5.0, 0.1).unwrap(),
            f
        );
        let out = target_force_update(&[[0.0; 3]; 4], &[[1.0, -1.0, 2.0]; 4], 5.0, 0.1).unwrap();
        for v in out {
            assert!(
                (v[0] + 0.5).abs() < 1e-15
                    && (v[1] - 0.5).abs() < 1e-15
                    && (v[2] + 1.0).abs() < 1e-15
            );
        }
        let u = [[0.3, 0.2, -0.1]; 4];
        let two = target_force_update(
            &target_force_update(&f, &u, 7.0, 0.1).unwrap(),
            &u,
            7.0,
            0.1,
        )
        .unwrap();
        let one = target_force_update(&f, &u, 7.0, 0.2).unwrap();
        for (a, b) in two.iter().zip(&one) {
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() < 1e-14);
            }
        }
        assert!(target_force_update(&f, &u[..2], 1.0, 1.0).is_err());
    }

    #[test]
    fn membrane_step_examples() {
        let x = lattice(4, 0.25);
        assert_eq!(membrane_step(&x, &vec![[0.0; 3]; 16], 0.1).unwrap(), x);
        let moved = membrane_step(&x, &vec![[1.0, 0.0, -2.0]; 16], 0.1).unwrap();
        for (a, b) in moved.iter().zip(&x) {
            assert!((a[0] - b[0] - 0.1).abs() < 1e-15 && (a[2] - b[2] + 0.2).abs() < 1e-15);
        }
        let u = vec![[0.1, 0.2, 0.3]; 16];
        let two = membrane_step(&membrane_step(&x, &u, 0.05).unwrap(), &u, 0.05).unwrap();
        let one = membrane_step(&x, &u, 0.1).unwrap();
        for (a, b) in two.iter().zip(&one) {
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn flat_membrane_is_force_free() {
        let x0 = lattice(8, 0.125);
        let f = membrane_force(&x0, &x0, 8, 100.0, 0.125).unwrap();
        assert!(f.iter().flatten().all(|&v| v == 0.0));
        // a rigid lift is also force free
        let lifted: Vec<Vec3> = x0.iter().map(|x| [x[0], x[1], 0.3]).collect();
        let f = membrane_force(&lifted, &x0, 8, 100.0, 0.125).unwrap();
        assert!(f.iter().flatten().all(|&v| v.abs() < 1e-10));
    }

    #[test]
    fn sine_eigenfunction() {
        let m = 12;
        let hb = 1.0 / m as f64;
        let (a, k) = (0.01, 100.0);
        let x0 = lattice(m, hb);
        let x: Vec<Vec3> = x0
            .iter()
            .enumerate()
            .map(|(i, p)| [p[0], p[1], a * (2.0 * PI * (i % m) as f64 / m as f64).sin()])
            .collect();
        let f = membrane_force(&x, &x0, m, k, hb).unwrap();
        for (i, v) in f.iter().enumerate() {
            let k1 = (i % m) as f64;
            let expect = -(4.0 * a * k / (hb * hb))
                * (PI / m as f64).sin().powi(2)
                * (2.0 * PI * k1 / m as f64).sin();
            assert!((v[2] - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        let x0 = lattice(4, 0.25);
        assert!(membrane_force(&x0, &x0, 5, 1.0, 0.25).is_err());
        assert!(membrane_force(&x0[..3], &x0, 4, 1.0, 0.25).is_err());
        assert!(membrane_force(&x0, &x0, 4, 1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn membrane_force_sums_to_zero_and_is_dissipative(
            d in proptest::collection::vec(proptest::array::uniform3(-1.0..1.0f64), 36)
        ) {
            let m = 6;
            let hb = 1.0 / m as f64;
            let x0 = lattice(m, hb);
            let x: Vec<Vec3> = x0.iter().zip(&d).map(|(p, e)| [p[0] + e[0], p[1] + e[1], p[2] + e[2]]).collect();
            let f = membrane_force(&x, &x0, m, 3.0, hb).unwrap();
            let norm: f64 = f.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
            for a in 0..3 {
                let total: f64 = f.iter().map(|v| v[a]).sum();
                prop_assert!(total.abs() <= 1e-12 * norm.max(1.0));
            }
            let work: f64 = d.iter().zip(&f).map(|(e, v)| e[0] * v[0] + e[1] * v[1] + e[2] * v[2]).sum();
            prop_assert!(work <= 1e-9);
        }

        #[test]
        fn target_update_is_linear(
            a in -2.0..2.0f64, b in -2.0..2.0f64,
            f1 in proptest::array::uniform3(-1.0..1.0f64), f2 in proptest::array::uniform3(-1.0..1.0f64),
            u1 in proptest::array::uniform3(-1.0..1.0f64), u2 in proptest::array::uniform3(-1.0..1.0f64),
        ) {
            let comb = |x: Vec3, y: Vec3| [a * x[0] + b * y[0], a * x[1] + b * y[1], a * x[2] + b * y[2]];
            let lhs = target_force_update(&[comb(f1, f2)], &[comb(u1, u2)], 3.0, 0.2).unwrap()[0];
            let r1 = target_force_update(&[f1], &[u1], 3.0, 0.2).unwrap()[0];
            let r2 = target_force_update(&[f2], &[u2], 3.0, 0.2).unwrap()[0];
            let rhs = comb(r1, r2);
            for c in 0..3 {
                prop_assert!((lhs[c] - rhs[c]).abs() < 1e-12);
            }
        }
    }
}
