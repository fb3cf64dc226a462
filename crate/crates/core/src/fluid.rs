//! Periodic Stokes stepping: trapezoidal viscosity with the pressure removed
//! by the discrete Helmholtz projector, solved mode by mode in Fourier space.

use crate::error::{check_nonnegative, check_positive, Error, Result};
use crate::field::{Grid, VectorField};
use crate::spectral::{dft3_with, idft3_with, Fft3, OperatorSymbols, SpectralField3D};

/// Velocity on the fluid grid together with its spectrum, kept in sync by
/// [`StokesSolver`].
#[derive(Clone, Debug)]
pub struct FluidState {
    u: VectorField,
    u_hat: SpectralField3D,
    pub t: f64,
    pub step_index: usize,
}

impl FluidState {
    pub fn velocity(&self) -> &VectorField {
        &self.u
    }

    pub fn spectrum(&self) -> &SpectralField3D {
        &self.u_hat
    }

    pub fn grid(&self) -> Grid {
        self.u.grid
    }

    pub fn energy(&self) -> f64 {
        energy(&self.u)
    }
}

/// Discrete L² norm `sqrt(Σ_j |u_j|^2 h^3)`.
pub fn energy(u: &VectorField) -> f64 {
    (u.sum_squares() * u.grid.h().powi(3)).sqrt()
}

/// Solver for `ρ(u' - u)/Δt + ∇_h p = μ Δ_h (u' + u)/2 + f`, `∇_h · u' = 0`.
#[derive(Clone, Debug)]
pub struct StokesSolver {
    grid: Grid,
    rho: f64,
    mu: f64,
    ops: OperatorSymbols,
    fft: Fft3,
}

impl StokesSolver {
    pub fn new(grid: Grid, rho: f64, mu: f64) -> Result<Self> {
        check_positive("rho", rho)?;
        check_nonnegative("mu", mu)?;
        Ok(Self {
            grid,
            rho,
            mu,
            ops: OperatorSymbols::new(grid.n, grid.h())?,
            fft: Fft3::new(grid.n)?,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn symbols(&self) -> &OperatorSymbols {
        &self.ops
    }

    /// Wrap a velocity field as a state at `t = 0`.
    pub fn state(&mut self, u: VectorField) -> Result<FluidState> {
        self.check_grid(&u)?;
        let u_hat = dft3_with(&mut self.fft, &u)?;
        Ok(FluidState {
            u,
            u_hat,
            t: 0.0,
            step_index: 0,
        })
    }

    pub fn transform(&mut self, f: &VectorField) -> Result<SpectralField3D> {
        self.check_grid(f)?;
        dft3_with(&mut self.fft, f)
    }

    /// Advance one step of length `dt` with body force `f` (force/volume)
    /// held at the half step. `None` means no force.
    ///
    /// The projector is applied to the whole right-hand side, so a state
    /// that is not yet divergence-free is projected on the way.
    pub fn step(&mut self, state: &mut FluidState, f: Option<&VectorField>, dt: f64) -> Result<()> {
        check_positive("dt", dt)?;
        self.check_grid(&state.u)?;
        let f_hat = match f {
            Some(f) => Some(self.transform(f)?),
            None => None,
        };
        let n = self.grid.n;
        let nu_half = dt * self.mu / (2.0 * self.rho);
        let force_scale = dt / self.rho;
        let u_hat = &mut state.u_hat;
        let wavenumbers =
            (0..n).flat_map(|c| (0..n).flat_map(move |b| (0..n).map(move |a| [a, b, c])));
        for (idx, xi) in wavenumbers.enumerate() {
            let kappa = nu_half * self.ops.laplacian(xi);
            let mut rhs = u_hat.get(idx);
            for a in 0..3 {
                rhs[a] *= 1.0 + kappa;
            }
            if let Some(fh) = &f_hat {
                let fv = fh.get(idx);
                for a in 0..3 {
                    rhs[a] += fv[a] * force_scale;
                }
            }
            let mut out = self.ops.project(xi, rhs);
            let inv = 1.0 / (1.0 - kappa);
            for v in &mut out {
                *v *= inv;
            }
            u_hat.set(idx, out);
        }
        state.u = idft3_with(&mut self.fft, &state.u_hat, self.grid.l)?;
        state.t += dt;
        state.step_index += 1;
        Ok(())
    }

    /// Discrete Helmholtz projection of `u`.
    pub fn project(&mut self, u: &VectorField) -> Result<VectorField> {
        let mut s = self.transform(u)?;
        let n = self.grid.n;
        for idx in 0..n * n * n {
            let xi = s.wavenumber(idx);
            let v = self.ops.project(xi, s.get(idx));
            s.set(idx, v);
        }
        idft3_with(&mut self.fft, &s, self.grid.l)
    }

    /// `max_ξ |∇̂_h(ξ) · û(ξ)|` scaled by `h`, i.e. in units of velocity.
    pub fn spectral_divergence_defect(&self, state: &FluidState) -> f64 {
        let s = &state.u_hat;
        let h = self.grid.h();
        (0..s.data[0].len())
            .map(|idx| (self.ops.divergence(s.wavenumber(idx), s.get(idx)) * h).norm())
            .fold(0.0, f64::max)
    }

    fn check_grid(&self, u: &VectorField) -> Result<()> {
        if u.grid.n != self.grid.n {
            return Err(Error::GridMismatch(format!(
                "solver on N = {}, field on N = {}",
                self.grid.n, u.grid.n
            )));
        }
        Ok(())
    }
}

/// One step from `u_n`, building a solver on the fly.
pub fn stokes_step(
    u_n: &FluidState,
    f_half: Option<&VectorField>,
    dt: f64,
    mu: f64,
    rho: f64,
) -> Result<FluidState> {
    let mut solver = StokesSolver::new(u_n.grid(), rho, mu)?;
    if let Some(f) = f_half {
        solver.check_grid(f)?;
    }
    let mut next = u_n.clone();
    solver.step(&mut next, f_half, dt)?;
    Ok(next)
}

/// Centered-difference divergence `Σ_β (u_β(j+e_β) - u_β(j-e_β)) / 2h`.
pub fn divergence(u: &VectorField) -> Vec<f64> {
    let g = u.grid;
    let n = g.n;
    let inv2h = 0.5 / g.h();
    let mut out = vec![0.0; g.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let j = g.coords(idx);
        let j = [j.0, j.1, j.2];
        let mut d = 0.0;
        for b in 0..3 {
            let mut jp = j;
            let mut jm = j;
            jp[b] = (j[b] + 1) % n;
            jm[b] = (j[b] + n - 1) % n;
            d +=
                u.comps[b][g.index(jp[0], jp[1], jp[2])] - u.comps[b][g.index(jm[0], jm[1], jm[2])];
        }
        *o = d * inv2h;
    }
    out
}

/// Explicit advective acceleration `-(u · ∇_h) u` with centered differences.
pub fn advect(u: &VectorField) -> VectorField {
    let g = u.grid;
    let n = g.n;
    let inv2h = 0.5 / g.h();
    let mut out = VectorField::zeros(g);
    for idx in 0..g.len() {
        let (j1, j2, j3) = g.coords(idx);
        let j = [j1, j2, j3];
        let vel = u.get(idx);
        for b in 0..3 {
            if vel[b] == 0.0 {
                continue;
            }
            let mut jp = j;
            let mut jm = j;
            jp[b] = (j[b] + 1) % n;
            jm[b] = (j[b] + n - 1) % n;
            let ip = g.index(jp[0], jp[1], jp[2]);
            let im = g.index(jm[0], jm[1], jm[2]);
            for a in 0..3 {
                out.comps[a][idx] -= vel[b] * (u.comps[a][ip] - u.comps[a][im]) * inv2h;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_field(grid: Grid, rng: &mut ChaCha8Rng) -> VectorField {
        VectorField::from_fn(grid, |_, _, _| {
            [
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
            ]
        })
    }

    #[test]
    fn single_mode_decays_by_trapezoidal_gain() {
        let n = 16;
        let grid = Grid::new(n, 1.0).unwrap();
        let (dt, mu, rho) = (0.01, 0.3, 1.2);
        let h = grid.h();
        let u = VectorField::from_fn(grid, |j1, _, _| {
            [0.0, (2.0 * PI * j1 as f64 / n as f64).sin(), 0.0]
        });
        let mut solver = StokesSolver::new(grid, rho, mu).unwrap();
        let mut s = solver.state(u.clone()).unwrap();
        solver.step(&mut s, None, dt).unwrap();
        let kappa = dt * mu / (2.0 * rho) * 4.0 / (h * h) * (PI / n as f64).sin().powi(2);
        let gain = (1.0 - kappa) / (1.0 + kappa);
        for idx in 0..grid.len() {
            assert!((s.velocity().comps[1][idx] - gain * u.comps[1][idx]).abs() < 1e-13);
        }
        assert_eq!(s.step_index, 1);
        assert!((s.t - dt).abs() < 1e-15);
    }

    #[test]
    fn constant_field_unchanged() {
        let grid = Grid::new(8, 1.0).unwrap();
        let u = VectorField::constant(grid, [1.0, -2.0, 0.5]);
        let s0 = StokesSolver::new(grid, 1.0, 0.1)
            .unwrap()
            .state(u.clone())
            .unwrap();
        let s1 = stokes_step(&s0, None, 0.1, 0.1, 1.0).unwrap();
        for a in 0..3 {
            for (x, y) in s1.velocity().comps[a].iter().zip(&u.comps[a]) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn energy_examples() {
        let grid = Grid::new(8, 1.0).unwrap();
        assert_eq!(energy(&VectorField::zeros(grid)), 0.0);
        let e = energy(&VectorField::constant(grid, [1.0, 0.0, 0.0]));
        assert!((e - 1.0).abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_field(grid, &mut rng);
        let mut solver = StokesSolver::new(grid, 1.0, 0.0).unwrap();
        let s = solver.state(u.clone()).unwrap();
        let parseval = s.spectrum().sum_norm_sqr() / grid.len() as f64 * grid.h().powi(3);
        assert!((energy(&u).powi(2) - parseval).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        let grid = Grid::new(4, 1.0).unwrap();
        assert!(StokesSolver::new(grid, 0.0, 1.0).is_err());
        assert!(StokesSolver::new(grid, 1.0, -1.0).is_err());
        let mut solver = StokesSolver::new(grid, 1.0, 1.0).unwrap();
        let mut s = solver.state(VectorField::zeros(grid)).unwrap();
        let wrong = VectorField::zeros(Grid::new(8, 1.0).unwrap());
        assert!(solver.step(&mut s, Some(&wrong), 0.1).is_err());
        assert!(solver.state(wrong).is_err());
        assert!(solver.step(&mut s, None, 0.0).is_err());
    }

    #[test]
    fn output_is_divergence_free() {
        let grid = Grid::new(8, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut solver = StokesSolver::new(grid, 1.0, 0.05).unwrap();
        let mut s = solver.state(random_field(grid, &mut rng)).unwrap();
        let f = random_field(grid, &mut rng);
        solver.step(&mut s, Some(&f), 0.01).unwrap();
        let umax = s
            .spectrum()
            .data
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(solver.spectral_divergence_defect(&s) <= 1e-10 * umax);
        let div = divergence(s.velocity());
        let dmax = div.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        assert!(dmax < 1e-10 * s.velocity().max_abs() / grid.h());
    }

    #[test]
    fn translation_equivariance() {
        let grid = Grid::new(8, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_field(grid, &mut rng);
        let mut solver = StokesSolver::new(grid, 1.0, 0.2).unwrap();
        let mut a = solver.state(u.clone()).unwrap();
        let mut b = solver.state(u.shifted([1, 0, 2])).unwrap();
        solver.step(&mut a, None, 0.05).unwrap();
        solver.step(&mut b, None, 0.05).unwrap();
        let sa = a.velocity().shifted([1, 0, 2]);
        for c in 0..3 {
            for (x, y) in sa.comps[c].iter().zip(&b.velocity().comps[c]) {
                assert!((x - y).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn unforced_energy_never_grows() {
        let grid = Grid::new(8, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut solver = StokesSolver::new(grid, 1.0, 0.1).unwrap();
        let u0 = solver.project(&random_field(grid, &mut rng)).unwrap();
        for dt in [1e-6, 1e-3, 1.0, 1e3] {
            let mut s = solver.state(u0.clone()).unwrap();
            let mut prev = s.energy();
            for _ in 0..20 {
                solver.step(&mut s, None, dt).unwrap();
                let e = s.energy();
                assert!(e <= prev * (1.0 + 1e-14), "dt = {dt}");
                prev = e;
            }
        }
    }

    #[test]
    fn advect_examples() {
        let n = 8;
        let grid = Grid::new(n, 1.0).unwrap();
        let c = advect(&VectorField::constant(grid, [1.0, 2.0, 3.0]));
        assert_eq!(c.max_abs(), 0.0);
        let shear = VectorField::from_fn(grid, |_, j2, _| {
            [(2.0 * PI * j2 as f64 / n as f64).sin(), 0.0, 0.0]
        });
        assert!(advect(&shear).max_abs() < 1e-15);

        // u = (sin(2π x1), 0, 0): -(u ∂1) u1 = -sin · (sin(x+h) - sin(x-h))/2h
        let wave = VectorField::from_fn(grid, |j1, _, _| {
            [(2.0 * PI * j1 as f64 / n as f64).sin(), 0.0, 0.0]
        });
        let a = advect(&wave);
        let h = grid.h();
        for idx in 0..grid.len() {
            let (j1, _, _) = grid.coords(idx);
            let x = j1 as f64 * h;
            let s = (2.0 * PI * x).sin();
            let d = ((2.0 * PI * (x + h)).sin() - (2.0 * PI * (x - h)).sin()) / (2.0 * h);
            assert!((a.comps[0][idx] + s * d).abs() < 1e-12);
        }
    }

    /// Dense assembly of the coupled momentum and incompressibility system at
    /// small N, solved directly.
    fn dense_solve(u: &VectorField, f: &VectorField, dt: f64, mu: f64, rho: f64) -> VectorField {
        let g = u.grid;
        let m = g.len();
        let h = g.h();
        let dim = 4 * m;
        let mut a = DMatrix::<f64>::zeros(dim, dim);
        let mut rhs = DVector::<f64>::zeros(dim);
        let nb = |idx: usize, axis: usize, off: i64| {
            let (j1, j2, j3) = g.coords(idx);
            let mut j = [j1 as i64, j2 as i64, j3 as i64];
            j[axis] += off;
            g.index(g.wrap(j[0]), g.wrap(j[1]), g.wrap(j[2]))
        };
        let lap = |vals: &Vec<f64>, idx: usize| -> f64 {
            let mut s = -6.0 * vals[idx];
            for axis in 0..3 {
                s += vals[nb(idx, axis, 1)] + vals[nb(idx, axis, -1)];
            }
            s / (h * h)
        };
        for c in 0..3 {
            for idx in 0..m {
                let row = c * m + idx;
                a[(row, row)] += rho / dt + mu * 3.0 / (h * h);
                for axis in 0..3 {
                    for off in [1, -1] {
                        a[(row, c * m + nb(idx, axis, off))] -= mu / (2.0 * h * h);
                    }
                }
                a[(row, 3 * m + nb(idx, c, 1))] += 1.0 / (2.0 * h);
                a[(row, 3 * m + nb(idx, c, -1))] -= 1.0 / (2.0 * h);
                rhs[row] =
                    rho / dt * u.comps[c][idx] + mu / 2.0 * lap(&u.comps[c], idx) + f.comps[c][idx];
            }
        }
        for idx in 0..m {
            let row = 3 * m + idx;
            for c in 0..3 {
                a[(row, c * m + nb(idx, c, 1))] += 1.0 / (2.0 * h);
                a[(row, c * m + nb(idx, c, -1))] -= 1.0 / (2.0 * h);
            }
        }
        // pin the eight checkerboard pressure modes, which the centered
        // gradient cannot see, so the system becomes nonsingular
        for b in 0..8usize {
            let sign = |idx: usize| {
                let (j1, j2, j3) = g.coords(idx);
                let e = (b & 1) * j1 + (b >> 1 & 1) * j2 + (b >> 2 & 1) * j3;
                if e % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            };
            for r in 0..m {
                for c in 0..m {
                    a[(3 * m + r, 3 * m + c)] += sign(r) * sign(c) / m as f64;
                }
            }
        }
        let sol = a.full_piv_lu().solve(&rhs).unwrap();
        VectorField::from_fn(g, |j1, j2, j3| {
            let idx = g.index(j1, j2, j3);
            [sol[idx], sol[m + idx], sol[2 * m + idx]]
        })
    }

    #[test]
    fn matches_dense_saddle_point_solve() {
        let grid = Grid::new(4, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for trial in 0..20 {
            let dt = 10f64.powf(rng.random_range(-3.0..0.0));
            let mu = rng.random_range(0.0..0.5);
            let rho = rng.random_range(0.5..2.0);
            let mut solver = StokesSolver::new(grid, rho, mu).unwrap();
            // odd trials start from a state with divergence
            let raw = random_field(grid, &mut rng);
            let u = if trial % 2 == 0 {
                solver.project(&raw).unwrap()
            } else {
                raw
            };
            let f = random_field(grid, &mut rng);
            let mut s = solver.state(u.clone()).unwrap();
            solver.step(&mut s, Some(&f), dt).unwrap();
            let oracle = dense_solve(&u, &f, dt, mu, rho);
            let scale = oracle.max_abs().max(1.0);
            for c in 0..3 {
                for (x, y) in s.velocity().comps[c].iter().zip(&oracle.comps[c]) {
                    assert!((x - y).abs() < 1e-10 * scale, "trial {trial}: {x} vs {y}");
                }
            }
        }
    }
}
