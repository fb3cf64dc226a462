//! Channel-flow convergence study with a target-point wall at `z = 0`.
//!
//! Under periodicity the planes `z = 0` and `z = L` coincide, so one sheet
//! bounds a channel of height `L`. Each run starts from the analytic
//! profile `u_x = (f0 / 2μ) z (L - z)` with the wall already carrying the
//! balancing force, and measures the drift away from it.

use crate::error::{check_grid, check_positive, Error, Result};
use crate::field::Vec3;

use super::config::{Init, SimConfig};
use super::sim::Simulation;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoiseuilleOptions {
    pub levels: usize,
    pub base_n: usize,
    pub p: usize,
    pub l: f64,
    pub rho: f64,
    pub mu: f64,
    pub f0: f64,
    pub k0: f64,
    pub dt0: f64,
    /// Defaults to `2 L^2 / μ`, two viscous diffusion times across the box.
    pub t_end: f64,
}

impl Default for PoiseuilleOptions {
    fn default() -> Self {
        Self {
            levels: 3,
            base_n: 16,
            p: 2,
            l: 1.0,
            rho: 1.0,
            mu: 0.07,
            f0: 0.1,
            k0: 8e4,
            dt0: 1.0 / 400.0,
            t_end: 2.0 / 0.07,
        }
    }
}

/// L1, L2 and max norms.
pub type Norms = [f64; 3];

#[derive(Clone, Debug, PartialEq)]
pub struct PoiseuilleRow {
    pub n: usize,
    pub k: f64,
    pub dt: f64,
    pub steps: usize,
    /// Velocity error against the analytic profile, weighted by `h^3`.
    pub err_u: Norms,
    /// Marker displacement from the targets, weighted by `h_B^2`.
    pub d: Norms,
}

fn norms(values: impl Iterator<Item = Vec3>, weight: f64) -> Norms {
    let (mut l1, mut l2, mut li) = (0.0, 0.0, 0.0_f64);
    for v in values {
        let m2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        let m = m2.sqrt();
        l1 += m;
        l2 += m2;
        li = li.max(m);
    }
    [l1 * weight, (l2 * weight).sqrt(), li]
}

/// One refinement level; level 0 is the base grid.
pub fn poiseuille_level(opts: &PoiseuilleOptions, level: usize) -> Result<PoiseuilleRow> {
    let scale = 1usize << level;
    let n = opts.base_n * scale;
    let dt = opts.dt0 / scale as f64;
    let k = opts.k0 * scale as f64;
    let steps = ((opts.t_end / dt).round() as usize).max(1);
    let cfg = SimConfig {
        n,
        p: opts.p,
        l: opts.l,
        rho: opts.rho,
        mu: opts.mu,
        k,
        dt,
        steps,
        init: Init::Poiseuille,
        f0: opts.f0,
        eps: [0.0; 3],
        ..SimConfig::default()
    };
    let mut sim = Simulation::new(&cfg)?;
    for _ in 0..steps {
        sim.advance()?;
    }
    let grid = sim.fluid().grid();
    let h = grid.h();
    let c = opts.f0 / (2.0 * opts.mu);
    let u = sim.fluid().velocity();
    let err_u = norms(
        (0..grid.len()).map(|idx| {
            let (_, _, j3) = grid.coords(idx);
            let z = j3 as f64 * h;
            let v = u.get(idx);
            [v[0] - c * z * (opts.l - z), v[1], v[2]]
        }),
        h.powi(3),
    );
    let sheet = sim.sheet();
    let d = norms(
        sim.positions()
            .iter()
            .zip(&sheet.x0)
            .map(|(x, x0)| [x[0] - x0[0], x[1] - x0[1], x[2] - x0[2]]),
        sheet.hb().powi(2),
    );
    Ok(PoiseuilleRow {
        n,
        k,
        dt,
        steps,
        err_u,
        d,
    })
}

/// Run `levels` refinements, doubling `N` and `K` and halving `dt` each time.
pub fn poiseuille_experiment(opts: &PoiseuilleOptions) -> Result<Vec<PoiseuilleRow>> {
    if opts.levels < 2 {
        return Err(Error::InvalidParameter {
            name: "levels",
            reason: format!(
                "a convergence table needs at least 2 levels, got {}",
                opts.levels
            ),
        });
    }
    if opts.base_n < 16 {
        return Err(Error::InvalidParameter {
            name: "base_n",
            reason: format!("levels must start at N >= 16, got {}", opts.base_n),
        });
    }
    check_grid(opts.base_n)?;
    check_positive("t_end", opts.t_end)?;
    (0..opts.levels)
        .map(|lv| poiseuille_level(opts, lv))
        .collect()
}
