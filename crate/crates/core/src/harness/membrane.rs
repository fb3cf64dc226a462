//! Relaxation of a perturbed elastic membrane.

use crate::error::{Error, Result};
use crate::field::Vec3;
use crate::forcing::ForcingKind;

use super::config::SimConfig;
use super::sim::Simulation;

#[derive(Clone, Debug, PartialEq)]
pub struct MembraneSnapshot {
    pub step: usize,
    pub time: f64,
    pub positions: Vec<Vec3>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MembraneTrajectory {
    pub times: Vec<f64>,
    /// Fluid L² norm at every step.
    pub fluid_energy: Vec<f64>,
    /// Kinetic plus elastic energy at every step.
    pub total_energy: Vec<f64>,
    /// `max_k |X3 - X0_3|` at every step.
    pub max_height: Vec<f64>,
    pub snapshots: Vec<MembraneSnapshot>,
}

/// `(K/2) Σ |forward differences of the displacement|^2`; the `h_B^2` of
/// the area element cancels the one in the difference quotient.
pub fn elastic_energy(positions: &[Vec3], rest: &[Vec3], m: usize, k: f64) -> f64 {
    let d = |i: usize, a: usize| positions[i][a] - rest[i][a];
    let mut total = 0.0;
    for k2 in 0..m {
        for k1 in 0..m {
            let i = k1 + m * k2;
            let r = (k1 + 1) % m + m * k2;
            let u = k1 + m * ((k2 + 1) % m);
            for a in 0..3 {
                total += (d(r, a) - d(i, a)).powi(2) + (d(u, a) - d(i, a)).powi(2);
            }
        }
    }
    0.5 * k * total
}

/// Run a membrane configuration, keeping a snapshot every `snapshot_every`
/// steps (0 keeps none besides the initial state).
pub fn membrane_demo(cfg: &SimConfig, snapshot_every: usize) -> Result<MembraneTrajectory> {
    if cfg.forcing != ForcingKind::Membrane {
        return Err(Error::InvalidParameter {
            name: "forcing",
            reason: "membrane demo needs forcing = membrane".into(),
        });
    }
    let mut sim = Simulation::new(cfg)?;
    let m = sim.sheet().m();
    let h3 = sim.fluid().grid().h().powi(3);
    let mut out = MembraneTrajectory {
        times: Vec::with_capacity(cfg.steps + 1),
        fluid_energy: Vec::with_capacity(cfg.steps + 1),
        total_energy: Vec::with_capacity(cfg.steps + 1),
        max_height: Vec::with_capacity(cfg.steps + 1),
        snapshots: Vec::new(),
    };
    let record = |sim: &Simulation, out: &mut MembraneTrajectory| {
        let x = sim.positions();
        let rest = &sim.sheet().x0;
        let u = sim.fluid().velocity();
        let kinetic = 0.5 * cfg.rho * u.sum_squares() * h3;
        out.times.push(sim.fluid().t);
        out.fluid_energy.push(sim.fluid().energy());
        out.total_energy
            .push(kinetic + elastic_energy(&x, rest, m, cfg.k));
        out.max_height.push(
            x.iter()
                .zip(rest)
                .map(|(a, b)| (a[2] - b[2]).abs())
                .fold(0.0, f64::max),
        );
        let step = sim.fluid().step_index;
        if step == 0 || (snapshot_every > 0 && step.is_multiple_of(snapshot_every)) {
            out.snapshots.push(MembraneSnapshot {
                step,
                time: sim.fluid().t,
                positions: x,
            });
        }
    };
    record(&sim, &mut out);
    for _ in 0..cfg.steps {
        sim.advance()?;
        record(&sim, &mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Init;

    fn cfg(amplitude: f64, steps: usize) -> SimConfig {
        SimConfig {
            n: 8,
            p: 2,
            k: 100.0,
            mu: 0.05,
            dt: 1e-3,
            steps,
            forcing: ForcingKind::Membrane,
            delta_mode: crate::forcing::DeltaMode::Moving,
            init: Init::MembranePerturbation { amplitude },
            ..SimConfig::default()
        }
    }

    #[test]
    fn flat_membrane_is_stationary() {
        let t = membrane_demo(&cfg(0.0, 5), 1).unwrap();
        assert!(t.fluid_energy.iter().all(|&e| e == 0.0));
        assert!(t.max_height.iter().all(|&h| h == 0.0));
        assert_eq!(t.snapshots.len(), 6);
    }

    #[test]
    fn perturbation_starts_with_elastic_energy() {
        let t = membrane_demo(&cfg(0.01, 3), 0).unwrap();
        assert!(t.total_energy[0] > 0.0);
        assert_eq!(t.fluid_energy[0], 0.0);
        assert!(t.max_height[0] > 0.01);
        assert_eq!(t.snapshots.len(), 1);
    }

    #[test]
    fn rejects_target_forcing() {
        let c = SimConfig::default();
        assert!(membrane_demo(&c, 0).is_err());
    }

    #[test]
    fn elastic_energy_of_rigid_shift_is_zero() {
        let rest: Vec<Vec3> = (0..16)
            .map(|i| [(i % 4) as f64, (i / 4) as f64, 0.0])
            .collect();
        let shifted: Vec<Vec3> = rest
            .iter()
            .map(|x| [x[0] + 0.1, x[1], x[2] + 0.2])
            .collect();
        assert!(elastic_energy(&shifted, &rest, 4, 5.0).abs() < 1e-24);
    }
}
