//! The leapfrog IB loop and blow-up classification.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use std::f64::consts::PI;

use crate::coupling::{LagrangianSheet, Stencil};
use crate::error::Result;
use crate::field::{Grid, Vec3, VectorField};
use crate::fluid::{advect, FluidState, StokesSolver};
use crate::forcing::{membrane_force, membrane_step, target_force_update, DeltaMode, ForcingKind};

use super::config::{Init, SimConfig};

/// Relative energy above which a run counts as blown up.
pub const BLOWUP_THRESHOLD: f64 = 1e3;

/// Slack allowed when comparing energy envelopes of the trailing window.
pub const ENVELOPE_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Stable,
    Unstable,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub step: usize,
    pub time: f64,
    pub relative_energy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunVerdict {
    pub status: RunStatus,
    pub final_relative_energy: f64,
    pub blowup_step: Option<usize>,
    pub steps_run: usize,
    pub trace: Vec<TracePoint>,
}

/// Gaussian velocity, projected and rescaled to per-component RMS `amplitude`.
pub fn gaussian_field(solver: &mut StokesSolver, amplitude: f64, seed: u64) -> Result<VectorField> {
    let grid = solver.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = VectorField::from_fn(grid, |_, _, _| {
        [
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
        ]
    });
    let mut u = solver.project(&raw)?;
    let rms = (u.sum_squares() / (3 * grid.len()) as f64).sqrt();
    if rms > 0.0 {
        u.scale(amplitude / rms);
    }
    Ok(u)
}

/// Boundary state carried between steps.
#[derive(Clone, Debug)]
enum Boundary {
    /// Forces at the previous half step; kernels stay at the targets.
    Target { forces: Vec<Vec3> },
    /// Positions at the previous half step.
    Membrane {
        positions: Vec<Vec3>,
        forces: Vec<Vec3>,
    },
}

/// A running simulation. Each [`Simulation::advance`] performs
/// interpolate, boundary update, spread and one Stokes solve.
#[derive(Clone, Debug)]
pub struct Simulation {
    cfg: SimConfig,
    solver: StokesSolver,
    state: FluidState,
    sheet: LagrangianSheet,
    fixed: Stencil,
    boundary: Boundary,
    body: Option<VectorField>,
}

impl Simulation {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = Grid::new(cfg.n, cfg.l)?;
        let mut solver = StokesSolver::new(grid, cfg.rho, cfg.mu)?;
        let sheet = LagrangianSheet::new(cfg.n, cfg.p, cfg.l, cfg.eps)?;
        let fixed = Stencil::at_targets(&sheet)?;
        let m = sheet.m();
        let u0 = match cfg.init {
            Init::Gaussian { amplitude, seed } => gaussian_field(&mut solver, amplitude, seed)?,
            Init::Zero | Init::MembranePerturbation { .. } => VectorField::zeros(grid),
            Init::Poiseuille => {
                let h = grid.h();
                let c = cfg.f0 / (2.0 * cfg.mu);
                VectorField::from_fn(grid, |_, _, j3| {
                    let z = j3 as f64 * h;
                    [c * z * (cfg.l - z), 0.0, 0.0]
                })
            }
        };
        let boundary = match cfg.forcing {
            ForcingKind::TargetPoint => {
                let f = if cfg.init == Init::Poiseuille {
                    // the wall balances the body force over one box height
                    [-cfg.f0 * cfg.l, 0.0, 0.0]
                } else {
                    [0.0; 3]
                };
                Boundary::Target {
                    forces: vec![f; sheet.len()],
                }
            }
            ForcingKind::Membrane => {
                let mut positions = sheet.x0.clone();
                if let Init::MembranePerturbation { amplitude } = cfg.init {
                    for (i, x) in positions.iter_mut().enumerate() {
                        let s1 = (i % m) as f64 / m as f64;
                        let s2 = (i / m) as f64 / m as f64;
                        x[2] += amplitude
                            * ((2.0 * PI * (3.0 * s1 + 4.0 * s2)).sin() + (2.0 * PI * s2).cos());
                    }
                }
                let forces = membrane_force(&positions, &sheet.x0, m, cfg.k, sheet.hb())?;
                Boundary::Membrane { positions, forces }
            }
        };
        let body = (cfg.f0 != 0.0).then(|| VectorField::constant(grid, [cfg.f0, 0.0, 0.0]));
        let state = solver.state(u0)?;
        Ok(Self {
            cfg: cfg.clone(),
            solver,
            state,
            sheet,
            fixed,
            boundary,
            body,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn fluid(&self) -> &FluidState {
        &self.state
    }

    pub fn sheet(&self) -> &LagrangianSheet {
        &self.sheet
    }

    /// Current marker positions: the rest lattice displaced by `-F/K` for
    /// target points, the carried positions for a membrane.
    pub fn positions(&self) -> Vec<Vec3> {
        match &self.boundary {
            Boundary::Target { forces } => {
                let k = self.cfg.k;
                self.sheet
                    .x0
                    .iter()
                    .zip(forces)
                    .map(|(x, f)| {
                        if k > 0.0 {
                            [x[0] - f[0] / k, x[1] - f[1] / k, x[2] - f[2] / k]
                        } else {
                            *x
                        }
                    })
                    .collect()
            }
            Boundary::Membrane { positions, .. } => positions.clone(),
        }
    }

    /// Boundary force densities at the latest half step.
    pub fn forces(&self) -> &[Vec3] {
        match &self.boundary {
            Boundary::Target { forces } => forces,
            Boundary::Membrane { forces, .. } => forces,
        }
    }

    pub fn advance(&mut self) -> Result<()> {
        let dt = self.cfg.dt;
        let hb = self.sheet.hb();
        let u = self.state.velocity();
        let mut f = match &mut self.boundary {
            Boundary::Target { forces } => {
                let uk = self.fixed.interpolate(u)?;
                *forces = target_force_update(forces, &uk, self.cfg.k, dt)?;
                self.fixed.spread(forces, hb)?
            }
            Boundary::Membrane { positions, forces } => {
                let moving = self.cfg.delta_mode == DeltaMode::Moving;
                let uk = if moving {
                    Stencil::at_positions(self.solver.grid(), positions).interpolate(u)?
                } else {
                    self.fixed.interpolate(u)?
                };
                *positions = membrane_step(positions, &uk, dt)?;
                *forces =
                    membrane_force(positions, &self.sheet.x0, self.sheet.m(), self.cfg.k, hb)?;
                if moving {
                    Stencil::at_positions(self.solver.grid(), positions).spread(forces, hb)?
                } else {
                    self.fixed.spread(forces, hb)?
                }
            }
        };
        if let Some(b) = &self.body {
            f.axpy(1.0, b)?;
        }
        if self.cfg.nonlinear {
            let a = advect(self.state.velocity());
            f.axpy(self.cfg.rho, &a)?;
        }
        self.solver.step(&mut self.state, Some(&f), dt)
    }
}

/// Classify a completed energy history `e[0..=steps]` normalized by `e_ref`.
fn classify(rel: &[f64]) -> RunStatus {
    let steps = rel.len() - 1;
    let last = rel[steps];
    let head = (steps / 10).max(1);
    let early_peak = rel[..=head].iter().cloned().fold(1.0_f64, f64::max);
    if last > early_peak * (1.0 + ENVELOPE_TOLERANCE) {
        return RunStatus::Indeterminate;
    }
    let tail = &rel[steps + 1 - (steps / 10).max(2)..];
    let half = tail.len() / 2;
    let first = tail[..half].iter().cloned().fold(0.0_f64, f64::max);
    let second = tail[half..].iter().cloned().fold(0.0_f64, f64::max);
    if second <= first * (1.0 + ENVELOPE_TOLERANCE) {
        RunStatus::Stable
    } else {
        RunStatus::Indeterminate
    }
}

/// Run `cfg.steps` steps and classify the energy history.
///
/// Energies are relative to the initial L² norm, or to the first nonzero
/// norm when the fluid starts at rest.
pub fn run(cfg: &SimConfig) -> Result<RunVerdict> {
    run_observed(cfg, |_| Ok(()))
}

/// [`run`], calling `observe` on the initial state and after every step.
pub fn run_observed(
    cfg: &SimConfig,
    mut observe: impl FnMut(&Simulation) -> Result<()>,
) -> Result<RunVerdict> {
    let mut sim = Simulation::new(cfg)?;
    observe(&sim)?;
    let mut e_ref = sim.fluid().energy();
    let mut rel = Vec::with_capacity(cfg.steps + 1);
    let mut trace = Vec::new();
    let mut push = |rel: &mut Vec<f64>, step: usize, time: f64, r: f64| {
        rel.push(r);
        if step.is_multiple_of(cfg.record_every) || step == cfg.steps {
            trace.push(TracePoint {
                step,
                time,
                relative_energy: r,
            });
        }
    };
    push(&mut rel, 0, 0.0, if e_ref > 0.0 { 1.0 } else { 0.0 });
    for step in 1..=cfg.steps {
        sim.advance()?;
        observe(&sim)?;
        let e = sim.fluid().energy();
        if e_ref == 0.0 && e > 0.0 {
            e_ref = e;
        }
        let r = if e_ref > 0.0 { e / e_ref } else { 0.0 };
        push(&mut rel, step, sim.fluid().t, r);
        if !r.is_finite() || r > BLOWUP_THRESHOLD {
            if trace.last().map(|t| t.step) != Some(step) {
                trace.push(TracePoint {
                    step,
                    time: sim.fluid().t,
                    relative_energy: r,
                });
            }
            return Ok(RunVerdict {
                status: RunStatus::Unstable,
                final_relative_energy: r,
                blowup_step: Some(step),
                steps_run: step,
                trace,
            });
        }
    }
    Ok(RunVerdict {
        status: classify(&rel),
        final_relative_energy: rel[cfg.steps],
        blowup_step: None,
        steps_run: cfg.steps,
        trace,
    })
}
