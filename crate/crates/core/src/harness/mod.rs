//! Experiment drivers: the full leapfrog loop, stability classification,
//! bisection for the empirical critical step, and the channel-flow and
//! membrane studies.

pub mod bisect;
pub mod config;
pub mod membrane;
pub mod poiseuille;
pub mod sim;

pub use bisect::{classify_with_escalation, find_critical_dt, BisectOptions, CriticalDt};
pub use config::{Init, SimConfig};
pub use membrane::{elastic_energy, membrane_demo, MembraneSnapshot, MembraneTrajectory};
pub use poiseuille::{poiseuille_experiment, poiseuille_level, PoiseuilleOptions, PoiseuilleRow};
pub use sim::{gaussian_field, run, run_observed, RunStatus, RunVerdict, Simulation, TracePoint};
