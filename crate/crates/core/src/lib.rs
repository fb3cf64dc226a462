//! Numerical laboratory for the immersed boundary method on a periodic cube.
//!
//! The crate couples a spectral time-dependent Stokes solver with a planar
//! sheet of Lagrangian markers through the standard 4-point IB kernel, and
//! provides both the Fourier-analytic prediction of the leapfrog scheme's
//! critical timestep and the machinery to measure it empirically.
//!
//! Module map:
//!
//! * [`kernel`]: the 4-point delta function, its Fourier coefficients and transform.
//! * [`spectral`]: DFTs on the fluid and boundary grids, operator symbols, projection.
//! * [`fluid`]: trapezoidal-viscosity Stokes stepping with spectral projection.
//! * [`coupling`]: force spreading and velocity interpolation.
//! * [`forcing`]: target-point and elastic-membrane force laws.
//! * [`stability`]: lattice sums, stability surfaces and critical timesteps.
//! * [`harness`]: simulation driver, bisection search, Poiseuille and membrane experiments.

#![allow(clippy::needless_range_loop)]

pub mod coupling;
pub mod error;
pub mod field;
pub mod fluid;
pub mod forcing;
pub mod harness;
pub mod kernel;
pub mod spectral;
pub mod stability;

pub use coupling::{LagrangianSheet, Stencil};
pub use error::{Error, Result};
pub use field::{Grid, Vec3, VectorField};
pub use fluid::{FluidState, StokesSolver};
pub use forcing::{DeltaMode, ForcingKind, ForcingModel};
pub use harness::{
    find_critical_dt, run, BisectOptions, CriticalDt, Init, RunStatus, RunVerdict, SimConfig,
};
pub use kernel::{phi, phi_coeff, phi_hat, KernelTable};
pub use stability::{Mode, StabilityReport};
