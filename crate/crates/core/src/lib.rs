//! Numerical laboratory for the three-component farmer / converted-farmer /
//! hunter-gatherer reaction-diffusion system on the line.
//!
//! * [`model`]: parameters, steady states, kinetic ODE, Lyapunov functional
//! * [`solver`]: IMEX finite-difference integration on a truncated domain
//! * [`waves`]: traveling wave, heat-equation closed forms, Dirichlet eigenpair
//! * [`comparison`]: constructed super/sub-solutions and sampled sign certificates
//! * [`diagnostics`]: fronts, speeds, log delay, bump fit, final-zone verdicts
//! * [`io`]: CSV/JSON persistence of simulation records

pub mod comparison;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod model;
pub mod solver;
pub mod special;
pub mod stats;
pub mod waves;

pub use error::{Error, Result};
pub use model::{
    classify_regime, derived_constants, nondimensionalize, DerivedConstants, KineticParams,
    ModelParams, OriginalParams, RegimeLabel,
};
pub use solver::{FieldState, Grid1D, InitialSpec, SimulationRecord, SolverConfig};
