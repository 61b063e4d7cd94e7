//! Time evolution of the scaled system: exact linear flow, the
//! integrating-factor Runge–Kutta integrator for the nonlinear system, the
//! Duhamel check and the escape experiment.

mod escape;
mod integrator;
mod linear;
mod nonlinear;
mod state;

pub use escape::{
    escape_experiment, escape_setup, first_crossing, log_slope, predicted_escape_time, EscapeConfig, EscapeResult,
};
pub use integrator::{
    duhamel_order, evolve_nonlinear, series_csv, step_limit, DuhamelRow, DuhamelSeries, DuhamelTracker, Integrator,
    RunOptions, Sample, Trajectory, SERIES_HEADER,
};
pub use linear::{evolve_linear, evolve_linear_spectral, LinearPropagator};
pub use nonlinear::{nonlinear_rhs, FullNonlinearity, Nonlinearity, ZeroNonlinearity, POSITIVITY_FLOOR};
pub use state::{SpectralState, State, COMPONENT_NAMES};
