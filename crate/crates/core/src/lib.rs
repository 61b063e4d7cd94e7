//! Numerical laboratory for the Hadamard instability of a compressible
//! two-fluid model with increasing capillary pressure.
//!
//! The crate is organised bottom-up:
//!
//! * [`closure`] solves the pressure closure and derives the linearisation
//!   coefficients and the sharp growth rate.
//! * [`spectral`] analyses the 4×4 symbol of the compressible part at one
//!   radial frequency: characteristic quartic, eigenvalues, projectors,
//!   propagator and asymptotic expansions.
//! * [`fields`] approximates the whole space by a periodic box and provides
//!   transforms, Fourier multipliers, the Hodge split and Sobolev norms.
//! * [`modes`] builds the growing-mode initial data on a frequency shell.
//! * [`evolve`] advances states exactly (linear) or with an
//!   integrating-factor Runge–Kutta scheme (nonlinear) and runs the escape
//!   experiment.

// Guards like `!(x > 0.0)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closure;
pub mod error;
pub mod evolve;
pub mod fields;
pub mod fmt;
pub mod modes;
pub mod spectral;

pub use closure::{
    CapillaryLaw, Laws, LocalClosure, ModelCoefficients, PhaseLaw, Viscosities,
};
pub use error::{Error, Result};
pub use fields::{BoxGrid, ScalarField, VectorField};
