//! Numerical laboratory for standing waves and solitons of the nonlinear
//! Klein-Gordon equation psi_tt - lap psi + W'(psi) = 0.
//!
//! The crate is organized around the two sides of the variational picture:
//!
//! * the profile side: scalar [`potential`]s with hypothesis checks, radial
//!   [`grid`] quadrature, the energy/charge [`functionals`], and the
//!   constrained [`groundstate`] solvers (sphere gradient flow and radial
//!   shooting, cross-validating each other);
//! * the field side: [`dynamics`] with a reversible leapfrog evolver,
//!   conserved quantities, Lorentz boosts, polar decomposition and the
//!   orbital distance; [`diagnostics`] assembles them into dispersion
//!   curves, convexity tests, charge thresholds and perturbation
//!   experiments.
//!
//! Frequencies follow the negative-charge convention (omega > 0); the
//! positive-charge mirror is a sign flip at the interface level.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod groundstate;
pub mod io;
pub mod potential;
pub mod report;

pub use error::{Error, Result};
pub use functionals::StandingWave;
pub use grid::{Profile, RadialGrid};
pub use potential::ScalarPotential;
