//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A value lies outside the mathematical domain of an operation
    /// (negative field modulus, zero profile where a ratio is required, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument violates a precondition that is checkable up front.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A non-finite value appeared during evaluation; `node` is the grid index.
    #[error("numeric error at node {node}: {what}")]
    Numeric { what: String, node: usize },

    /// An iterative solver ran out of iterations.
    #[error("solver failed: {what} (last residual {residual:.3e} after {iterations} iterations)")]
    Solver {
        what: String,
        residual: f64,
        iterations: usize,
    },

    /// No solution was detected (e.g. the shooting map has no sign change).
    #[error("no solution found: {0}")]
    NoSolution(String),

    /// A required hypothesis on the potential does not hold.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// Time step too large for the spatial grid.
    #[error("CFL violation: dt = {dt:.3e} exceeds 0.5*h = {limit:.3e}")]
    Cfl { dt: f64, limit: f64 },

    /// The field became non-finite during evolution.
    #[error("field blow-up detected at t = {time:.6}")]
    BlowUp { time: f64 },

    /// Filesystem / formatting trouble while writing results.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
