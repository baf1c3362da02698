//! Error types shared by all toolkit modules.

use thiserror::Error;

/// Errors produced by the core numerical routines.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Direction indices must be coprime and not both zero.
    #[error("invalid rational direction (n={n}, m={m}): {reason}")]
    InvalidDirection { n: i64, m: i64, reason: String },

    /// A region with no grid measure cannot be observed.
    #[error("region has empty interior at grid resolution {m}")]
    EmptyRegion { m: usize },

    /// Quadrature grids must resolve the band limit (M >= 4N).
    #[error("grid size {m} too coarse for band limit {n} (need M >= 4N)")]
    GridTooCoarse { m: usize, n: usize },

    /// Potentials must be real-valued (conjugate-symmetric coefficients).
    #[error("potential is not real: coefficient ({k},{l}) deviates from conjugate symmetry by {deviation:e}")]
    NonRealPotential { k: i64, l: i64, deviation: f64 },

    /// Dense truncations beyond the memory budget are rejected.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// Resolvent solves require the spectral parameter to stay off the spectrum.
    #[error("spectral parameter {mu} within gap tolerance of eigenvalue {lambda}")]
    NearResonance { mu: f64, lambda: f64 },

    /// The observability Gramian is numerically singular on the active subspace.
    #[error("ill-posed control problem (condition estimate {condition:e}): {message}")]
    IllPosedControl { condition: f64, message: String },

    /// No candidate convention reproduces the conjugation identity.
    #[error("normal-form inconsistency: {0}")]
    NormalFormInconsistency(String),

    /// Dense linear-algebra backend failure.
    #[error("linear algebra error: {0}")]
    LinAlg(#[from] ndarray_linalg::error::LinalgError),

    /// Catch-all for parameter validation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, CoreError>;
