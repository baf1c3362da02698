//! Spectral toolkit for observability and exact control of Schrödinger
//! operators `-Δ + V` on rectangular 2-tori.

extern crate blas_src;

pub mod bump;
pub mod error;
pub mod field;
pub mod lattice;
pub mod operator;
pub mod quadrature;

pub use error::CoreError;
pub use field::{FieldProfile, FourierField, GridMask, Region};
pub use lattice::{make_direction, RationalDirection, TorusLattice, TwistConvention};
pub use operator::{EigenDecomposition, SchrodingerOperator, SpectralCutoff};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
