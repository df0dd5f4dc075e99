//! Profiles `ρ`, the sequences `(k_m, l_m)` realizing `ρ ∘ log`, and the
//! piecewise-affine companions `f̄`, `ρ̄`, `ρ_bij` in exact rational arithmetic.

use thiserror::Error;

pub mod affine;
pub mod profile;
pub mod report;
pub mod sequences;

pub use affine::PiecewiseAffine;
pub use profile::ProfileSpec;
pub use report::{
    cursor_series, fit_exponent, hypothesis_report, lamp_series, ExponentFit, HypothesisReport,
    SeriesVerdict,
};
pub use sequences::{build_sequences, ln_big, Sequences};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProfileError {
    #[error("invalid profile: {0}")]
    Spec(String),
    #[error("profile is not in the admissible class: {0}")]
    NotInClass(String),
    #[error("argument outside the built sequences: {0}")]
    Beyond(String),
    #[error("sequence entry too large: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, ProfileError>;

/// Default corner width of `ρ_bij`.
pub fn default_delta() -> num_rational::BigRational {
    num_rational::BigRational::new(1.into(), 4.into())
}
