//! Injection `ι_n` of the Følner set `𝒢_n` of a source diagonal product into a
//! carved Følner set `ℋ_n` of a target diagonal product with the same `κ`.
//!
//! The cursor goes through `u(P, t)`, the lamps through a numbering `ϑ̃_n` of the
//! source, a spreading map `𝔰_n` and the inverse of a block numbering `ϑ_n` of
//! the target. Audits measure injectivity, density, distance shapes and the
//! integrability sums.

use thiserror::Error;

pub mod audit;
pub mod coupling;
pub mod cursor;
pub mod index;
pub mod numbering;
pub mod params;
pub mod spreading;

pub use audit::{
    distance_audit, integrability_sum, uniform_bound, AuditRow, DistanceAudit, IntegrabilitySum,
    SampleMode, UniformBound,
};
pub use coupling::{Carving, DDCoupling, DensityReport, InjectionReport, SourceDigits, Thresholds};
pub use cursor::CursorMap;
pub use index::{find_target_index, TargetIndex};
pub use numbering::{block_depth, ideal_blocks, target_blocks, TargetElement, TargetNumbering};
pub use params::{DDParams, Hypotheses, EPSILON_FLOOR};
pub use spreading::SpreadingMap;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DDError {
    #[error("invalid pair: {0}")]
    Params(String),
    #[error("target index search failed: {0}")]
    Search(String),
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("cursor {v} is not a value of u")]
    Cursor { v: u64 },
    #[error("{0} is not in the image of the spreading map")]
    Inverse(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("{size} elements exceed the budget of {budget}")]
    Budget { size: String, budget: u64 },
    #[error(transparent)]
    Z(#[from] z_coupler::ZError),
    #[error(transparent)]
    Folner(#[from] folner_atlas::FolnerError),
    #[error(transparent)]
    Delta(#[from] delta_core::DeltaError),
    #[error(transparent)]
    Profile(#[from] profile_forge::ProfileError),
}

pub type Result<T> = std::result::Result<T, DDError>;

pub(crate) fn ser_big<S: serde::Serializer>(
    x: &num_bigint::BigUint,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}
