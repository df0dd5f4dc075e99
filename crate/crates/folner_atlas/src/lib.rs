//! Følner sets `F_{n,i,j}` of diagonal products: subset chains of the derived
//! groups, exact cardinalities, enumeration, boundaries, sofic defects and growth.

use thiserror::Error;

pub mod chain;
pub mod growth;
pub mod set;

pub use chain::SubsetChain;
pub use growth::{
    growth_bounds_report, growth_rows, iso_trend_slope, isoperimetric_estimate, GrowthReport,
    GrowthRow, IsoPoint,
};
pub use set::{BoundaryReport, FolnerAtlas, FolnerIndex, FolnerSet, DEFAULT_BUDGET};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FolnerError {
    #[error("invalid index: {0}")]
    Index(String),
    #[error("invalid chain: {0}")]
    Chain(String),
    #[error("set of size {cardinality} exceeds the enumeration budget {budget}")]
    Budget { cardinality: String, budget: u64 },
    #[error(transparent)]
    Delta(#[from] delta_core::DeltaError),
}

pub type Result<T> = std::result::Result<T, FolnerError>;
