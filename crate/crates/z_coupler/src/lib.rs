//! Bijection `ι_n` from `𝒢_n = F_{κ^n}` onto `[0, |𝒢_n| - 1]`, built by interlacing
//! the base-`κ` digits of the cursor with numberings of the lamps read block by
//! block around it, plus the distance, enumeration and integrability audits.

use thiserror::Error;

pub mod blocks;
pub mod encoder;
pub mod sums;
pub mod sweep;

pub use blocks::{block_intervals, carry_position, BlockDecomposition};
pub use encoder::{DenseElement, ZEncoder};
pub use sums::{
    compose_integrability, cursor_majorant_rows, gap_sum_rows, majorant_report, Composition,
    Integrand, MajorantReport, SumRow,
};
pub use sweep::{
    carry_histogram, exhaustive_sweep, sampled_sweep, CarryBucket, GapStats, SweepReport,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ZError {
    #[error("element outside the Følner set: {0}")]
    Domain(String),
    #[error("cursor {t} is not interior to [1, {last}]")]
    Interior { t: u64, last: u64 },
    #[error("cursor {t} has every digit equal to kappa - 1")]
    Saturated { t: u64 },
    #[error("{size} elements exceed the budget of {budget}")]
    Budget { size: String, budget: u128 },
    #[error("descriptor error: {0}")]
    Descriptor(String),
    #[error(transparent)]
    Delta(#[from] delta_core::DeltaError),
    #[error(transparent)]
    Radix(#[from] mixed_radix::MixedRadixError),
}

pub type Result<T> = std::result::Result<T, ZError>;
