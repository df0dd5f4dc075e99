//! Diagonal products: canonical elements `(t, f_0, (f'_m)_m)`, the group law,
//! generator actions, range, and word-metric bounds with a BFS oracle.

use thiserror::Error;

pub mod element;
pub mod metric;
pub mod params;
pub mod window;

pub use element::{
    apply_generator, evaluate_word, from_text, full_value, generators, inverse, multiply,
    range_interval, to_text, DeltaElement, Generator,
};
pub use metric::{
    distance_upper, essential_contribution, lamplighter_length, level_mode_bound, tour_length,
    word_length_upper, DistanceMode,
};
pub use params::{DeltaParams, Level};
pub use window::{word_length_exact, WindowSpace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeltaError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("level index at {n} needs offsets beyond the materialized horizon {horizon}")]
    BeyondHorizon { n: u64, horizon: u64 },
    #[error("distance mode precondition failed: {0}")]
    Mode(String),
    #[error("window: {0}")]
    Window(String),
    #[error("cannot parse element {0:?}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, DeltaError>;
