//! Batch front-end for the coupling experiments: configuration loading, named
//! tasks, independent oracles, report emission and the acceptance criteria.

use serde::Serialize;
use thiserror::Error;

pub mod config;
pub mod criteria;
pub mod oracle;
pub mod output;
pub mod report;
pub mod svg;
pub mod tasks;

pub use config::LabConfig;
pub use report::CouplingAudit;

/// Machine-readable record of a failed invariant, written as `failure.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub task: String,
    pub check: String,
    pub detail: String,
}

#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("budget refusal: {0}")]
    Budget(String),
    #[error("invariant failure in {}: {} ({})", .0.task, .0.check, .0.detail)]
    Invariant(Failure),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Invariant(_) | LabError::Io(_) => 1,
            LabError::Config(_) => 2,
            LabError::Budget(_) => 3,
        }
    }

    pub fn invariant(task: &str, check: &str, detail: impl Into<String>) -> Self {
        LabError::Invariant(Failure {
            task: task.into(),
            check: check.into(),
            detail: detail.into(),
        })
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

impl From<dd_coupler::DDError> for LabError {
    fn from(e: dd_coupler::DDError) -> Self {
        use dd_coupler::DDError as E;
        match e {
            E::Budget { .. } => LabError::Budget(e.to_string()),
            E::Folner(f) => f.into(),
            E::Z(z) => z.into(),
            E::Delta(d) => d.into(),
            E::Params(_) | E::Profile(_) => LabError::Config(e.to_string()),
            _ => LabError::invariant("ddcoupling", "construction", e.to_string()),
        }
    }
}

impl From<folner_atlas::FolnerError> for LabError {
    fn from(e: folner_atlas::FolnerError) -> Self {
        match e {
            folner_atlas::FolnerError::Budget { .. } => LabError::Budget(e.to_string()),
            folner_atlas::FolnerError::Delta(d) => d.into(),
            _ => LabError::Config(e.to_string()),
        }
    }
}

impl From<z_coupler::ZError> for LabError {
    fn from(e: z_coupler::ZError) -> Self {
        match e {
            z_coupler::ZError::Budget { .. } => LabError::Budget(e.to_string()),
            z_coupler::ZError::Delta(d) => d.into(),
            _ => LabError::invariant("zcoupling", "encoding", e.to_string()),
        }
    }
}

impl From<delta_core::DeltaError> for LabError {
    fn from(e: delta_core::DeltaError) -> Self {
        match e {
            delta_core::DeltaError::Window(_) | delta_core::DeltaError::BeyondHorizon { .. } => {
                LabError::Budget(e.to_string())
            }
            _ => LabError::Config(e.to_string()),
        }
    }
}

impl From<profile_forge::ProfileError> for LabError {
    fn from(e: profile_forge::ProfileError) -> Self {
        LabError::Config(e.to_string())
    }
}

/// Caps the global thread pool at `LAB_THREADS` when set.
pub fn init_threads() -> Result<Option<usize>> {
    let Ok(raw) = std::env::var("LAB_THREADS") else {
        return Ok(None);
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        LabError::Config(format!(
            "LAB_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    // A pool built earlier in the process keeps its size; that is not an error here.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(Some(n))
}
