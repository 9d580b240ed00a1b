//! Orchestration, reporting and grid interchange for `blaschke-core`.

pub mod config;
pub mod grid;
pub mod report;
pub mod run;

pub use config::{Deriv, Outputs, RunConfig, Source};
pub use report::Report;
pub use run::{emit, run_check};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] blaschke_core::Error),
    #[error("run aborted: {failed} of {total} samples failed (first: {first})")]
    Aborted { failed: usize, total: usize, first: String },
    #[error("i/o: {0}")]
    Io(String),
}

impl RunError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Aborted { .. } => 3,
            _ => 4,
        }
    }
}
