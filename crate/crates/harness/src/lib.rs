//! Experiment harness for `edge3c`: a flat `key = value` scenario format,
//! sweeps over one parameter, and deterministic CSV output.

mod output;
mod run;
mod spec;

pub use output::{emit_csv, write_csv, COLUMNS};
pub use run::{row_seed, run, run_with, RunRecord};
pub use spec::{load_spec, parse_spec, resolve_seed, Evaluator, ExperimentSpec, PolicyKind, SweepAxis, Variant};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("line {line}: {key}: {msg}")]
    Parse { line: usize, key: String, msg: String },

    #[error("invalid experiment: {0}")]
    Validation(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Model(#[from] edge3c::Error),
}

impl HarnessError {
    /// Process exit code: 1 for bad input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Parse { .. } | HarnessError::Validation(_) => 1,
            _ => 2,
        }
    }
}
