//! Experiment harness: scenario configuration, the replica runner, residual
//! statistics and file outputs.

mod config;
mod output;
mod run;
mod stats;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{load_config, load_config_with_base, parse_angle, OutputConfig, Preset, ScenarioConfig};
pub use output::{
    control_curves, emit_outputs, kicks_csv, load_summary, write_curves_csv, CurveRow, OutputPaths, SummaryFile,
    KICKS_CSV_HEADER,
};
pub use run::{run_scenario, ReplicaRun, ScenarioRun};
pub use stats::{
    residual_stats, step_recovery, ExclusionPolicy, ReplicaSummary, ResidualRow, ResidualSeries, RunSummary,
    StepRecovery,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Validation(#[source] crate::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Simulation(#[from] crate::Error),
}

impl HarnessError {
    /// Process exit code: 1 for configuration problems, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Parse { .. } | HarnessError::Validation(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}
