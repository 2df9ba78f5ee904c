//! Experiment runner for the constrained planners: configuration, seeded
//! sweeps over planning budgets, metric aggregation and file output.

pub mod config;
pub mod metrics;
pub mod output;
pub mod run;
pub mod visitation;

use std::path::Path;

use thiserror::Error;

pub use config::{EnvConfig, ExperimentConfig, FlatConfig, PlannerKind};
pub use metrics::{EpisodeResult, EpisodeStats, MetricsRow};
pub use output::{emit_plot_data, format_float, PLOT_COLUMNS};
pub use run::{compare_planners, load_critic, run_sweep, sweep_results, train_critic, train_critic_observed, ComparisonReport, SweepOutput};
pub use visitation::{state_visitation_map, VisitationMap};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Training(#[from] cmcts_core::cmcts::TrainLoopError),
}

impl HarnessError {
    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        Self::Io { path: path.display().to_string(), message: err.to_string() }
    }

    /// Process exit code: 2 for configuration problems, 3 when training found
    /// no safe critic, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Training(cmcts_core::cmcts::TrainLoopError::Unsafe { .. }) => 3,
            Self::Training(cmcts_core::cmcts::TrainLoopError::Config(_)) => 2,
            _ => 1,
        }
    }
}
