//! Experiment runner for the AAGS and UCT planners.
//!
//! A run expands a JSON config into cells `(alpha, start-goal pair, episode)`,
//! plays one seeded episode per cell, and writes `records.csv`,
//! `summary.json` and `metadata.json`.

pub mod config;
pub mod oracles;
pub mod records;
pub mod runner;
pub mod seeds;

use thiserror::Error;

pub use config::{AlgoConfig, EnvConfig, ExperimentConfig, PairSpec, RunConfig, SweepConfig};
pub use records::{read_records, summarize, write_records, EpisodeRecord, SummaryRow, CSV_HEADER};
pub use runner::{run_experiment, run_to_dir, ExecMode, Experiment, PairInfo};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Plan(#[from] aags_core::planner::PlanError),
    #[error(transparent)]
    Model(#[from] aags_core::amdp::ModelError),
    #[error("no records to summarize")]
    Empty,
}
