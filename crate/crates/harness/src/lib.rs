//! Experiment driver: generates seeded problems, samples runs in raw and
//! sampling modes, applies every post-processor and tabulates =/</> counts.

pub mod bench;
pub mod config;
pub mod experiment;
pub mod report;

pub use bench::{bench, BenchReport};
pub use config::{ExperimentConfig, Method, Mode, Topology, OUT_DIR_ENV};
pub use experiment::{collect_records, generate_problems, run_experiment, sensitivity_report, ExperimentOutput, SensitivityReport};
pub use report::{build_report, ComparisonReport, ResultRecord};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] mqc_core::Error),

    #[error("config: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("malformed results: {0}")]
    Structure(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
