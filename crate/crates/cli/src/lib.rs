//! Benchmark harness for the `hifie` factorizations: configuration,
//! experiment runner and CSV/JSON reports.

pub mod config;
pub mod report;
pub mod run;

pub use config::{CustomConfig, Example, ExperimentConfig, Format, Oracle, Side};
pub use report::{emit_report, write_report};
pub use run::{peak_memory_bytes, run_experiment, ReportRow};

/// Default output directory when `out` is not given.
pub const OUT_DIR_ENV: &str = "HIFIE_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Module {
        context: String,
        #[source]
        source: hifie::Error,
    },

    #[error("refusing to write an empty report")]
    EmptyReport,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
