//! Run configurations, the staged pipeline, rate regression and report files
//! behind the `wk` binary.

pub mod config;
pub mod fit;
pub mod output;
pub mod pipeline;

use thiserror::Error;

pub use config::{DomainConfig, RunConfig, SolverConfig, SCHEMA};
pub use fit::{fit_rates, FitError, RateFit};
pub use output::{write_outputs, RATES_HEADER, SPECTRUM_HEADER};
pub use pipeline::{
    check, parse_stages, ratio_band, resolve_stages, run_pipeline, run_with_artifacts, Artifacts, QuasimodeEnergy,
    QuasimodeRow, RateRow, RatioRow, RunReport, SpectrumRow, Stage, StageFailure, Status, TopologySummary, Verdict,
    ALL_STAGES,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("output: {0}")]
    Output(String),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 4,
            PipelineError::Output(_) => 3,
        }
    }
}
