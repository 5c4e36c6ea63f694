//! Seeded Monte-Carlo runner for the simulation studies.
//!
//! An [`ExperimentSpec`] (JSON) names a scenario and its parameters. Trials run
//! on a worker pool; trial `t` draws from the stream seeded with `seed ⊕ t`, so
//! outputs do not depend on the thread count or on scheduling.

mod cv;
mod output;
mod runner;
mod spec;

use std::path::PathBuf;

pub use cv::{cv_l1_glm, cv_single_index, penalty_scale, CvChoice, CV_PROTOCOL};
pub use output::{
    median, read_records_csv, summarize, write_outputs, EstimatorSummary, Histogram, Summary,
    HISTOGRAM_BINS, HISTOGRAM_RANGE,
};
pub use runner::{gaussian_matrix_sigma, run_experiment, ExperimentOutcome, TrialRecord};
pub use spec::{
    CovarianceSettings, ExperimentSpec, FieldIssue, GlmSettings, Scenario, SingleIndexSettings,
    SolverSettings, ValidationError,
};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Validation(#[from] ValidationError),

    #[error("estimator failed: {0}")]
    Estimator(#[from] crate::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("cannot build worker pool: {0}")]
    ThreadPool(String),
}
