use std::time::Duration;

use ndarray::Array1;

/// Output of an iterative estimator.
#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub estimate: Array1<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value at the start, then advanced by the change of every
    /// accepted iteration.
    pub objective_trace: Vec<f64>,
    pub lepski_index: Option<usize>,
    pub elapsed: Duration,
    pub flags: ReportFlags,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReportFlags {
    /// An exponent was clamped to `[-30, 30]` while evaluating the link.
    pub exp_clamped: bool,
    /// The line search shrank the step to underflow without progress.
    pub stalled: bool,
    pub skipped_rows: usize,
}
