use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::cv::CV_PROTOCOL;
use super::runner::TrialRecord;
use super::spec::ExperimentSpec;
use super::BenchError;

pub const HISTOGRAM_BINS: usize = 32;
pub const HISTOGRAM_RANGE: (f64, f64) = (0.0, 2.0);

/// Equal-width bins over `[lo, hi]`; values above `hi` are counted in `overflow`
/// and not in any bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub overflow: u64,
}

impl Histogram {
    pub fn build(values: &[f64]) -> Self {
        let (lo, hi) = HISTOGRAM_RANGE;
        let width = (hi - lo) / HISTOGRAM_BINS as f64;
        let mut counts = vec![0u64; HISTOGRAM_BINS];
        let mut overflow = 0;
        for &v in values {
            if v > hi || v.is_nan() {
                overflow += 1;
            } else {
                let bin = (((v - lo) / width).floor().max(0.0) as usize).min(HISTOGRAM_BINS - 1);
                counts[bin] += 1;
            }
        }
        Self {
            lo,
            hi,
            edges: (0..=HISTOGRAM_BINS).map(|i| lo + width * i as f64).collect(),
            counts,
            overflow,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: String,
    pub count: usize,
    pub median: Option<f64>,
    pub mean: Option<f64>,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub metric: String,
    pub estimators: Vec<EstimatorSummary>,
    pub cv_protocol: String,
    pub spec: ExperimentSpec,
}

/// Median with the two middle values averaged for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Per-estimator statistics in order of first appearance.
pub fn summarize(spec: &ExperimentSpec, records: &[TrialRecord]) -> Summary {
    let mut names: Vec<&str> = Vec::new();
    for r in records {
        if !names.contains(&r.estimator.as_str()) {
            names.push(&r.estimator);
        }
    }
    let estimators = names
        .into_iter()
        .map(|name| {
            let values: Vec<f64> = records
                .iter()
                .filter(|r| r.estimator == name)
                .map(|r| r.rel_error)
                .collect();
            let mean = (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
            EstimatorSummary {
                estimator: name.to_string(),
                count: values.len(),
                median: median(&values),
                mean,
                histogram: Histogram::build(&values),
            }
        })
        .collect();
    let trials = records
        .iter()
        .map(|r| r.trial + 1)
        .max()
        .unwrap_or(0);
    Summary {
        trials,
        metric: spec.scenario.metric().to_string(),
        estimators,
        cv_protocol: CV_PROTOCOL.to_string(),
        spec: spec.resolved(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    trial: usize,
    estimator: String,
    rel_error: f64,
    lambda: Option<f64>,
    c: Option<f64>,
    seed: u64,
    ms: Option<f64>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `records.csv` and `summary.json` into `dir`, creating it if needed.
pub fn write_outputs(
    records: &[TrialRecord],
    summary: &Summary,
    dir: &Path,
) -> Result<(PathBuf, PathBuf), BenchError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv_path = dir.join("records.csv");
    let csv_err = |source| BenchError::Csv {
        path: csv_path.clone(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(&csv_path)
        .map_err(csv_err)?;
    w.write_record(["trial", "estimator", "rel_error", "lambda", "c", "seed", "ms"])
        .map_err(csv_err)?;
    for r in records {
        w.serialize(CsvRow {
            trial: r.trial,
            estimator: r.estimator.clone(),
            rel_error: r.rel_error,
            lambda: r.lambda,
            c: r.c,
            seed: r.seed,
            ms: r.ms,
        })
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err(&csv_path))?;

    let json_path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(summary).map_err(|source| BenchError::Json {
        path: json_path.clone(),
        source,
    })?;
    text.push('\n');
    fs::write(&json_path, text).map_err(io_err(&json_path))?;
    Ok((csv_path, json_path))
}

/// Reads `(estimator, rel_error)` pairs back from a `records.csv`.
pub fn read_records_csv(path: &Path) -> Result<Vec<(String, f64)>, BenchError> {
    let csv_err = |source| BenchError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize::<CsvRow>()
        .map(|row| row.map(|row| (row.estimator, row.rel_error)).map_err(csv_err))
        .collect()
}
