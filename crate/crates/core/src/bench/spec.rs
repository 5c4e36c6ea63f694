use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Simulation scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Sign measurements of a sparse vector under a heavy-tailed elliptical
    /// design; truncated single-index estimator against the Lasso.
    OneBitComparison,
    /// Lepski covariance error of Gaussian data across sample sizes.
    CovarianceScaling,
    /// Sparse linear recovery with a heavy-tailed coordinate design.
    GlmRecovery,
    /// Spectral soft-thresholding of the Lepski estimate for a low-rank truth.
    LowRankCovariance,
}

impl Scenario {
    pub fn default_samples(self) -> Vec<usize> {
        match self {
            Scenario::OneBitComparison => vec![128],
            Scenario::CovarianceScaling => vec![500, 2000, 8000],
            Scenario::GlmRecovery => vec![200, 400, 800],
            Scenario::LowRankCovariance => vec![8000],
        }
    }

    /// What the `rel_error` column holds for this scenario.
    pub fn metric(self) -> &'static str {
        match self {
            Scenario::OneBitComparison => "relative error of unit-normalized estimate",
            Scenario::CovarianceScaling => "operator-norm error",
            Scenario::GlmRecovery => "relative l2 error ||theta_hat - theta*|| / ||theta*||",
            Scenario::LowRankCovariance => {
                "Frobenius error (lepski, lowrank) and projector distance (pca)"
            }
        }
    }
}

/// Truncated single-index estimator settings for the 1-bit scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SingleIndexSettings {
    pub kappa: f64,
    pub c_grid: Vec<f64>,
    /// `λ = 2‖b‖∞·r` for each ratio `r`.
    pub lambda_ratios: Vec<f64>,
}

impl Default for SingleIndexSettings {
    fn default() -> Self {
        // 8-point log grid from 0.95 down to 0.01
        let lambda_ratios = (0..8)
            .map(|i| 0.95 * (0.01f64 / 0.95).powf(i as f64 / 7.0))
            .collect();
        Self {
            kappa: 0.04,
            // 2^-10 .. 2^2; the small end matters when the radial law is mostly
            // concentrated far below its unit standard deviation
            c_grid: vec![
                1.0 / 1024.0,
                1.0 / 256.0,
                1.0 / 64.0,
                1.0 / 16.0,
                0.25,
                0.5,
                1.0,
                2.0,
                4.0,
            ],
            lambda_ratios,
        }
    }
}

/// Proximal-gradient settings shared by the Lasso and truncated GLM arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    /// `λ = 2^e·√(log(e·d)/N)` for each exponent `e`.
    pub lambda_exponents: Vec<i32>,
    pub max_iter: usize,
    pub tol: f64,
    pub accelerate: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            lambda_exponents: (-6..=2).collect(),
            max_iter: 1000,
            tol: 1e-6,
            accelerate: true,
        }
    }
}

/// Data model for the GLM recovery scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GlmSettings {
    /// Exponent of the i.i.d. symmetrized Pareto design coordinates.
    pub design_q: f64,
    pub noise_scale: f64,
    pub noise_q: f64,
    /// Also fit the Lasso on the raw design.
    pub compare_lasso: bool,
    pub solver: SolverSettings,
}

impl Default for GlmSettings {
    fn default() -> Self {
        Self {
            design_q: 16.0,
            noise_scale: 0.5,
            noise_q: 6.0,
            compare_lasso: false,
            solver: SolverSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CovarianceSettings {
    pub beta: f64,
    /// Lepski bracket as multiples of the true `σ₀`.
    pub bracket: [f64; 2],
    /// `τ = tau_factor·σ₀·√(β/N)` for the low-rank scenario.
    pub tau_factor: f64,
    /// Nonzero eigenvalues of the low-rank truth; `rank` entries, defaults to ones.
    pub spectrum: Vec<f64>,
}

impl Default for CovarianceSettings {
    fn default() -> Self {
        Self {
            beta: 2.0,
            bracket: [0.1, 10.0],
            tau_factor: 36.0,
            spectrum: Vec::new(),
        }
    }
}

fn default_sparsity() -> usize {
    5
}
fn default_rank() -> usize {
    2
}
fn default_q() -> f64 {
    2.1
}
fn default_snr() -> f64 {
    10.0
}

/// Declarative description of one simulation study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub dim: usize,
    /// Sample sizes; empty means the scenario default.
    #[serde(default)]
    pub samples: Vec<usize>,
    #[serde(default = "default_sparsity")]
    pub sparsity: usize,
    #[serde(default = "default_rank")]
    pub rank: usize,
    /// Exponent of the symmetrized Pareto radial law and noise.
    #[serde(default = "default_q")]
    pub pareto_q: f64,
    /// Add symmetrized Pareto noise at `snr_db` to the 1-bit measurements.
    #[serde(default)]
    pub noisy: bool,
    #[serde(default = "default_snr")]
    pub snr_db: f64,
    pub trials: usize,
    pub seed: u64,
    /// Fill the `ms` column with wall time. Off keeps outputs byte-reproducible.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub single_index: SingleIndexSettings,
    #[serde(default)]
    pub lasso: SolverSettings,
    #[serde(default)]
    pub glm: GlmSettings,
    #[serde(default)]
    pub covariance: CovarianceSettings,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    /// Defaults of the reference 1-bit study: `d = 512`, `N = 128`, `s = 5`, `q = 2.1`, 200 runs.
    pub fn one_bit(noisy: bool, seed: u64) -> Self {
        Self {
            scenario: Scenario::OneBitComparison,
            dim: 512,
            samples: vec![128],
            sparsity: 5,
            rank: default_rank(),
            pareto_q: 2.1,
            noisy,
            snr_db: 10.0,
            trials: 200,
            seed,
            record_timing: false,
            single_index: SingleIndexSettings::default(),
            lasso: SolverSettings::default(),
            glm: GlmSettings::default(),
            covariance: CovarianceSettings::default(),
            output: None,
        }
    }

    /// Copy with scenario defaults filled in.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        if out.samples.is_empty() {
            out.samples = out.scenario.default_samples();
        }
        if out.scenario == Scenario::LowRankCovariance && out.covariance.spectrum.is_empty() {
            out.covariance.spectrum = vec![1.0; out.rank];
        }
        out
    }

    /// Checks every field and reports all offending ones.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let spec = self.resolved();
        let mut issues = Vec::new();
        let mut bad = |field: &str, message: String| {
            issues.push(FieldIssue {
                field: field.to_string(),
                message,
            })
        };
        if spec.trials == 0 {
            bad("trials", "must be >= 1".into());
        }
        if spec.dim == 0 {
            bad("dim", "must be >= 1".into());
        }
        let min_n = match spec.scenario {
            Scenario::OneBitComparison | Scenario::GlmRecovery => 4,
            Scenario::CovarianceScaling | Scenario::LowRankCovariance => {
                2 * ((3.5 * spec.covariance.beta).floor().max(0.0) as usize + 1)
            }
        };
        if let Some(&n) = spec.samples.iter().find(|&&n| n < min_n) {
            bad("samples", format!("sample size {n} below minimum {min_n}"));
        }
        match spec.scenario {
            Scenario::OneBitComparison | Scenario::GlmRecovery => {
                if spec.sparsity == 0 || spec.sparsity > spec.dim {
                    bad("sparsity", format!("must be in 1..=dim, got {}", spec.sparsity));
                }
            }
            Scenario::LowRankCovariance => {
                if spec.rank == 0 || spec.rank > spec.dim {
                    bad("rank", format!("must be in 1..=dim, got {}", spec.rank));
                }
                if spec.covariance.spectrum.len() != spec.rank {
                    bad(
                        "covariance.spectrum",
                        format!("needs {} entries, got {}", spec.rank, spec.covariance.spectrum.len()),
                    );
                }
                if spec.covariance.spectrum.iter().any(|v| !(*v > 0.0)) {
                    bad("covariance.spectrum", "entries must be > 0".into());
                }
                if !(spec.covariance.tau_factor >= 0.0) {
                    bad("covariance.tau_factor", "must be >= 0".into());
                }
            }
            Scenario::CovarianceScaling => {}
        }
        if !(spec.pareto_q > 2.0) {
            bad("pareto_q", format!("must be > 2, got {}", spec.pareto_q));
        }
        if !spec.snr_db.is_finite() {
            bad("snr_db", "must be finite".into());
        }
        let si = &spec.single_index;
        if !(si.kappa > 0.0 && si.kappa < 1.0) {
            bad("single_index.kappa", format!("must lie in (0, 1), got {}", si.kappa));
        }
        if si.c_grid.is_empty() || si.c_grid.iter().any(|c| !(*c > 0.0)) {
            bad("single_index.c_grid", "must be non-empty with positive entries".into());
        }
        if si.lambda_ratios.is_empty() || si.lambda_ratios.iter().any(|r| !(*r >= 0.0)) {
            bad("single_index.lambda_ratios", "must be non-empty with nonnegative entries".into());
        }
        for (name, s) in [("lasso", &spec.lasso), ("glm.solver", &spec.glm.solver)] {
            if s.lambda_exponents.is_empty() {
                bad(&format!("{name}.lambda_exponents"), "must be non-empty".into());
            }
            if s.max_iter == 0 {
                bad(&format!("{name}.max_iter"), "must be >= 1".into());
            }
            if !(s.tol > 0.0) {
                bad(&format!("{name}.tol"), "must be > 0".into());
            }
        }
        if !(spec.glm.design_q > 2.0) {
            bad("glm.design_q", "must be > 2".into());
        }
        if !(spec.glm.noise_q > 2.0) {
            bad("glm.noise_q", "must be > 2".into());
        }
        if !(spec.glm.noise_scale >= 0.0) {
            bad("glm.noise_scale", "must be >= 0".into());
        }
        let cov = &spec.covariance;
        if !(cov.beta > 1.0) {
            bad("covariance.beta", format!("must be > 1, got {}", cov.beta));
        }
        if !(cov.bracket[0] > 0.0 && cov.bracket[0] <= cov.bracket[1]) {
            bad("covariance.bracket", "must satisfy 0 < low <= high".into());
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ValidationError { issues })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldIssue {
    pub field: String,
    pub message: String,
}

/// All problems found in a spec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    pub issues: Vec<FieldIssue>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid experiment spec:")?;
        for issue in &self.issues {
            write!(f, "\n  {}: {}", issue.field, issue.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationError {}
