//! Truncated covariance estimation, Lepski adaptation, spectral low-rank
//! thresholding and PCA projector diagnostics.

use ndarray::{s, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{invalid, Error, Result};
use crate::robust_mean::{median_of_means, MoMConfig};
use crate::symmat::{eigendecompose, operator_norm, spectral_soft_threshold, SymmetricMatrix};

/// Tuning for the covariance estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct CovConfig {
    pub beta: f64,
    /// Upper bound on the matrix standard deviation `σ₀`, when known.
    pub sigma: Option<f64>,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub mom: MoMConfig,
}

impl CovConfig {
    /// Lepski bracket `[sigma_min, sigma_max]` at confidence `beta`; the
    /// median-of-means step uses the same `beta`.
    pub fn with_bracket(beta: f64, sigma_min: f64, sigma_max: f64) -> Result<Self> {
        let cfg = Self {
            beta,
            sigma: None,
            sigma_min,
            sigma_max,
            mom: MoMConfig::new(beta)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Known `σ`; the bracket collapses to `[σ, σ]`.
    pub fn with_sigma(beta: f64, sigma: f64) -> Result<Self> {
        let mut cfg = Self::with_bracket(beta, sigma, sigma)?;
        cfg.sigma = Some(sigma);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 1.0) {
            return Err(invalid("beta", format!("must be > 1, got {}", self.beta)));
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0) {
                return Err(invalid("sigma", format!("must be > 0, got {s}")));
            }
        }
        if !(self.sigma_min > 0.0) || !(self.sigma_max > 0.0) || self.sigma_max < self.sigma_min {
            return Err(Error::InvalidBracket {
                sigma_min: self.sigma_min,
                sigma_max: self.sigma_max,
            });
        }
        Ok(())
    }

    /// `θ = (1/σ)·√(β/m)`.
    pub fn theta(&self, sigma: f64, m: usize) -> f64 {
        (self.beta / m as f64).sqrt() / sigma
    }
}

/// `Σ̂ = (1/(mθ)) Σᵢ ψ(θ ZᵢZᵢᵀ)` with `Zᵢ = Xᵢ − μ̂`, evaluated through the
/// rank-one identity `ψ(θ ZZᵀ) = ZZᵀ ψ(θ‖Z‖²)/‖Z‖²`.
pub fn truncated_covariance(
    x: ArrayView2<f64>,
    mu_hat: ArrayView1<f64>,
    theta: f64,
) -> Result<SymmetricMatrix> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(invalid("theta", format!("must be > 0, got {theta}")));
    }
    let (m, d) = x.dim();
    if mu_hat.len() != d {
        return Err(Error::Shape(format!(
            "mean has length {}, samples have {d} columns",
            mu_hat.len()
        )));
    }
    if m == 0 {
        return Err(Error::EmptyInput("no samples".into()));
    }
    let centered = &x - &mu_hat.insert_axis(Axis(0));
    let mut weighted = centered.clone();
    for mut row in weighted.axis_iter_mut(Axis(0)) {
        let t = theta * row.dot(&row);
        // ψ(t)/t, exactly 1 inside the identity region
        let w = if t <= 1.0 { 1.0 } else { 1.0 / t };
        row *= w;
    }
    let sum = centered.t().dot(&weighted);
    SymmetricMatrix::new(sum / m as f64)
}

/// Truncated covariance at a known `σ`, centred by median-of-means.
pub fn robust_covariance(x: ArrayView2<f64>, cfg: &CovConfig) -> Result<SymmetricMatrix> {
    cfg.validate()?;
    let sigma = cfg
        .sigma
        .ok_or_else(|| invalid("sigma", "robust_covariance needs a known sigma"))?;
    let mu = median_of_means(x, &cfg.mom)?;
    truncated_covariance(x, mu.view(), cfg.theta(sigma, x.nrows()))
}

/// One pairwise comparison made by Lepski's rule.
#[derive(Debug, Clone, PartialEq)]
pub struct LepskiTest {
    pub j: usize,
    pub k: usize,
    pub distance: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Record of a Lepski selection.
#[derive(Debug, Clone, PartialEq)]
pub struct LepskiTrace {
    /// Grid `σⱼ = σ_min·2ʲ` for `σ_min ≤ σⱼ < 2σ_max`.
    pub sigmas: Vec<f64>,
    pub tests: Vec<LepskiTest>,
    pub chosen: usize,
    /// Set when no index below the top of the grid passed its tests.
    pub fallback: bool,
}

impl LepskiTrace {
    pub fn chosen_sigma(&self) -> f64 {
        self.sigmas[self.chosen]
    }
}

/// The doubling grid `σ_min·2ʲ` covering `[σ_min, 2σ_max)`.
pub fn lepski_grid(sigma_min: f64, sigma_max: f64) -> Result<Vec<f64>> {
    if !(sigma_min > 0.0) || !(sigma_max >= sigma_min) || !sigma_max.is_finite() {
        return Err(Error::InvalidBracket { sigma_min, sigma_max });
    }
    let mut grid = Vec::new();
    let mut s = sigma_min;
    while s < 2.0 * sigma_max {
        grid.push(s);
        s *= 2.0;
    }
    Ok(grid)
}

/// Lepski-adaptive truncated covariance.
///
/// Picks the smallest grid index `j` such that for every larger `k`,
/// `‖Σ̂ₖ − Σ̂ⱼ‖ ≤ 6σₖ√(β/m)`. The mean estimate is computed once by
/// median-of-means and shared by every grid point.
pub fn lepski_covariance(
    x: ArrayView2<f64>,
    cfg: &CovConfig,
) -> Result<(SymmetricMatrix, LepskiTrace)> {
    cfg.validate()?;
    let sigmas = lepski_grid(cfg.sigma_min, cfg.sigma_max)?;
    let m = x.nrows();
    let mu = median_of_means(x, &cfg.mom)?;
    let estimates = sigmas
        .iter()
        .map(|&s| truncated_covariance(x, mu.view(), cfg.theta(s, m)))
        .collect::<Result<Vec<_>>>()?;

    let rate = (cfg.beta / m as f64).sqrt();
    let n = sigmas.len();
    let mut tests = Vec::with_capacity(n * (n - 1) / 2);
    let mut qualifies = vec![true; n];
    for j in 0..n {
        for k in (j + 1)..n {
            let distance = operator_norm(&estimates[k].sub(&estimates[j])?)?;
            let threshold = 6.0 * sigmas[k] * rate;
            let passed = distance <= threshold;
            qualifies[j] &= passed;
            tests.push(LepskiTest {
                j,
                k,
                distance,
                threshold,
                passed,
            });
        }
    }
    let chosen = qualifies.iter().position(|&q| q).unwrap_or(n - 1);
    let trace = LepskiTrace {
        sigmas,
        tests,
        chosen,
        fallback: n > 1 && chosen == n - 1,
    };
    let estimate = estimates.into_iter().nth(chosen).expect("chosen index in grid");
    Ok((estimate, trace))
}

/// Spectral soft-thresholding of the Lepski estimate at level `τ`.
pub fn lowrank_covariance(x: ArrayView2<f64>, cfg: &CovConfig, tau: f64) -> Result<SymmetricMatrix> {
    if !(tau >= 0.0) {
        return Err(invalid("tau", format!("must be >= 0, got {tau}")));
    }
    let (sigma, _) = lepski_covariance(x, cfg)?;
    spectral_soft_threshold(&sigma, tau)
}

/// `‖P̂ₖ − Pₖ‖` between the orthogonal projectors onto the top-`k` eigenspaces.
pub fn pca_projector_distance(
    sigma_hat: &SymmetricMatrix,
    sigma_true: &SymmetricMatrix,
    k: usize,
) -> Result<f64> {
    let d = sigma_true.dim();
    if sigma_hat.dim() != d {
        return Err(Error::Shape("covariance dimensions differ".into()));
    }
    if k == 0 || k > d {
        return Err(invalid("k", format!("must be in 1..={d}, got {k}")));
    }
    let truth = eigendecompose(sigma_true)?;
    if k < d {
        let gap = truth.values[k - 1] - truth.values[k];
        if gap <= 1e-12 {
            return Err(Error::DegenerateGap { k, gap });
        }
    }
    let est = eigendecompose(sigma_hat)?;
    let projector = |v: &Array2<f64>| {
        let top = v.slice(s![.., ..k]);
        top.dot(&top.t())
    };
    let diff = projector(&est.vectors) - projector(&truth.vectors);
    operator_norm(&SymmetricMatrix::new(diff)?)
}
