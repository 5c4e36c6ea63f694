//! Single-index recovery under elliptical designs.
//!
//! Each sample is rewritten as `q·Ũ = y·x` with `Ũ = √d·x/‖x‖` on the sphere of
//! radius `√d` and `q = ‖x‖·y/√d`. The scalar `q` is truncated at
//! `τ = c·N^{1/(2(1+κ))}` and the estimator minimizes
//! `‖θ‖² − 2⟨b, θ⟩` (plus `λ‖θ‖₁` or over an ℓ1 ball) with
//! `b = (1/N)Σ q̃ᵢŨᵢ`. Both problems have closed-form solutions.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{invalid, Error, Result};
use crate::symmat::{invsqrt_psd, SymmetricMatrix};
use crate::truncation::{clip, soft_threshold};

#[derive(Debug, Clone, PartialEq)]
pub struct SingleIndexConfig {
    /// Moment exponent `κ ∈ (0, 1)`.
    pub kappa: f64,
    /// Truncation scale `c > 0`.
    pub trunc_scale: f64,
    pub lambda: f64,
    /// Design covariance for the non-isotropic estimator.
    pub sigma: Option<SymmetricMatrix>,
    /// Radius of the ℓ1 ball for the constrained estimator.
    pub constraint_radius: Option<f64>,
}

impl SingleIndexConfig {
    pub fn new(kappa: f64, trunc_scale: f64, lambda: f64) -> Result<Self> {
        let cfg = Self {
            kappa,
            trunc_scale,
            lambda,
            sigma: None,
            constraint_radius: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(invalid("kappa", format!("must lie in (0, 1), got {}", self.kappa)));
        }
        if !(self.trunc_scale > 0.0) || !self.trunc_scale.is_finite() {
            return Err(invalid("trunc_scale", format!("must be > 0, got {}", self.trunc_scale)));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(invalid("lambda", format!("must be >= 0, got {}", self.lambda)));
        }
        if let Some(r) = self.constraint_radius {
            if !(r > 0.0) {
                return Err(invalid("constraint_radius", format!("must be > 0, got {r}")));
            }
        }
        Ok(())
    }

    /// `τ = c·N^{1/(2(1+κ))}`.
    pub fn truncation_level(&self, n: usize) -> f64 {
        self.trunc_scale * (n as f64).powf(1.0 / (2.0 * (1.0 + self.kappa)))
    }
}

/// One sample after the `(q, Ũ)` change of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedSample {
    pub u_tilde: Array1<f64>,
    pub q: f64,
    pub q_tilde: f64,
}

/// `Ũ = √d·x/‖x‖`, `q = ‖x‖·y/√d`, `q̃ = sign(q)·min(|q|, τ)`.
pub fn transform(x: ArrayView1<f64>, y: f64, tau: f64) -> Result<TransformedSample> {
    let d = x.len();
    let mu = x.dot(&x).sqrt();
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::DegenerateSample(format!("design row has norm {mu}")));
    }
    let root_d = (d as f64).sqrt();
    let q = mu * y / root_d;
    Ok(TransformedSample {
        u_tilde: x.mapv(|v| v * (root_d / mu)),
        q,
        q_tilde: clip(q, tau),
    })
}

/// The truncated moment vector `b = (1/N)Σ q̃ᵢŨᵢ`.
#[derive(Debug, Clone)]
pub struct MomentVector {
    pub b: Array1<f64>,
    pub tau: f64,
    /// Rows with `x = 0`, excluded from both `N` and the sum.
    pub skipped_rows: usize,
}

/// Computes `b` with `τ` taken from the config at the number of usable rows.
pub fn moment_vector(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    cfg: &SingleIndexConfig,
) -> Result<MomentVector> {
    cfg.validate()?;
    if x.nrows() != y.len() {
        return Err(Error::Shape(format!(
            "design has {} rows, response has {}",
            x.nrows(),
            y.len()
        )));
    }
    let d = x.ncols();
    let root_d = (d as f64).sqrt();
    let norms: Vec<f64> = x.rows().into_iter().map(|r| r.dot(&r).sqrt()).collect();
    let used = norms.iter().filter(|&&m| m > 0.0).count();
    let skipped_rows = x.nrows() - used;
    if used == 0 {
        return Err(Error::EmptyInput("no usable design rows".into()));
    }
    let tau = cfg.truncation_level(used);
    // q̃·Ũ = clip(‖x‖y/√d, τ)·(√d/‖x‖)·x
    let mut b = Array1::zeros(d);
    for ((row, &yi), &mu) in x.rows().into_iter().zip(y.iter()).zip(&norms) {
        if mu > 0.0 {
            let q_tilde = clip(mu * yi / root_d, tau);
            b.scaled_add(q_tilde * root_d / mu, &row);
        }
    }
    b /= used as f64;
    Ok(MomentVector { b, tau, skipped_rows })
}

/// Coordinatewise soft-thresholding of `b` at `λ/2`: the minimizer of
/// `‖θ‖² − 2⟨b, θ⟩ + λ‖θ‖₁`.
pub fn soft_threshold_solution(b: ArrayView1<f64>, lambda: f64) -> Array1<f64> {
    b.mapv(|v| soft_threshold(v, 0.5 * lambda))
}

/// Penalized estimator in the isotropic case.
pub fn estimate_unconstrained(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    cfg: &SingleIndexConfig,
) -> Result<Array1<f64>> {
    let m = moment_vector(x, y, cfg)?;
    Ok(soft_threshold_solution(m.b.view(), cfg.lambda))
}

/// Euclidean projection onto `{θ : ‖θ‖₁ ≤ R}` by the sorted-threshold rule.
pub fn project_l1_ball(v: ArrayView1<f64>, radius: f64) -> Result<Array1<f64>> {
    if !(radius > 0.0) {
        return Err(invalid("radius", format!("must be > 0, got {radius}")));
    }
    let norm1: f64 = v.iter().map(|a| a.abs()).sum();
    if norm1 <= radius {
        return Ok(v.to_owned());
    }
    let mut mags: Vec<f64> = v.iter().map(|a| a.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut shift = 0.0;
    for (i, &m) in mags.iter().enumerate() {
        cumsum += m;
        let t = (cumsum - radius) / (i + 1) as f64;
        if m > t {
            shift = t;
        } else {
            break;
        }
    }
    Ok(v.mapv(|a| soft_threshold(a, shift)))
}

/// Minimizes `‖θ‖² − 2⟨b, θ⟩` over the ℓ1 ball of radius `R`, i.e. projects `b`.
pub fn estimate_constrained(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    cfg: &SingleIndexConfig,
) -> Result<Array1<f64>> {
    let radius = cfg
        .constraint_radius
        .ok_or_else(|| invalid("constraint_radius", "constrained estimator needs a radius"))?;
    let m = moment_vector(x, y, cfg)?;
    project_l1_ball(m.b.view(), radius)
}

/// Non-isotropic estimator: whiten rows by `Σ^{-1/2}`, solve the isotropic
/// problem for `θ̃` (penalized, or constrained when a radius is set) and map
/// back with `θ̂ = Σ^{-1/2}θ̃`.
pub fn estimate_nonisotropic(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    cfg: &SingleIndexConfig,
) -> Result<Array1<f64>> {
    let sigma = cfg
        .sigma
        .as_ref()
        .ok_or_else(|| invalid("sigma", "non-isotropic estimator needs a covariance"))?;
    if sigma.dim() != x.ncols() {
        return Err(Error::Shape(format!(
            "covariance is {0}x{0}, design has {1} columns",
            sigma.dim(),
            x.ncols()
        )));
    }
    let w = invsqrt_psd(sigma)?;
    let whitened: Array2<f64> = x.dot(w.as_array());
    let inner = SingleIndexConfig {
        sigma: None,
        ..cfg.clone()
    };
    let theta_tilde = if inner.constraint_radius.is_some() {
        estimate_constrained(whitened.view(), y, &inner)?
    } else {
        estimate_unconstrained(whitened.view(), y, &inner)?
    };
    Ok(w.as_array().dot(&theta_tilde))
}

/// Relative error between unit-normalized estimate and truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeError {
    pub value: f64,
    /// The estimate was zero; `value` is the sentinel 2.
    pub zero_estimate: bool,
}

/// `‖θ̂/‖θ̂‖ − θ*/‖θ*‖‖₂`, or 2 with `zero_estimate` set when `θ̂ = 0`.
pub fn relative_error(theta_hat: ArrayView1<f64>, theta_star: ArrayView1<f64>) -> Result<RelativeError> {
    if theta_hat.len() != theta_star.len() {
        return Err(Error::Shape("estimate and truth lengths differ".into()));
    }
    let ns = theta_star.dot(&theta_star).sqrt();
    if !(ns > 0.0) {
        return Err(Error::InvalidTruth);
    }
    let nh = theta_hat.dot(&theta_hat).sqrt();
    if !(nh > 0.0) {
        return Ok(RelativeError {
            value: 2.0,
            zero_estimate: true,
        });
    }
    let value = theta_hat
        .iter()
        .zip(theta_star.iter())
        .map(|(h, s)| (h / nh - s / ns).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(RelativeError {
        value,
        zero_estimate: false,
    })
}

/// Per-row transforms for inspection; degenerate rows are skipped.
pub fn transform_rows(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    tau: f64,
) -> (Vec<TransformedSample>, usize) {
    let mut out = Vec::with_capacity(x.nrows());
    let mut skipped = 0;
    for (row, &yi) in x.axis_iter(Axis(0)).zip(y.iter()) {
        match transform(row, yi, tau) {
            Ok(t) => out.push(t),
            Err(_) => skipped += 1,
        }
    }
    (out, skipped)
}
