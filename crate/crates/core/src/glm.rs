//! ℓ1-penalized generalized linear models on coordinate-truncated designs, and
//! the plain Lasso baseline.
//!
//! Both estimators minimize
//! `−(1/N)Σ yᵢ⟨xᵢ, θ⟩ + (1/N)Σ g(⟨xᵢ, θ⟩) + λ‖θ‖₁`
//! by proximal gradient descent with a backtracking line search. With the
//! linear link this is `(1/2N)‖Xθ − y‖² + λ‖θ‖₁` up to a constant, i.e. the
//! Lasso with its penalty rescaled by `2N`.

use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{invalid, Error, Result};
use crate::report::{EstimateReport, ReportFlags};
use crate::rng::EXP_CLAMP;
use crate::truncation::{clip, soft_threshold};

/// Cumulant function `g` of a canonical GLM.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkFunction {
    /// `g(z) = z²/2`
    Linear,
    /// `g(z) = log(1 + eᶻ)`
    Logistic,
    /// `g(z) = eᶻ`
    Poisson,
}

impl LinkFunction {
    pub fn value(self, z: f64) -> f64 {
        self.value_flagged(z).0
    }

    /// `g(z)` and whether the exponent had to be clamped.
    pub fn value_flagged(self, z: f64) -> (f64, bool) {
        match self {
            LinkFunction::Linear => (0.5 * z * z, false),
            LinkFunction::Logistic => (softplus(z), false),
            LinkFunction::Poisson => clamped_exp(z),
        }
    }

    pub fn derivative(self, z: f64) -> f64 {
        match self {
            LinkFunction::Linear => z,
            LinkFunction::Logistic => sigmoid(z),
            LinkFunction::Poisson => clamped_exp(z).0,
        }
    }

    pub fn second_derivative(self, z: f64) -> f64 {
        match self {
            LinkFunction::Linear => 1.0,
            LinkFunction::Logistic => {
                let p = sigmoid(z);
                p * (1.0 - p)
            }
            LinkFunction::Poisson => clamped_exp(z).0,
        }
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn clamped_exp(z: f64) -> (f64, bool) {
    let c = z.clamp(-EXP_CLAMP, EXP_CLAMP);
    (c.exp(), c != z)
}

/// Line-search parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Backtracking {
    /// First trial step; `None` starts from `N / (‖X‖_F²·sup g″)`.
    pub initial_step: Option<f64>,
    pub shrink: f64,
    pub sufficient_decrease: f64,
    /// Factor applied to the accepted step before the next iteration.
    pub growth: f64,
}

impl Default for Backtracking {
    fn default() -> Self {
        Self {
            initial_step: None,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            growth: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlmConfig {
    pub lambda: f64,
    pub max_iter: usize,
    /// Relative first-order optimality tolerance.
    pub tol: f64,
    pub backtracking: Backtracking,
    /// Nesterov extrapolation with function-value restarts.
    pub accelerate: bool,
}

impl GlmConfig {
    pub fn new(lambda: f64) -> Result<Self> {
        let cfg = Self {
            lambda,
            max_iter: 5000,
            tol: 1e-8,
            backtracking: Backtracking::default(),
            accelerate: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(invalid("lambda", format!("must be >= 0, got {}", self.lambda)));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("tol", "must be > 0"));
        }
        let b = &self.backtracking;
        if !(b.shrink > 0.0 && b.shrink < 1.0) {
            return Err(invalid("shrink", "must lie in (0, 1)"));
        }
        if !(b.growth >= 1.0) {
            return Err(invalid("growth", "must be >= 1"));
        }
        Ok(())
    }
}

/// Coordinate truncation level `τ = (N / log(e·d))^{1/4}`.
pub fn design_truncation_level(n: usize, d: usize) -> f64 {
    (n as f64 / (1.0 + (d as f64).ln())).powf(0.25)
}

/// `x̃ᵢⱼ = sign(xᵢⱼ)·min(|xᵢⱼ|, τ)` with `τ` from [`design_truncation_level`].
pub fn truncate_design(x: ArrayView2<f64>) -> Array2<f64> {
    let (n, d) = x.dim();
    if n == 0 || d == 0 {
        return x.to_owned();
    }
    let tau = design_truncation_level(n, d);
    x.mapv(|v| clip(v, tau))
}

/// Objective value split into its smooth part and penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub smooth: f64,
    pub penalty: f64,
    pub exp_clamped: bool,
}

impl Objective {
    pub fn total(&self) -> f64 {
        self.smooth + self.penalty
    }
}

fn check_shapes(x: ArrayView2<f64>, y: ArrayView1<f64>, theta_len: usize) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::Shape(format!(
            "design has {} rows, response has {}",
            x.nrows(),
            y.len()
        )));
    }
    if x.ncols() != theta_len {
        return Err(Error::Shape(format!(
            "design has {} columns, parameter has {theta_len}",
            x.ncols()
        )));
    }
    Ok(())
}

fn smooth_from_predictor(z: &Array1<f64>, y: ArrayView1<f64>, link: LinkFunction) -> (f64, bool) {
    let mut acc = 0.0;
    let mut clamped = false;
    for (&zi, &yi) in z.iter().zip(y.iter()) {
        let (g, c) = link.value_flagged(zi);
        clamped |= c;
        acc += g - yi * zi;
    }
    (acc / z.len() as f64, clamped)
}

/// `f(z + dz) − f(z)` for the smooth part, from the increment itself so that
/// small steps are not lost to cancellation.
fn smooth_change(z: &Array1<f64>, dz: &Array1<f64>, y: ArrayView1<f64>, link: LinkFunction) -> f64 {
    let mut acc = 0.0;
    for ((&zi, &di), &yi) in z.iter().zip(dz.iter()).zip(y.iter()) {
        let dg = match link {
            LinkFunction::Linear => di * (zi + 0.5 * di),
            LinkFunction::Logistic if di < EXP_CLAMP => (sigmoid(zi) * di.exp_m1()).ln_1p(),
            LinkFunction::Poisson if zi.abs() <= EXP_CLAMP && (zi + di).abs() <= EXP_CLAMP => {
                zi.exp() * di.exp_m1()
            }
            _ => link.value(zi + di) - link.value(zi),
        };
        acc += dg - yi * di;
    }
    acc / z.len() as f64
}

fn l1(v: ArrayView1<f64>) -> f64 {
    v.iter().map(|a| a.abs()).sum()
}

/// Evaluates `−(1/N)Σ yᵢ⟨xᵢ,θ⟩ + (1/N)Σ g(⟨xᵢ,θ⟩) + λ‖θ‖₁`.
pub fn glm_objective(
    theta: ArrayView1<f64>,
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    link: LinkFunction,
    lambda: f64,
) -> Result<Objective> {
    check_shapes(x, y, theta.len())?;
    if x.nrows() == 0 {
        return Err(Error::EmptyInput("no samples".into()));
    }
    let z = x.dot(&theta);
    let (smooth, exp_clamped) = smooth_from_predictor(&z, y, link);
    Ok(Objective {
        smooth,
        penalty: lambda * l1(theta),
        exp_clamped,
    })
}

fn gradient(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    z: &Array1<f64>,
    link: LinkFunction,
) -> Array1<f64> {
    let resid: Array1<f64> = z
        .iter()
        .zip(y.iter())
        .map(|(&zi, &yi)| link.derivative(zi) - yi)
        .collect();
    x.t().dot(&resid) / z.len() as f64
}

/// Largest violation of the ℓ1 subgradient condition, and `‖∇‖∞`.
fn optimality_gap(theta: &Array1<f64>, grad: &Array1<f64>, lambda: f64) -> (f64, f64) {
    let mut worst = 0.0f64;
    let mut gmax = 0.0f64;
    for (&t, &g) in theta.iter().zip(grad.iter()) {
        gmax = gmax.max(g.abs());
        let v = if t != 0.0 {
            (g + lambda * t.signum()).abs()
        } else {
            (g.abs() - lambda).max(0.0)
        };
        worst = worst.max(v);
    }
    (worst, gmax)
}

fn prox_step(base: &Array1<f64>, grad: &Array1<f64>, step: f64, lambda: f64) -> Array1<f64> {
    let t = step * lambda;
    base.iter()
        .zip(grad.iter())
        .map(|(&b, &g)| soft_threshold(b - step * g, t))
        .collect()
}

/// Proximal gradient solver for an ℓ1-penalized GLM on a fixed design.
///
/// Starts from `init` (zero when absent). Each accepted iterate satisfies the
/// sufficient-decrease test, so the objective trace is non-increasing.
pub fn solve_l1_glm(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    link: LinkFunction,
    cfg: &GlmConfig,
    init: Option<ArrayView1<f64>>,
) -> Result<EstimateReport> {
    cfg.validate()?;
    let start = Instant::now();
    let (n, d) = x.dim();
    check_shapes(x, y, d)?;
    if n == 0 {
        return Err(Error::EmptyInput("no samples".into()));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("design or response".into()));
    }
    let lambda = cfg.lambda;
    let bt = cfg.backtracking;

    let mut theta = match init {
        Some(v) if v.len() == d => v.to_owned(),
        Some(v) => {
            return Err(Error::Shape(format!(
                "initial point has length {}, expected {d}",
                v.len()
            )))
        }
        None => Array1::zeros(d),
    };
    let mut z = x.dot(&theta);
    let (smooth, mut clamped) = smooth_from_predictor(&z, y, link);
    let mut obj = smooth + lambda * l1(theta.view());
    let mut trace = vec![obj];

    let curvature = match link {
        LinkFunction::Linear | LinkFunction::Poisson => 1.0,
        LinkFunction::Logistic => 0.25,
    };
    let frob: f64 = x.iter().map(|v| v * v).sum();
    let mut step = bt
        .initial_step
        .unwrap_or_else(|| if frob > 0.0 { n as f64 / (frob * curvature) } else { 1.0 });

    // momentum state
    let mut prev_theta = theta.clone();
    let mut prev_z = z.clone();
    let mut t_prev = 1.0f64;

    let mut converged = false;
    let mut stalled = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        let grad = gradient(x, y, &z, link);
        let (gap, gmax) = optimality_gap(&theta, &grad, lambda);
        if gap <= cfg.tol * (1.0 + gmax) {
            converged = true;
            break;
        }
        iterations += 1;

        let t_cur = 0.5 * (1.0 + (1.0 + 4.0 * t_prev * t_prev).sqrt());
        let momentum = cfg.accelerate && t_prev > 1.0;
        let (base, base_z, base_grad) = if momentum {
            let w = (t_prev - 1.0) / t_cur;
            let base = &theta + &((&theta - &prev_theta) * w);
            let base_z = &z + &((&z - &prev_z) * w);
            let g = gradient(x, y, &base_z, link);
            (base, base_z, g)
        } else {
            (theta.clone(), z.clone(), grad)
        };
        let theta_l1 = l1(theta.view());
        // offset of the base point from the current iterate in predictor space
        let shift = momentum.then(|| &base_z - &z);

        let mut accepted = None;
        while step >= 1e-300 {
            let cand = prox_step(&base, &base_grad, step, lambda);
            let diff = &cand - &base;
            let dz = x.dot(&diff);
            let cand_l1 = l1(cand.view());
            let from_base = smooth_change(&base_z, &dz, y, link);
            let (ok, change) = match &shift {
                // quadratic upper bound on the smooth part at the base point
                Some(shift) => {
                    let ok = from_base <= base_grad.dot(&diff) + 0.5 / step * diff.dot(&diff);
                    let total = shift + &dz;
                    (ok, smooth_change(&z, &total, y, link) + lambda * (cand_l1 - theta_l1))
                }
                None => {
                    let change = from_base + lambda * (cand_l1 - theta_l1);
                    (change <= -bt.sufficient_decrease / step * diff.dot(&diff), change)
                }
            };
            if ok && change.is_finite() {
                accepted = Some((cand, change));
                break;
            }
            step *= bt.shrink;
        }
        let Some((cand, change)) = accepted else {
            stalled = true;
            break;
        };

        if cfg.accelerate && change > 0.0 {
            // restart from the current iterate without momentum
            t_prev = 1.0;
            prev_theta.assign(&theta);
            prev_z.assign(&z);
            trace.push(obj);
            continue;
        }
        let cand_z = x.dot(&cand);
        for &zi in cand_z.iter() {
            clamped |= link.value_flagged(zi).1;
        }
        t_prev = t_cur;
        prev_theta = std::mem::replace(&mut theta, cand);
        prev_z = std::mem::replace(&mut z, cand_z);
        obj += change;
        trace.push(obj);
        step *= bt.growth;
    }

    Ok(EstimateReport {
        estimate: theta,
        iterations,
        converged,
        objective_trace: trace,
        lepski_index: None,
        elapsed: start.elapsed(),
        flags: ReportFlags {
            exp_clamped: clamped,
            stalled,
            skipped_rows: 0,
        },
    })
}

/// Truncates the design coordinatewise, then solves the penalized GLM from `θ⁰ = 0`.
pub fn fit_truncated_glm(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    link: LinkFunction,
    cfg: &GlmConfig,
) -> Result<EstimateReport> {
    if x.nrows() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: x.nrows() });
    }
    let xt = truncate_design(x);
    solve_l1_glm(xt.view(), y, link, cfg, None)
}

/// Lasso on the raw design: `(1/2N)‖Xθ − y‖² + λ‖θ‖₁`.
pub fn fit_lasso_baseline(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    cfg: &GlmConfig,
) -> Result<EstimateReport> {
    if x.nrows() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: x.nrows() });
    }
    solve_l1_glm(x, y, LinkFunction::Linear, cfg, None)
}
