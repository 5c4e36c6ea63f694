//! Two-fold cross-validation used by the simulation studies.
//!
//! The sample is split into its first and second halves. Each candidate is fit
//! on one half at a time and scored by its error against the known truth; the
//! two scores are averaged, the best candidate is kept (first on ties) and
//! refit on the full sample.

use std::ops::Range;

use ndarray::{s, Array1, ArrayView1, ArrayView2};

use crate::error::Result;
use crate::glm::{solve_l1_glm, truncate_design, GlmConfig, LinkFunction};
use crate::single_index::{moment_vector, soft_threshold_solution, SingleIndexConfig};

/// Protocol description embedded in `summary.json`.
pub const CV_PROTOCOL: &str = "2-fold: rows split into first and second half; each candidate is fit \
on one half at a time and scored against the known truth with the scenario metric; mean of the two \
scores selects the candidate (first on ties), which is refit on all rows. Single-index grid: \
c in single_index.c_grid x lambda = 2*||b||_inf*r for r in single_index.lambda_ratios. \
l1 solvers: lambda = 2^e*sqrt(log(e*d)/N) for e in lambda_exponents, warm-started from the largest lambda.";

#[derive(Debug, Clone)]
pub struct CvChoice {
    pub estimate: Array1<f64>,
    pub lambda: f64,
    pub c: Option<f64>,
    pub score: f64,
    pub converged: bool,
}

fn halves(n: usize) -> [Range<usize>; 2] {
    let h = n / 2;
    [0..h, h..n]
}

fn argmin(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s < scores[best] {
            best = i;
        }
    }
    best
}

fn max_abs(v: ArrayView1<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, a| m.max(a.abs()))
}

/// Cross-validates `(c, λ)` for the soft-thresholded single-index estimator.
pub fn cv_single_index(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    kappa: f64,
    c_grid: &[f64],
    ratios: &[f64],
    score: impl Fn(ArrayView1<f64>) -> Result<f64>,
) -> Result<CvChoice> {
    let mut scores = vec![0.0; c_grid.len() * ratios.len()];
    for fold in halves(x.nrows()) {
        let xf = x.slice(s![fold.clone(), ..]);
        let yf = y.slice(s![fold]);
        for (ci, &c) in c_grid.iter().enumerate() {
            let cfg = SingleIndexConfig::new(kappa, c, 0.0)?;
            let b = moment_vector(xf, yf, &cfg)?.b;
            let bmax = max_abs(b.view());
            for (ri, &r) in ratios.iter().enumerate() {
                let theta = soft_threshold_solution(b.view(), 2.0 * bmax * r);
                scores[ci * ratios.len() + ri] += 0.5 * score(theta.view())?;
            }
        }
    }
    let best = argmin(&scores);
    let c = c_grid[best / ratios.len()];
    let r = ratios[best % ratios.len()];
    let cfg = SingleIndexConfig::new(kappa, c, 0.0)?;
    let b = moment_vector(x, y, &cfg)?.b;
    let lambda = 2.0 * max_abs(b.view()) * r;
    Ok(CvChoice {
        estimate: soft_threshold_solution(b.view(), lambda),
        lambda,
        c: Some(c),
        score: scores[best],
        converged: true,
    })
}

/// `√(log(e·d)/N)`, the base penalty scale.
pub fn penalty_scale(n: usize, d: usize) -> f64 {
    ((1.0 + (d as f64).ln()) / n as f64).sqrt()
}

/// Path of fits over decreasing `λ`, each warm-started from the previous one.
fn l1_path(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    link: LinkFunction,
    base: &GlmConfig,
    lambdas: &[f64],
) -> Result<Vec<(Array1<f64>, bool)>> {
    let mut out = Vec::with_capacity(lambdas.len());
    let mut warm: Option<Array1<f64>> = None;
    for &lambda in lambdas {
        let cfg = GlmConfig { lambda, ..*base };
        let rep = solve_l1_glm(x, y, link, &cfg, warm.as_ref().map(|w| w.view()))?;
        warm = Some(rep.estimate.clone());
        out.push((rep.estimate, rep.converged));
    }
    Ok(out)
}

/// Cross-validates `λ` for an ℓ1-penalized GLM. With `truncate`, each design
/// (fold or full) is coordinate-truncated at its own sample size first.
pub fn cv_l1_glm(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    link: LinkFunction,
    truncate: bool,
    exponents: &[i32],
    base: &GlmConfig,
    score: impl Fn(ArrayView1<f64>) -> Result<f64>,
) -> Result<CvChoice> {
    let d = x.ncols();
    // largest λ first for warm starts
    let mut order: Vec<i32> = exponents.to_vec();
    order.sort_unstable_by(|a, b| b.cmp(a));
    order.dedup();
    let lambdas_for = |n: usize| -> Vec<f64> {
        let scale = penalty_scale(n, d);
        order.iter().map(|&e| 2f64.powi(e) * scale).collect()
    };

    let mut scores = vec![0.0; order.len()];
    for fold in halves(x.nrows()) {
        let xf = x.slice(s![fold.clone(), ..]);
        let yf = y.slice(s![fold]);
        let design = if truncate { truncate_design(xf) } else { xf.to_owned() };
        let path = l1_path(design.view(), yf, link, base, &lambdas_for(xf.nrows()))?;
        for (i, (theta, _)) in path.iter().enumerate() {
            scores[i] += 0.5 * score(theta.view())?;
        }
    }
    let best = argmin(&scores);
    let lambdas = lambdas_for(x.nrows());
    let design = if truncate { truncate_design(x) } else { x.to_owned() };
    let mut path = l1_path(design.view(), y, link, base, &lambdas[..=best])?;
    let (estimate, converged) = path.pop().expect("path has at least one point");
    Ok(CvChoice {
        estimate,
        lambda: lambdas[best],
        c: None,
        score: scores[best],
        converged,
    })
}
