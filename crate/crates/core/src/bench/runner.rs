use std::time::Instant;

use ndarray::{s, Array1, Array2};
use rayon::prelude::*;

use super::cv::{cv_l1_glm, cv_single_index, CvChoice};
use super::output::{summarize, Summary};
use super::spec::{ExperimentSpec, Scenario};
use super::BenchError;
use crate::error::Result;
use crate::glm::{GlmConfig, LinkFunction};
use crate::rng::{
    generate_responses, sample_elliptical, sample_iid_matrix, sample_symmetrized_pareto,
    sparse_truth, EllipticalSpec, IndexLink, Model, ModelSpec, ParetoNoise, RadialLaw, RngHandle,
};
use crate::robust_cov::{lepski_covariance, pca_projector_distance, CovConfig};
use crate::single_index::relative_error;
use crate::symmat::{eigendecompose, frobenius_norm, operator_norm, spectral_soft_threshold, SymmetricMatrix};

/// One estimator's result in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub estimator: String,
    /// Scenario metric; see [`Scenario::metric`].
    pub rel_error: f64,
    pub lambda: Option<f64>,
    pub c: Option<f64>,
    pub seed: u64,
    /// Wall time of the trial, only when the spec asks for it.
    pub ms: Option<f64>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

/// `σ₀ = √‖tr(Σ)Σ + 2Σ²‖`, the matrix standard deviation `‖E‖Z‖²ZZᵀ‖^{1/2}` of `N(0, Σ)`.
pub fn gaussian_matrix_sigma(sigma: &SymmetricMatrix) -> Result<f64> {
    let tr = sigma.trace();
    let eig = eigendecompose(sigma)?;
    Ok(eig
        .values
        .iter()
        .map(|&l| tr * l + 2.0 * l * l)
        .fold(0.0f64, f64::max)
        .sqrt())
}

/// Shared per-experiment state.
struct Context {
    spec: ExperimentSpec,
    lowrank: Option<LowRankTruth>,
}

struct LowRankTruth {
    factor: Array2<f64>,
    sigma: SymmetricMatrix,
    sigma0: f64,
}

/// Runs every trial of `spec` on `threads` workers (all available when `None`).
pub fn run_experiment(
    spec: &ExperimentSpec,
    threads: Option<usize>,
) -> std::result::Result<ExperimentOutcome, BenchError> {
    spec.validate()?;
    let spec = spec.resolved();
    let lowrank = if spec.scenario == Scenario::LowRankCovariance {
        Some(lowrank_truth(&spec)?)
    } else {
        None
    };
    let ctx = Context { spec, lowrank };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| BenchError::ThreadPool(e.to_string()))?;
    let per_trial: Vec<Vec<TrialRecord>> = pool.install(|| {
        (0..ctx.spec.trials)
            .into_par_iter()
            .map(|t| run_trial(&ctx, t))
            .collect::<Result<Vec<_>>>()
    })?;
    let records: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();
    let summary = summarize(&ctx.spec, &records);
    Ok(ExperimentOutcome { records, summary })
}

fn run_trial(ctx: &Context, trial: usize) -> Result<Vec<TrialRecord>> {
    let start = Instant::now();
    let seed = ctx.spec.seed ^ trial as u64;
    let mut rng = RngHandle::new(seed);
    let mut results = match ctx.spec.scenario {
        Scenario::OneBitComparison => one_bit_trial(&ctx.spec, &mut rng)?,
        Scenario::CovarianceScaling => covariance_trial(&ctx.spec, &mut rng)?,
        Scenario::GlmRecovery => glm_trial(&ctx.spec, &mut rng)?,
        Scenario::LowRankCovariance => {
            lowrank_trial(&ctx.spec, ctx.lowrank.as_ref().expect("built for scenario"), &mut rng)?
        }
    };
    let ms = ctx
        .spec
        .record_timing
        .then(|| start.elapsed().as_secs_f64() * 1e3);
    for r in &mut results {
        r.trial = trial;
        r.seed = seed;
        r.ms = ms;
    }
    Ok(results)
}

fn record(estimator: impl Into<String>, value: f64, lambda: Option<f64>, c: Option<f64>) -> TrialRecord {
    TrialRecord {
        trial: 0,
        estimator: estimator.into(),
        rel_error: value,
        lambda,
        c,
        seed: 0,
        ms: None,
        flags: Vec::new(),
    }
}

fn from_choice(estimator: &str, value: f64, choice: &CvChoice) -> TrialRecord {
    let mut r = record(estimator, value, Some(choice.lambda), choice.c);
    if !choice.converged {
        r.flags.push("not_converged".into());
    }
    r
}

fn solver_config(s: &super::spec::SolverSettings) -> Result<GlmConfig> {
    let mut cfg = GlmConfig::new(0.0)?;
    cfg.max_iter = s.max_iter;
    cfg.tol = s.tol;
    cfg.accelerate = s.accelerate;
    Ok(cfg)
}

fn one_bit_trial(spec: &ExperimentSpec, rng: &mut RngHandle) -> Result<Vec<TrialRecord>> {
    let d = spec.dim;
    let n = spec.samples[0];
    let truth = sparse_truth(rng, d, spec.sparsity)?;
    let noise = spec
        .noisy
        .then(|| ParetoNoise::from_snr_db(spec.snr_db, spec.pareto_q));
    let model = ModelSpec::new(truth, Model::OneBitSign { noise })?;
    let design = EllipticalSpec::new(d, RadialLaw::SymmetrizedPareto { q: spec.pareto_q })?;
    let x = sample_elliptical(rng, &design, n);
    let y = generate_responses(rng, x.view(), &model)?;
    let theta_star = model.theta_star();
    let score = |t: ndarray::ArrayView1<f64>| Ok(relative_error(t, theta_star.view())?.value);

    let si = &spec.single_index;
    let robust = cv_single_index(x.view(), y.view(), si.kappa, &si.c_grid, &si.lambda_ratios, score)?;
    let lasso = cv_l1_glm(
        x.view(),
        y.view(),
        LinkFunction::Linear,
        false,
        &spec.lasso.lambda_exponents,
        &solver_config(&spec.lasso)?,
        score,
    )?;
    let mut out = Vec::with_capacity(2);
    for (name, choice) in [("robust", &robust), ("lasso", &lasso)] {
        let err = relative_error(choice.estimate.view(), theta_star.view())?;
        let mut r = from_choice(name, err.value, choice);
        if err.zero_estimate {
            r.flags.push("zero_estimate".into());
        }
        out.push(r);
    }
    Ok(out)
}

fn covariance_trial(spec: &ExperimentSpec, rng: &mut RngHandle) -> Result<Vec<TrialRecord>> {
    let d = spec.dim;
    let truth = SymmetricMatrix::identity(d);
    let sigma0 = gaussian_matrix_sigma(&truth)?;
    let cov = &spec.covariance;
    let cfg = CovConfig::with_bracket(cov.beta, cov.bracket[0] * sigma0, cov.bracket[1] * sigma0)?;
    let design = EllipticalSpec::new(d, RadialLaw::GaussianChi)?;
    let mut out = Vec::with_capacity(spec.samples.len());
    for &n in &spec.samples {
        let x = sample_elliptical(rng, &design, n);
        let (est, trace) = lepski_covariance(x.view(), &cfg)?;
        let err = operator_norm(&est.sub(&truth)?)?;
        let mut r = record(format!("lepski_n{n}"), err, None, None);
        if trace.fallback {
            r.flags.push("lepski_fallback".into());
        }
        out.push(r);
    }
    Ok(out)
}

fn glm_trial(spec: &ExperimentSpec, rng: &mut RngHandle) -> Result<Vec<TrialRecord>> {
    let d = spec.dim;
    let g = &spec.glm;
    let n_max = *spec.samples.iter().max().expect("validated non-empty");
    let truth = sparse_truth(rng, d, spec.sparsity)?;
    let noise = (g.noise_scale > 0.0).then_some(ParetoNoise {
        scale: g.noise_scale,
        q: g.noise_q,
    });
    let model = ModelSpec::new(
        truth,
        Model::SingleIndex {
            link: IndexLink::Identity,
            noise,
        },
    )?;
    let q = g.design_q;
    let x = sample_iid_matrix(rng, n_max, d, |r| {
        sample_symmetrized_pareto(r, q).expect("design_q validated > 2")
    });
    let y = generate_responses(rng, x.view(), &model)?;
    let theta_star = model.theta_star();
    let star_norm = theta_star.dot(theta_star).sqrt();
    let score = |t: ndarray::ArrayView1<f64>| {
        let diff = &t - theta_star;
        Ok(diff.dot(&diff).sqrt() / star_norm)
    };
    let cfg = solver_config(&g.solver)?;
    let mut out = Vec::new();
    for &n in &spec.samples {
        let xs = x.slice(s![..n, ..]);
        let ys = y.slice(s![..n]);
        let fit = cv_l1_glm(xs, ys, LinkFunction::Linear, true, &g.solver.lambda_exponents, &cfg, score)?;
        out.push(from_choice(&format!("glm_trunc_n{n}"), score(fit.estimate.view())?, &fit));
        if g.compare_lasso {
            let fit = cv_l1_glm(xs, ys, LinkFunction::Linear, false, &g.solver.lambda_exponents, &cfg, score)?;
            out.push(from_choice(&format!("lasso_n{n}"), score(fit.estimate.view())?, &fit));
        }
    }
    Ok(out)
}

fn lowrank_truth(spec: &ExperimentSpec) -> Result<LowRankTruth> {
    let d = spec.dim;
    let r = spec.rank;
    // orthonormal basis from the master seed, fixed across trials
    let mut rng = RngHandle::new(spec.seed);
    let mut basis = Array2::<f64>::zeros((d, r));
    for j in 0..r {
        let mut v: Array1<f64> = (0..d).map(|_| rng.standard_normal()).collect();
        for k in 0..j {
            let prev = basis.column(k).to_owned();
            let proj = v.dot(&prev);
            v.scaled_add(-proj, &prev);
        }
        let norm = v.dot(&v).sqrt();
        basis.column_mut(j).assign(&(v / norm));
    }
    let mut factor = basis;
    for (mut col, &l) in factor.columns_mut().into_iter().zip(&spec.covariance.spectrum) {
        col *= l.sqrt();
    }
    let sigma = SymmetricMatrix::new(factor.dot(&factor.t()))?;
    let sigma0 = gaussian_matrix_sigma(&sigma)?;
    Ok(LowRankTruth {
        factor,
        sigma,
        sigma0,
    })
}

fn lowrank_trial(
    spec: &ExperimentSpec,
    truth: &LowRankTruth,
    rng: &mut RngHandle,
) -> Result<Vec<TrialRecord>> {
    let cov = &spec.covariance;
    let cfg = CovConfig::with_bracket(
        cov.beta,
        cov.bracket[0] * truth.sigma0,
        cov.bracket[1] * truth.sigma0,
    )?;
    let design = EllipticalSpec::new(spec.rank, RadialLaw::GaussianChi)?.with_factor(truth.factor.clone())?;
    let mut out = Vec::new();
    for &n in &spec.samples {
        let x = sample_elliptical(rng, &design, n);
        let (lepski, trace) = lepski_covariance(x.view(), &cfg)?;
        let tau = cov.tau_factor * truth.sigma0 * (cov.beta / n as f64).sqrt();
        let lowrank = spectral_soft_threshold(&lepski, tau)?;
        let suffix = if spec.samples.len() > 1 { format!("_n{n}") } else { String::new() };
        let mut r = record(
            format!("lepski{suffix}"),
            frobenius_norm(&lepski.sub(&truth.sigma)?)?,
            None,
            None,
        );
        if trace.fallback {
            r.flags.push("lepski_fallback".into());
        }
        out.push(r);
        out.push(record(
            format!("lowrank{suffix}"),
            frobenius_norm(&lowrank.sub(&truth.sigma)?)?,
            Some(tau),
            None,
        ));
        if spec.rank < spec.dim {
            let dist = pca_projector_distance(&lowrank, &truth.sigma, spec.rank)?;
            out.push(record(format!("pca{suffix}"), dist, Some(tau), None));
        }
    }
    Ok(out)
}
