//! Sparse regression with a heavy-tailed design: truncated-design GLM against
//! the Lasso, and a Poisson fit.

use heavytail::glm::{fit_lasso_baseline, fit_truncated_glm, GlmConfig, LinkFunction};
use heavytail::rng::{
    generate_responses, sample_iid_matrix, sample_symmetrized_pareto, sparse_truth, IndexLink, Model, ModelSpec,
    ParetoNoise, RngHandle,
};
use ndarray::Array1;

fn rel(est: &Array1<f64>, truth: &Array1<f64>) -> f64 {
    let diff = est - truth;
    diff.dot(&diff).sqrt() / truth.dot(truth).sqrt()
}

fn main() -> heavytail::Result<()> {
    let (n, d, s) = (400, 200, 5);
    let mut rng = RngHandle::new(3);
    let truth = sparse_truth(&mut rng, d, s)?;
    let x = sample_iid_matrix(&mut rng, n, d, |r| sample_symmetrized_pareto(r, 2.5).expect("q > 2"));
    let noise = ParetoNoise { scale: 0.5, q: 3.0 };
    let model = ModelSpec::new(truth.clone(), Model::SingleIndex { link: IndexLink::Identity, noise: Some(noise) })?;
    let y = generate_responses(&mut rng, x.view(), &model)?;

    let lambda = 0.5 * ((1.0 + (d as f64).ln()) / n as f64).sqrt();
    let cfg = GlmConfig::new(lambda)?;
    let robust = fit_truncated_glm(x.view(), y.view(), LinkFunction::Linear, &cfg)?;
    let lasso = fit_lasso_baseline(x.view(), y.view(), &cfg)?;
    println!("λ = {lambda:.4}");
    println!(
        "truncated design: error {:.4}, {} iterations, converged {}",
        rel(&robust.estimate, &truth),
        robust.iterations,
        robust.converged
    );
    println!("lasso:            error {:.4}, {} iterations", rel(&lasso.estimate, &truth), lasso.iterations);

    let xs = sample_iid_matrix(&mut rng, n, 20, |r| 0.3 * r.standard_normal());
    let beta = sparse_truth(&mut rng, 20, 3)?;
    let counts = generate_responses(&mut rng, xs.view(), &ModelSpec::new(beta.clone(), Model::Poisson)?)?;
    let fit = fit_truncated_glm(xs.view(), counts.view(), LinkFunction::Poisson, &GlmConfig::new(0.01)?)?;
    let trace = &fit.objective_trace;
    println!(
        "poisson: error {:.4}, objective {:.4} -> {:.4}",
        rel(&fit.estimate, &beta),
        trace[0],
        trace[trace.len() - 1]
    );
    Ok(())
}
