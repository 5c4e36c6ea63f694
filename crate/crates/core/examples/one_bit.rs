//! One-bit compressed sensing with a heavy-tailed elliptical design: the
//! truncated single-index estimator against the Lasso, both with
//! cross-validated tuning.

use heavytail::bench::{cv_l1_glm, cv_single_index, SingleIndexSettings, SolverSettings};
use heavytail::glm::{GlmConfig, LinkFunction};
use heavytail::rng::{
    generate_responses, sample_elliptical, sparse_truth, EllipticalSpec, Model, ModelSpec, RadialLaw, RngHandle,
};
use heavytail::single_index::{estimate_unconstrained, moment_vector, relative_error, SingleIndexConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (d, n, s, q) = (512, 128, 5, 2.1);
    let mut rng = RngHandle::new(20240611);
    let truth = sparse_truth(&mut rng, d, s)?;
    let model = ModelSpec::new(truth.clone(), Model::OneBitSign { noise: None })?;
    let design = EllipticalSpec::new(d, RadialLaw::SymmetrizedPareto { q })?;
    let x = sample_elliptical(&mut rng, &design, n);
    let y = generate_responses(&mut rng, x.view(), &model)?;

    // penalty path at a fixed truncation scale; λ = 2‖b‖∞·r keeps the largest coordinates
    let base = SingleIndexConfig::new(0.04, 1.0 / 256.0, 0.0)?;
    let b = moment_vector(x.view(), y.view(), &base)?.b;
    let top = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for r in [0.9, 0.7, 0.5, 0.3] {
        let cfg = SingleIndexConfig { lambda: 2.0 * top * r, ..base.clone() };
        let est = estimate_unconstrained(x.view(), y.view(), &cfg)?;
        let support = est.iter().filter(|v| **v != 0.0).count();
        println!(
            "c=1/256, r={r}: relative error {:.4}, {support} nonzeros",
            relative_error(est.view(), truth.view())?.value
        );
    }

    let score = |t: ndarray::ArrayView1<f64>| relative_error(t, truth.view()).map(|e| e.value);
    let si = SingleIndexSettings::default();
    let robust = cv_single_index(x.view(), y.view(), si.kappa, &si.c_grid, &si.lambda_ratios, score)?;
    let solver = SolverSettings::default();
    let mut glm = GlmConfig::new(0.0)?;
    glm.max_iter = solver.max_iter;
    glm.tol = solver.tol;
    let lasso = cv_l1_glm(x.view(), y.view(), LinkFunction::Linear, false, &solver.lambda_exponents, &glm, score)?;
    println!(
        "cross-validated robust: error {:.4} (c={:?}, λ={:.4})",
        score(robust.estimate.view())?,
        robust.c,
        robust.lambda
    );
    println!("cross-validated lasso:  error {:.4} (λ={:.4})", score(lasso.estimate.view())?, lasso.lambda);
    Ok(())
}
