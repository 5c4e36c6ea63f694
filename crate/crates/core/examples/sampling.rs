//! Draws heavy-tailed elliptical designs and compares their moments.
//!
//! Run with `cargo run --example sampling`.

use heavytail::rng::{
    generate_responses, pareto_variance, sample_elliptical, sample_pareto, sparse_truth, EllipticalSpec, Model,
    ModelSpec, ParetoNoise, RadialLaw, RngHandle,
};

fn main() -> heavytail::Result<()> {
    let mut rng = RngHandle::new(2024);

    let q = 3.0;
    let draws: Vec<f64> = (0..100_000).map(|_| sample_pareto(&mut rng, q)).collect::<Result<_, _>>()?;
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    println!("Pareto q={q}: sample mean {mean:.4} (exact {:.4}), variance c(q) = {:.4}", 1.0 / (q - 1.0), pareto_variance(q));

    let d = 16;
    for (name, radial) in [
        ("gaussian", RadialLaw::GaussianChi),
        ("pareto q=2.1", RadialLaw::SymmetrizedPareto { q: 2.1 }),
    ] {
        let spec = EllipticalSpec::new(d, radial)?;
        let x = sample_elliptical(&mut rng, &spec, 5_000);
        let norms: Vec<f64> = x.rows().into_iter().map(|r| r.dot(&r).sqrt()).collect();
        let max = norms.iter().cloned().fold(0.0, f64::max);
        let mut sorted = norms.clone();
        sorted.sort_by(f64::total_cmp);
        println!(
            "{name:>13}: median row norm {:.3}, max row norm {max:.1}, var(x_0) {:.3}",
            sorted[sorted.len() / 2],
            x.column(0).mapv(|v| v * v).mean().unwrap()
        );
    }

    let theta = sparse_truth(&mut rng, d, 3)?;
    let spec = EllipticalSpec::new(d, RadialLaw::SymmetrizedPareto { q: 2.1 })?;
    let x = sample_elliptical(&mut rng, &spec, 8);
    let noise = ParetoNoise::from_snr_db(10.0, 2.1);
    let model = ModelSpec::new(theta, Model::OneBitSign { noise: Some(noise) })?;
    let y = generate_responses(&mut rng, x.view(), &model)?;
    println!("noisy one-bit responses: {y:.3}");
    Ok(())
}
