//! Lepski-tuned truncated covariance on heavy-tailed samples.

use heavytail::rng::{sample_elliptical, EllipticalSpec, RadialLaw, RngHandle};
use heavytail::robust_cov::{lepski_covariance, CovConfig};
use heavytail::symmat::{operator_norm, SymmetricMatrix};
use ndarray::Axis;

fn main() -> heavytail::Result<()> {
    let d = 8;
    let mut rng = RngHandle::new(7);
    let spec = EllipticalSpec::new(d, RadialLaw::SymmetrizedPareto { q: 4.5 })?;
    let truth = SymmetricMatrix::identity(d);

    // σ₀² = E[μ⁴]·d for this design; the bracket only needs to contain it
    let cfg = CovConfig::with_bracket(2.0, 2.0, 2000.0)?;
    for m in [500, 2000, 8000] {
        let x = sample_elliptical(&mut rng, &spec, m);
        let (est, trace) = lepski_covariance(x.view(), &cfg)?;
        let mu = x.mean_axis(Axis(0)).expect("m > 0");
        let z = &x - &mu;
        let plain = SymmetricMatrix::new(z.t().dot(&z) / m as f64)?;
        println!(
            "m={m:>5}: lepski σ={:7.3} (index {} of {}), error {:.4}; sample covariance error {:.4}",
            trace.chosen_sigma(),
            trace.chosen,
            trace.sigmas.len(),
            operator_norm(&est.sub(&truth)?)?,
            operator_norm(&plain.sub(&truth)?)?,
        );
    }
    Ok(())
}
