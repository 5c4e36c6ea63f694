//! Spectral thresholding of the robust covariance when a rank-2 signal sits on
//! a small isotropic noise floor, and the distance between estimated and true
//! principal subspaces.

use heavytail::rng::{sample_elliptical, EllipticalSpec, RadialLaw, RngHandle};
use heavytail::robust_cov::{lepski_covariance, lowrank_covariance, pca_projector_distance, CovConfig};
use heavytail::symmat::{eigendecompose, frobenius_norm, SymmetricMatrix};
use ndarray::Array2;

fn main() -> heavytail::Result<()> {
    let (d, r, m, floor) = (16, 2, 500, 0.15);
    let mut rng = RngHandle::new(11);
    let mut factor = Array2::<f64>::zeros((d, r));
    factor[[0, 0]] = 2.0;
    factor[[1, 0]] = 1.0;
    factor[[5, 1]] = 1.0;
    let signal = SymmetricMatrix::new(factor.dot(&factor.t()))?;
    let spec = EllipticalSpec::new(r, RadialLaw::GaussianChi)?.with_factor(factor)?;
    let x = sample_elliptical(&mut rng, &spec, m) + Array2::from_shape_fn((m, d), |_| floor * rng.standard_normal());
    let sigma = SymmetricMatrix::new(signal.as_array() + &(Array2::<f64>::eye(d) * (floor * floor)))?;

    let eig = eigendecompose(&sigma)?.values;
    let sigma0 = (eig[0] * sigma.trace() + 2.0 * eig[0] * eig[0]).sqrt();
    let cfg = CovConfig::with_bracket(2.0, 0.1 * sigma0, 10.0 * sigma0)?;
    let (full, _) = lepski_covariance(x.view(), &cfg)?;
    println!(
        "lepski: error to signal {:.4}, projector distance {:.4}",
        frobenius_norm(&full.sub(&signal)?)?,
        pca_projector_distance(&full, &signal, r)?
    );
    for factor in [0.002, 0.01, 0.05, 0.5, 4.0] {
        let tau = factor * sigma0 * (2.0 / m as f64).sqrt();
        let lr = lowrank_covariance(x.view(), &cfg, tau)?;
        let rank = eigendecompose(&lr)?.values.iter().filter(|&&l| l > 1e-12).count();
        println!(
            "τ = {factor:>5}·σ₀√(β/m): rank {rank:>2}, error to signal {:.4}, projector distance {:.4}",
            frobenius_norm(&lr.sub(&signal)?)?,
            pca_projector_distance(&lr, &signal, r)?
        );
    }
    Ok(())
}
