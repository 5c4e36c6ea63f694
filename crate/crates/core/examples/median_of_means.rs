//! Median-of-means against the sample mean on heavy-tailed data.

use heavytail::rng::{sample_elliptical, EllipticalSpec, RadialLaw, RngHandle};
use heavytail::robust_mean::{median_of_means, MoMConfig};
use ndarray::Axis;

fn main() -> heavytail::Result<()> {
    let (m, d, trials) = (1000, 10, 200);
    let spec = EllipticalSpec::new(d, RadialLaw::SymmetrizedPareto { q: 2.1 })?;
    let cfg = MoMConfig::new(3.0)?;
    println!("{} groups of {} samples", cfg.groups(), m / cfg.groups());

    let mut mom = Vec::with_capacity(trials);
    let mut mean = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = RngHandle::derive(1, t as u64);
        let x = sample_elliptical(&mut rng, &spec, m);
        let a = median_of_means(x.view(), &cfg)?;
        let b = x.mean_axis(Axis(0)).expect("m > 0");
        mom.push(a.dot(&a).sqrt());
        mean.push(b.dot(&b).sqrt());
    }
    for v in [&mut mom, &mut mean] {
        v.sort_by(f64::total_cmp);
    }
    let q = |v: &[f64], p: f64| v[((v.len() - 1) as f64 * p) as usize];
    println!("error quantiles       50%      99%      max");
    println!("median-of-means  {:8.4} {:8.4} {:8.4}", q(&mom, 0.5), q(&mom, 0.99), q(&mom, 1.0));
    println!("sample mean      {:8.4} {:8.4} {:8.4}", q(&mean, 0.5), q(&mean, 0.99), q(&mean, 1.0));
    Ok(())
}
