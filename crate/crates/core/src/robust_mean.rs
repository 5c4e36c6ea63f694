//! Median-of-means estimation of a mean vector.

use ndarray::{s, Array1, ArrayView2, Axis};

use crate::error::{invalid, Error, Result};

/// Settings for [`median_of_means`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoMConfig {
    beta: f64,
    groups: Option<usize>,
    pub weiszfeld_tol: f64,
    pub weiszfeld_max_iter: usize,
}

impl MoMConfig {
    /// Confidence level `β > 1`; uses `k = ⌊3.5β⌋ + 1` groups.
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 1.0) || !beta.is_finite() {
            return Err(invalid("beta", format!("confidence must be > 1, got {beta}")));
        }
        Ok(Self {
            beta,
            groups: None,
            weiszfeld_tol: 1e-9,
            weiszfeld_max_iter: 500,
        })
    }

    /// Overrides the group count. `k = 1` reduces to the sample mean.
    pub fn with_groups(mut self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(invalid("groups", "group count must be >= 1"));
        }
        self.groups = Some(k);
        Ok(self)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn groups(&self) -> usize {
        self.groups
            .unwrap_or_else(|| (3.5 * self.beta).floor() as usize + 1)
    }
}

/// Output of the Weiszfeld iteration.
#[derive(Debug, Clone)]
pub struct GeometricMedian {
    pub point: Array1<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Norm of the minimal subgradient at `point`, divided by the number of points.
    pub subgradient: f64,
}

/// Geometric median of the rows of `points` by Weiszfeld's iteration with the
/// Vardi–Zhang modification at data points.
///
/// Converges when the minimal-norm subgradient of `z ↦ Σ‖z − xⱼ‖`, averaged over
/// the `k` points, is at most `tol`. Otherwise the best iterate is returned with
/// `converged = false`.
pub fn geometric_median(
    points: ArrayView2<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<GeometricMedian> {
    let k = points.nrows();
    if k == 0 {
        return Err(Error::EmptyInput("geometric median of zero points".into()));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("geometric median input".into()));
    }
    let mut z = points.mean_axis(Axis(0)).expect("k >= 1");
    if k == 1 {
        return Ok(GeometricMedian {
            point: points.row(0).to_owned(),
            iterations: 0,
            converged: true,
            subgradient: 0.0,
        });
    }

    let diameter = points
        .rows()
        .into_iter()
        .map(|r| dist(r.view(), z.view()))
        .fold(0.0f64, f64::max)
        * 2.0;
    if diameter == 0.0 {
        return Ok(GeometricMedian {
            point: z,
            iterations: 0,
            converged: true,
            subgradient: 0.0,
        });
    }
    let eps = 1e-12 * diameter;
    let d = points.ncols();

    let objective = |z: &Array1<f64>| -> f64 {
        points.rows().into_iter().map(|r| dist(r, z.view())).sum()
    };
    let mut best = z.clone();
    let mut best_obj = objective(&z);
    let mut best_sub = f64::INFINITY;

    for it in 0..max_iter {
        // weighted sums over points that do not coincide with z
        let mut coincide = 0usize;
        let mut weight = 0.0;
        let mut weighted = Array1::<f64>::zeros(d);
        for row in points.rows() {
            let r = dist(row, z.view());
            if r <= eps {
                coincide += 1;
            } else {
                weight += 1.0 / r;
                weighted.scaled_add(1.0 / r, &row);
            }
        }
        if weight == 0.0 {
            return Ok(GeometricMedian {
                point: z,
                iterations: it,
                converged: true,
                subgradient: 0.0,
            });
        }
        // pull = Σ (xⱼ − z)/‖xⱼ − z‖ = weight·(T(z) − z)
        let pull = &weighted - &(&z * weight);
        let pull_norm = pull.dot(&pull).sqrt();
        let sub = (pull_norm - coincide as f64).max(0.0) / k as f64;

        let obj = objective(&z);
        if obj < best_obj || (obj == best_obj && sub < best_sub) {
            best_obj = obj;
            best = z.clone();
            best_sub = sub;
        }
        if sub <= tol {
            return Ok(GeometricMedian {
                point: z,
                iterations: it,
                converged: true,
                subgradient: sub,
            });
        }

        let target = weighted / weight;
        z = if coincide == 0 {
            target
        } else {
            let ratio = coincide as f64 / pull_norm;
            target * (1.0 - ratio).max(0.0) + &z * ratio.min(1.0)
        };
    }

    let obj = objective(&z);
    if obj < best_obj {
        best = z;
    }
    let sub = subgradient_norm(points, best.view(), eps);
    Ok(GeometricMedian {
        point: best,
        iterations: max_iter,
        converged: sub <= tol,
        subgradient: sub,
    })
}

fn subgradient_norm(points: ArrayView2<f64>, z: ndarray::ArrayView1<f64>, eps: f64) -> f64 {
    let mut coincide = 0usize;
    let mut pull = Array1::<f64>::zeros(points.ncols());
    for row in points.rows() {
        let r = dist(row, z);
        if r <= eps {
            coincide += 1;
        } else {
            pull.scaled_add(1.0 / r, &(&row - &z));
        }
    }
    (pull.dot(&pull).sqrt() - coincide as f64).max(0.0) / points.nrows() as f64
}

fn dist(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Median-of-means: split the rows into `k` disjoint consecutive groups of size
/// `⌊m/k⌋` (leftover rows are discarded), average each group and return the
/// geometric median of the group means.
pub fn median_of_means(x: ArrayView2<f64>, cfg: &MoMConfig) -> Result<Array1<f64>> {
    let k = cfg.groups();
    let m = x.nrows();
    if m < 2 * k {
        return Err(Error::InsufficientSamples { needed: 2 * k, got: m });
    }
    let size = m / k;
    let mut means = ndarray::Array2::zeros((k, x.ncols()));
    for (j, mut row) in means.axis_iter_mut(Axis(0)).enumerate() {
        let group = x.slice(s![j * size..(j + 1) * size, ..]);
        row.assign(&group.mean_axis(Axis(0)).expect("group is non-empty"));
    }
    Ok(geometric_median(means.view(), cfg.weiszfeld_tol, cfg.weiszfeld_max_iter)?.point)
}
