//! Dense symmetric matrices, a cyclic Jacobi eigensolver and spectral matrix functions.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{invalid, Error, Result};

/// Dense symmetric matrix. Construction symmetrizes the input as `(A + Aᵀ)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(Array2<f64>);

impl SymmetricMatrix {
    pub fn new(a: Array2<f64>) -> Result<Self> {
        let (r, c) = a.dim();
        if r != c {
            return Err(Error::Shape(format!("matrix is {r}x{c}, expected square")));
        }
        if r == 0 {
            return Err(Error::InvalidDimension("matrix dimension must be >= 1".into()));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries".into()));
        }
        let mut s = a;
        for i in 0..r {
            for j in (i + 1)..r {
                let m = 0.5 * (s[[i, j]] + s[[j, i]]);
                s[[i, j]] = m;
                s[[j, i]] = m;
            }
        }
        Ok(Self(s))
    }

    pub fn identity(d: usize) -> Self {
        Self(Array2::eye(d))
    }

    pub fn zeros(d: usize) -> Self {
        Self(Array2::zeros((d, d)))
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        Self::new(Array2::from_diag(&ArrayView1::from(diag)))
    }

    /// Rank-one matrix `x xᵀ`.
    pub fn outer(x: ArrayView1<f64>) -> Result<Self> {
        let col = x.insert_axis(Axis(1));
        Self::new(col.dot(&col.t()))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.diag().sum()
    }

    /// Entrywise difference `self − other`.
    pub fn sub(&self, other: &SymmetricMatrix) -> Result<SymmetricMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::Shape("dimension mismatch in subtraction".into()));
        }
        Ok(Self(&self.0 - &other.0))
    }
}

/// Spectral factorization `A = V diag(λ) Vᵀ` with eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Array1<f64>,
    /// Eigenvectors as columns.
    pub vectors: Array2<f64>,
}

impl EigenDecomposition {
    /// `V diag(f(λ)) Vᵀ`.
    pub fn compose(&self, f: impl Fn(f64) -> f64) -> Result<SymmetricMatrix> {
        let mapped: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        if let Some((&l, _)) = self
            .values
            .iter()
            .zip(&mapped)
            .find(|(_, m)| !m.is_finite())
        {
            return Err(Error::Domain(l));
        }
        let mut scaled = self.vectors.clone();
        for (mut col, m) in scaled.axis_iter_mut(Axis(1)).zip(&mapped) {
            col *= *m;
        }
        SymmetricMatrix::new(scaled.dot(&self.vectors.t()))
    }

    pub fn reconstruct(&self) -> SymmetricMatrix {
        self.compose(|l| l).expect("eigenvalues are finite")
    }
}

const JACOBI_MAX_SWEEPS: usize = 30;
const JACOBI_REL_TOL: f64 = 1e-12;

/// Cyclic Jacobi eigensolver with a threshold on the first sweeps.
///
/// Stops when the off-diagonal Frobenius mass drops below `1e-12·‖A‖_F`.
/// Eigenvalues come out sorted descending; each eigenvector is signed so that
/// its largest-magnitude component is positive.
pub fn eigendecompose(a: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    let mut m: Vec<f64> = a.0.iter().copied().collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let total: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let off_norm = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = total == 0.0 || off_norm(&m) < JACOBI_REL_TOL * total;
    let mut sweep = 0;
    while !converged && sweep < JACOBI_MAX_SWEEPS {
        let off = off_norm(&m);
        // skip small rotations early on
        let threshold = if sweep < 3 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 || apq.abs() < threshold {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        sweep += 1;
        converged = off_norm(&m) < JACOBI_REL_TOL * total;
    }
    if !converged {
        return Err(Error::NoConvergence(JACOBI_MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]).then(i.cmp(&j)));
    let values: Array1<f64> = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        let mut best = 0usize;
        for k in 0..n {
            if v[k * n + src].abs() > v[best * n + src].abs() {
                best = k;
            }
        }
        let flip = if v[best * n + src] < 0.0 { -1.0 } else { 1.0 };
        for k in 0..n {
            vectors[[k, dst]] = flip * v[k * n + src];
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// `f(A) = V f(Λ) Vᵀ`. Fails with [`Error::Domain`] if `f` is non-finite at an eigenvalue.
pub fn matrix_function(a: &SymmetricMatrix, f: impl Fn(f64) -> f64) -> Result<SymmetricMatrix> {
    eigendecompose(a)?.compose(f)
}

/// Largest absolute eigenvalue.
pub fn operator_norm(a: &SymmetricMatrix) -> Result<f64> {
    Ok(eigendecompose(a)?
        .values
        .iter()
        .fold(0.0f64, |m, l| m.max(l.abs())))
}

/// `√Σλᵢ²`.
pub fn frobenius_norm(a: &SymmetricMatrix) -> Result<f64> {
    Ok(eigendecompose(a)?.values.iter().map(|l| l * l).sum::<f64>().sqrt())
}

/// `Σ|λᵢ|`.
pub fn nuclear_norm(a: &SymmetricMatrix) -> Result<f64> {
    Ok(eigendecompose(a)?.values.iter().map(|l| l.abs()).sum())
}

/// Maps eigenvalues `λ ↦ max(λ − τ/2, 0)`: the minimizer of `‖B − A‖_F² + τ‖B‖₁`.
pub fn spectral_soft_threshold(a: &SymmetricMatrix, tau: f64) -> Result<SymmetricMatrix> {
    if !(tau >= 0.0) {
        return Err(invalid("tau", format!("must be >= 0, got {tau}")));
    }
    matrix_function(a, |l| (l - 0.5 * tau).max(0.0))
}

fn psd_eigen(a: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let eig = eigendecompose(a)?;
    let scale = eig.values.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    if let Some(&neg) = eig.values.iter().find(|&&l| l < -1e-10 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::NotPsd(neg));
    }
    Ok(eig)
}

/// Principal square root of a PSD matrix. Tiny negative eigenvalues are clamped to zero.
pub fn sqrt_psd(a: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    psd_eigen(a)?.compose(|l| l.max(0.0).sqrt())
}

/// Relative floor below which [`invsqrt_psd`] declares the matrix rank deficient.
pub const INVSQRT_RIDGE: f64 = 1e-12;

/// Inverse principal square root. Requires `λ_min > 1e-12·λ_max`.
pub fn invsqrt_psd(a: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let eig = psd_eigen(a)?;
    let lmax = eig.values[0];
    let lmin = eig.values[eig.values.len() - 1];
    let floor = INVSQRT_RIDGE * lmax;
    if !(lmax > 0.0) || lmin <= floor {
        return Err(Error::RankDeficient { value: lmin, floor });
    }
    eig.compose(|l| 1.0 / l.sqrt())
}
