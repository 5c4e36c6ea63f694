//! Scalar truncation maps shared by the estimators.

/// The truncation function `ψ(x) = sign(x)·min(|x|, 1)`.
#[inline]
pub fn psi(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// `sign(x)·min(|x|, level)`; `level` must be nonnegative.
#[inline]
pub fn clip(x: f64, level: f64) -> f64 {
    x.clamp(-level, level)
}

/// Soft-thresholding `sign(x)·max(|x| − t, 0)`, the proximal map of `t·|·|`.
#[inline]
pub fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}
