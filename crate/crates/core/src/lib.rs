//! Robust estimators for heavy-tailed data built on truncation.
//!
//! * [`glm`]: ℓ1-penalized GLM regression on a coordinate-truncated design, with
//!   a plain Lasso baseline.
//! * [`single_index`]: closed-form recovery of the index direction in
//!   `y = f(⟨x, θ*⟩, δ)` for elliptical designs.
//! * [`robust_cov`]: `ψ`-truncated covariance with median-of-means centring,
//!   Lepski adaptation, spectral low-rank thresholding and PCA diagnostics.
//! * [`rng`]: seeded samplers for the designs and response models.
//! * [`bench`]: the seeded Monte-Carlo runner behind the `heavytail` binary.

pub mod bench;
pub mod error;
pub mod glm;
pub mod report;
pub mod rng;
pub mod robust_cov;
pub mod robust_mean;
pub mod single_index;
pub mod symmat;
pub mod truncation;

pub use error::{Error, Result};
pub use report::{EstimateReport, ReportFlags};
