//! Seeded samplers for the designs and response models used in the experiments.
//!
//! Every stream is driven by [`RngHandle`], a ChaCha8 generator seeded through
//! `SeedableRng::seed_from_u64`. ChaCha8 is a counter-based stream cipher with
//! a fixed, platform-independent output, so a seed reproduces the same draws on
//! every target.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Poisson, StandardNormal};

use crate::error::{invalid, Error, Result};

/// A seeded random stream. Single owner; derive one per trial with [`RngHandle::derive`].
#[derive(Debug, Clone)]
pub struct RngHandle {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngHandle {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream for a Monte-Carlo trial: `seed = master ⊕ index`.
    pub fn derive(master_seed: u64, index: u64) -> Self {
        Self::new(master_seed ^ index)
    }

    /// Uniform draw on `(0, 1]`.
    pub fn uniform_open0(&mut self) -> f64 {
        1.0 - self.inner.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }
}

impl RngCore for RngHandle {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Uniform draw from the unit sphere in `R^d` (normalized Gaussian vector).
pub fn sample_unit_sphere(rng: &mut RngHandle, d: usize) -> Result<Array1<f64>> {
    if d == 0 {
        return Err(Error::InvalidDimension("sphere dimension must be >= 1".into()));
    }
    loop {
        let g: Array1<f64> = (0..d).map(|_| rng.standard_normal()).collect();
        let norm = g.dot(&g).sqrt();
        if norm > 0.0 && norm.is_finite() {
            return Ok(g / norm);
        }
    }
}

/// Inverse CDF of the Pareto law with density `q/(1+t)^(1+q)` on `t > 0`.
pub fn pareto_from_uniform(u: f64, q: f64) -> f64 {
    u.powf(-1.0 / q) - 1.0
}

/// Draw from the Pareto law with density `q/(1+t)^(1+q)`.
pub fn sample_pareto(rng: &mut RngHandle, q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(invalid("q", format!("Pareto exponent must be > 0, got {q}")));
    }
    Ok(pareto_from_uniform(rng.uniform_open0(), q))
}

/// Variance `c(q) = q / ((q−1)²(q−2))` of the Pareto law, finite for `q > 2`.
pub fn pareto_variance(q: f64) -> f64 {
    q / ((q - 1.0).powi(2) * (q - 2.0))
}

/// Symmetrized Pareto draw `(ξ₁ − ξ₂)/√(2c(q))` with unit variance.
pub fn sample_symmetrized_pareto(rng: &mut RngHandle, q: f64) -> Result<f64> {
    if !(q > 2.0) {
        return Err(invalid(
            "q",
            format!("symmetrized Pareto needs q > 2 for finite variance, got {q}"),
        ));
    }
    let a = pareto_from_uniform(rng.uniform_open0(), q);
    let b = pareto_from_uniform(rng.uniform_open0(), q);
    Ok(symmetrize(a, b, q))
}

#[inline]
pub(crate) fn symmetrize(a: f64, b: f64, q: f64) -> f64 {
    (a - b) / (2.0 * pareto_variance(q)).sqrt()
}

/// Law of the radial variable `μ` of an elliptical design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialLaw {
    /// `μ = ‖g‖₂/√d` with `g ~ N(0, I_d)`, making each row `N(0, Σ)`.
    GaussianChi,
    /// `μ` symmetrized Pareto with exponent `q > 2` (unit variance).
    SymmetrizedPareto { q: f64 },
    /// Deterministic `μ`.
    Constant(f64),
}

/// Elliptical design `x = μ · B · (√d·U)` with `U` uniform on the unit sphere.
#[derive(Debug, Clone)]
pub struct EllipticalSpec {
    dim: usize,
    radial: RadialLaw,
    factor: Option<Array2<f64>>,
}

impl EllipticalSpec {
    pub fn new(dim: usize, radial: RadialLaw) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension("design dimension must be >= 1".into()));
        }
        if let RadialLaw::SymmetrizedPareto { q } = radial {
            if !(q > 2.0) {
                return Err(invalid("q", format!("radial Pareto exponent must be > 2, got {q}")));
            }
        }
        Ok(Self {
            dim,
            radial,
            factor: None,
        })
    }

    /// Sets the covariance factor `B` (`Σ = B·Bᵀ`). `B` is `p × d`; rows of the
    /// sample then live in `R^p`.
    pub fn with_factor(mut self, factor: Array2<f64>) -> Result<Self> {
        if factor.ncols() != self.dim {
            return Err(Error::Shape(format!(
                "factor has {} columns, design dimension is {}",
                factor.ncols(),
                self.dim
            )));
        }
        if factor.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("covariance factor".into()));
        }
        self.factor = Some(factor);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn output_dim(&self) -> usize {
        self.factor.as_ref().map_or(self.dim, |b| b.nrows())
    }

    pub fn radial(&self) -> RadialLaw {
        self.radial
    }

    fn sample_radial(&self, rng: &mut RngHandle) -> f64 {
        match self.radial {
            RadialLaw::GaussianChi => {
                let s: f64 = (0..self.dim).map(|_| rng.standard_normal().powi(2)).sum();
                (s / self.dim as f64).sqrt()
            }
            RadialLaw::SymmetrizedPareto { q } => {
                let a = pareto_from_uniform(rng.uniform_open0(), q);
                let b = pareto_from_uniform(rng.uniform_open0(), q);
                symmetrize(a, b, q)
            }
            RadialLaw::Constant(mu) => mu,
        }
    }
}

/// Draws `n` independent rows from the elliptical law.
pub fn sample_elliptical(rng: &mut RngHandle, spec: &EllipticalSpec, n: usize) -> Array2<f64> {
    let d = spec.dim;
    let mut out = Array2::zeros((n, spec.output_dim()));
    let radius = (d as f64).sqrt();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let u = sample_unit_sphere(rng, d).expect("dimension checked at construction");
        let mu = spec.sample_radial(rng);
        let scaled = u * (mu * radius);
        match &spec.factor {
            Some(b) => row.assign(&b.dot(&scaled)),
            None => row.assign(&scaled),
        }
    }
    out
}

/// Draws an `n × d` matrix with i.i.d. entries from `draw`.
pub fn sample_iid_matrix(
    rng: &mut RngHandle,
    n: usize,
    d: usize,
    mut draw: impl FnMut(&mut RngHandle) -> f64,
) -> Array2<f64> {
    let mut out = Array2::zeros((n, d));
    out.iter_mut().for_each(|v| *v = draw(rng));
    out
}

/// Link of a single-index model `y = f(⟨x, θ*⟩) + δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexLink {
    Identity,
    Sign,
    Tanh,
    Cube,
}

impl IndexLink {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            IndexLink::Identity => z,
            IndexLink::Sign => sign(z),
            IndexLink::Tanh => z.tanh(),
            IndexLink::Cube => z * z * z,
        }
    }
}

/// Response model. Noise scales multiply a unit-variance symmetrized Pareto
/// draw with exponent `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Linear { noise_sd: f64 },
    Logistic,
    Poisson,
    OneBitSign { noise: Option<ParetoNoise> },
    SingleIndex { link: IndexLink, noise: Option<ParetoNoise> },
}

/// Additive noise `scale · h` with `h` symmetrized Pareto of exponent `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoNoise {
    pub scale: f64,
    pub q: f64,
}

impl ParetoNoise {
    /// Noise at the given SNR in dB for a unit-variance signal: `h/√(10^(snr/10))`.
    pub fn from_snr_db(snr_db: f64, q: f64) -> Self {
        Self {
            scale: 10f64.powf(-snr_db / 20.0),
            q,
        }
    }
}

/// Truth vector together with the response model.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    theta_star: Array1<f64>,
    model: Model,
}

impl ModelSpec {
    /// For scale-free models (`OneBitSign`, `SingleIndex`) the truth is
    /// normalized to unit Euclidean norm.
    pub fn new(theta_star: Array1<f64>, model: Model) -> Result<Self> {
        Self::build(theta_star, model, None)
    }

    /// As [`ModelSpec::new`] but normalizes scale-free truths so that
    /// `‖Σ^{1/2}θ*‖₂ = 1` for the design covariance `Σ`.
    pub fn with_covariance(
        theta_star: Array1<f64>,
        model: Model,
        sigma: ArrayView2<f64>,
    ) -> Result<Self> {
        Self::build(theta_star, model, Some(sigma))
    }

    fn build(theta_star: Array1<f64>, model: Model, sigma: Option<ArrayView2<f64>>) -> Result<Self> {
        if theta_star.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("theta_star".into()));
        }
        let scale_free = matches!(model, Model::OneBitSign { .. } | Model::SingleIndex { .. });
        let theta_star = if scale_free {
            let sq = match sigma {
                Some(s) => {
                    if s.dim() != (theta_star.len(), theta_star.len()) {
                        return Err(Error::Shape("covariance does not match theta_star".into()));
                    }
                    theta_star.dot(&s.dot(&theta_star))
                }
                None => theta_star.dot(&theta_star),
            };
            if !(sq > 0.0) {
                return Err(Error::InvalidTruth);
            }
            theta_star / sq.sqrt()
        } else {
            theta_star
        };
        Ok(Self { theta_star, model })
    }

    pub fn theta_star(&self) -> &Array1<f64> {
        &self.theta_star
    }

    pub fn model(&self) -> Model {
        self.model
    }
}

fn sign(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else if z < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn noise_draw(rng: &mut RngHandle, noise: Option<ParetoNoise>) -> Result<f64> {
    match noise {
        Some(n) if n.scale != 0.0 => Ok(n.scale * sample_symmetrized_pareto(rng, n.q)?),
        _ => Ok(0.0),
    }
}

/// Exponent clamp used wherever `e^z` is evaluated on raw linear predictors.
pub const EXP_CLAMP: f64 = 30.0;

/// Draws responses `y` for the rows of `x` under `model`.
pub fn generate_responses(
    rng: &mut RngHandle,
    x: ArrayView2<f64>,
    model: &ModelSpec,
) -> Result<Array1<f64>> {
    if x.ncols() != model.theta_star.len() {
        return Err(Error::Shape(format!(
            "design has {} columns, theta_star has length {}",
            x.ncols(),
            model.theta_star.len()
        )));
    }
    let z = x.dot(&model.theta_star);
    let mut y = Array1::zeros(z.len());
    for (yi, &zi) in y.iter_mut().zip(z.iter()) {
        *yi = match model.model {
            Model::Linear { noise_sd } => {
                if noise_sd > 0.0 {
                    zi + noise_sd * rng.standard_normal()
                } else {
                    zi
                }
            }
            Model::Logistic => {
                let p = 1.0 / (1.0 + (-zi).exp());
                let b = Bernoulli::new(p).map_err(|e| invalid("p", e.to_string()))?;
                if b.sample(rng) {
                    1.0
                } else {
                    0.0
                }
            }
            Model::Poisson => {
                let rate = zi.clamp(-EXP_CLAMP, EXP_CLAMP).exp();
                let p = Poisson::new(rate).map_err(|e| invalid("rate", e.to_string()))?;
                p.sample(rng)
            }
            Model::OneBitSign { noise } => sign(zi) + noise_draw(rng, noise)?,
            Model::SingleIndex { link, noise } => link.apply(zi) + noise_draw(rng, noise)?,
        };
    }
    Ok(y)
}

/// `s`-sparse vector with support drawn uniformly and magnitudes uniform on `[0, 1]`.
pub fn sparse_truth(rng: &mut RngHandle, d: usize, s: usize) -> Result<Array1<f64>> {
    if s > d {
        return Err(invalid("s", format!("sparsity {s} exceeds dimension {d}")));
    }
    let mut theta = Array1::zeros(d);
    for idx in rand::seq::index::sample(rng, d, s) {
        theta[idx] = rng.random::<f64>();
    }
    Ok(theta)
}
