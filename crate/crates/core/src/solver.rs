//! Full-rank linear least squares, either from the data `(A, b)` through
//! Householder QR or from pre-formed normal equations through Cholesky.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dense::{check_finite, norm2, DenseMatrix};
use crate::error::{Error, Result};
use crate::factor::{cholesky_upper, householder_qr, QrFactors, Triangular};

/// Where the noise variance σ_b² attached to a solution came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MseSource {
    /// `‖b − Ax̂‖² / (m − n)`
    Estimated,
    Supplied,
}

/// A solved least squares problem and everything the diagnostics need.
#[derive(Debug, Clone)]
pub struct LlsSolution {
    x: Vec<f64>,
    residual_norm: f64,
    m: usize,
    n: usize,
    mse: f64,
    mse_source: MseSource,
    factors: QrFactors,
    b_norm: Option<f64>,
    x_norm: f64,
    a_norm: f64,
}

impl LlsSolution {
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// σ_b² attached to this solution.
    pub fn mse(&self) -> f64 {
        self.mse
    }

    pub fn mse_source(&self) -> MseSource {
        self.mse_source
    }

    /// `‖r‖² / (m − n)` regardless of any supplied σ_b², if m > n.
    pub fn residual_mse(&self) -> Option<f64> {
        (self.m > self.n).then(|| self.residual_norm * self.residual_norm / (self.m - self.n) as f64)
    }

    pub fn factors(&self) -> &QrFactors {
        &self.factors
    }

    /// `‖b‖`, absent for solutions built from normal equations unless supplied.
    pub fn b_norm(&self) -> Option<f64> {
        self.b_norm
    }

    pub fn x_norm(&self) -> f64 {
        self.x_norm
    }

    /// `‖A‖_F`; from normal equations this is `√tr(AᵀA)`.
    pub fn a_norm(&self) -> f64 {
        self.a_norm
    }

    pub fn with_b_norm(mut self, b_norm: f64) -> Result<Self> {
        if !(b_norm.is_finite() && b_norm >= 0.0) {
            return Err(Error::InvalidArgument(format!("‖b‖ must be finite and nonnegative, got {b_norm}")));
        }
        self.b_norm = Some(b_norm);
        Ok(self)
    }

    /// Replaces σ_b² by a known value.
    pub fn with_sigma_sq(mut self, sigma_sq: f64) -> Result<Self> {
        validate_sigma_sq(sigma_sq)?;
        self.mse = sigma_sq;
        self.mse_source = MseSource::Supplied;
        Ok(self)
    }
}

pub(crate) fn validate_sigma_sq(sigma_sq: f64) -> Result<()> {
    if sigma_sq.is_finite() && sigma_sq >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("sigma^2 must be finite and nonnegative, got {sigma_sq}")))
    }
}

fn mse_for(m: usize, n: usize, residual_sq: f64, supplied: Option<f64>) -> Result<(f64, MseSource)> {
    match supplied {
        Some(s) => {
            validate_sigma_sq(s)?;
            Ok((s, MseSource::Supplied))
        }
        None if m > n => Ok((residual_sq / (m - n) as f64, MseSource::Estimated)),
        None => Err(Error::DegenerateMse { n }),
    }
}

/// Solves `min ‖Ax − b‖₂` by Householder QR.
///
/// `sigma_sq` fixes σ_b²; without it the MSE estimate is used, which needs
/// m > n.
pub fn solve_qr(a: &DenseMatrix, b: &[f64], sigma_sq: Option<f64>) -> Result<LlsSolution> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::DimensionMismatch {
            what: "right-hand side length",
            expected: m,
            found: b.len(),
        });
    }
    check_finite(b, "right-hand side")?;
    let factors = householder_qr(a)?;
    let (x, residual_norm) = factors.least_squares(b)?;
    let (mse, mse_source) = mse_for(m, n, residual_norm * residual_norm, sigma_sq)?;
    Ok(LlsSolution {
        x_norm: norm2(&x),
        x,
        residual_norm,
        m,
        n,
        mse,
        mse_source,
        factors,
        b_norm: Some(norm2(b)),
        a_norm: a.frobenius_norm(),
    })
}

/// Solves the normal equations `(AᵀA) x = Aᵀb` by Cholesky when only the
/// cross products, the observation count `m` and `‖b − Ax̂‖²` are known.
pub fn solve_normal_equations(
    n_mat: &DenseMatrix,
    rhs: &[f64],
    m: usize,
    residual_norm_sq: f64,
) -> Result<LlsSolution> {
    let n = n_mat.cols();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            what: "normal equations right-hand side length",
            expected: n,
            found: rhs.len(),
        });
    }
    if m <= n {
        return Err(Error::DegenerateMse { n });
    }
    check_finite(rhs, "normal equations right-hand side")?;
    if !(residual_norm_sq.is_finite() && residual_norm_sq >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "residual norm squared must be finite and nonnegative, got {residual_norm_sq}"
        )));
    }
    let factors = cholesky_upper(n_mat)?;
    let mut x = factors.r().solve(rhs, Triangular::Transposed)?;
    factors.r().solve_in_place(&mut x, Triangular::Plain);
    let trace: f64 = n_mat.diagonal().iter().sum();
    Ok(LlsSolution {
        x_norm: norm2(&x),
        x,
        residual_norm: residual_norm_sq.sqrt(),
        m,
        n,
        mse: residual_norm_sq / (m - n) as f64,
        mse_source: MseSource::Estimated,
        factors,
        b_norm: None,
        a_norm: trace.max(0.0).sqrt(),
    })
}

/// The linear model `b = A x + ε` with `E(ε) = 0`, `V(ε) = σ_b² I`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticalModel {
    a: DenseMatrix,
    x_true: Vec<f64>,
    sigma_b: f64,
}

impl StatisticalModel {
    pub fn new(a: DenseMatrix, x_true: Vec<f64>, sigma_b: f64) -> Result<Self> {
        if x_true.len() != a.cols() {
            return Err(Error::DimensionMismatch {
                what: "true parameter length",
                expected: a.cols(),
                found: x_true.len(),
            });
        }
        check_finite(&x_true, "true parameters")?;
        if !(sigma_b.is_finite() && sigma_b >= 0.0) {
            return Err(Error::InvalidArgument(format!("sigma_b must be finite and nonnegative, got {sigma_b}")));
        }
        Ok(Self { a, x_true, sigma_b })
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn x_true(&self) -> &[f64] {
        &self.x_true
    }

    pub fn sigma_b(&self) -> f64 {
        self.sigma_b
    }

    /// Noise-free observations `A x`.
    pub fn mean_observations(&self) -> Vec<f64> {
        self.a.matvec(&self.x_true).expect("dimensions checked at construction")
    }
}

/// Noise generator for one replicate. ChaCha is counter based, so streams for
/// different seeds are independent and cheap to create.
pub(crate) fn noise_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn add_noise(mean: &[f64], sigma_b: f64, rng: &mut impl Rng) -> Vec<f64> {
    mean.iter()
        .map(|&mu| {
            let z: f64 = rng.sample(StandardNormal);
            mu + sigma_b * z
        })
        .collect()
}

/// One realization of `b = A x_true + ε`, ε i.i.d. N(0, σ_b²). The same seed
/// always yields the same vector.
pub fn simulate_observations(model: &StatisticalModel, seed: u64) -> Vec<f64> {
    let mean = model.mean_observations();
    if model.sigma_b == 0.0 {
        return mean;
    }
    add_noise(&mean, model.sigma_b, &mut noise_rng(seed))
}
