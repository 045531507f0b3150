//! Frobenius-norm partial condition numbers of the least squares solution.
//!
//! For `g(A, b) = Lᵀx(A, b)` and the product norm
//! `‖(ΔA, Δb)‖ = √(α²‖ΔA‖² + β²‖Δb‖²)`, the quantity
//!
//! ```text
//! f(A, b) = ( ‖Lᵀ(AᵀA)⁻¹‖² ‖r‖²/α² + ‖LᵀA†‖² (‖x‖²/α² + 1/β²) )^½
//! ```
//!
//! brackets the condition number for general L and equals it when L is a
//! single vector or the identity. Everything here is evaluated from the
//! triangular factor R using `‖LᵀA†‖ = ‖R⁻ᵀL‖` and
//! `‖Lᵀ(AᵀA)⁻¹‖ = ‖R⁻¹R⁻ᵀL‖`.
//!
//! Weights are stored as `1/α²` and `1/β²`, so an infinite weight is a zero
//! and removes the corresponding perturbation channel without a special case.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::covariance::{cov_full, resolve_sigma_sq};
use crate::dense::{norm2, unit_vector, DenseMatrix};
use crate::error::{Error, Result};
use crate::estimate::{inv_norm_estimate, NormKind};
use crate::factor::{householder_qr, Triangular};
use crate::oracle::instance::gaussian_vector;
use crate::solver::LlsSolution;
use crate::svd::{spectral_norm, triangular_sigma_min};

/// Weights `(α, β)` of the data-space product norm, held as `(1/α², 1/β²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeights")]
pub struct NormWeights {
    inv_alpha_sq: f64,
    inv_beta_sq: f64,
}

#[derive(Deserialize)]
struct RawWeights {
    inv_alpha_sq: f64,
    inv_beta_sq: f64,
}

impl TryFrom<RawWeights> for NormWeights {
    type Error = Error;

    fn try_from(raw: RawWeights) -> Result<Self> {
        Self::from_inverse_squares(raw.inv_alpha_sq, raw.inv_beta_sq)
    }
}

impl Default for NormWeights {
    fn default() -> Self {
        Self::unit()
    }
}

fn inverse_square(w: f64, name: &str) -> Result<f64> {
    if w == f64::INFINITY {
        Ok(0.0)
    } else if w.is_finite() && w > 0.0 {
        Ok(1.0 / (w * w))
    } else {
        Err(Error::InvalidWeights(format!("{name} must be positive or +inf, got {w}")))
    }
}

impl NormWeights {
    /// From `α, β > 0`; `f64::INFINITY` excludes that channel.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        Self::from_inverse_squares(inverse_square(alpha, "alpha")?, inverse_square(beta, "beta")?)
    }

    pub fn from_inverse_squares(inv_alpha_sq: f64, inv_beta_sq: f64) -> Result<Self> {
        for (v, name) in [(inv_alpha_sq, "1/alpha^2"), (inv_beta_sq, "1/beta^2")] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidWeights(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        if inv_alpha_sq == 0.0 && inv_beta_sq == 0.0 {
            return Err(Error::InvalidWeights("alpha and beta cannot both be infinite".into()));
        }
        Ok(Self {
            inv_alpha_sq,
            inv_beta_sq,
        })
    }

    /// α = β = 1.
    pub fn unit() -> Self {
        Self {
            inv_alpha_sq: 1.0,
            inv_beta_sq: 1.0,
        }
    }

    /// α = +∞, β = 1: only b is perturbed.
    pub fn b_only() -> Self {
        Self {
            inv_alpha_sq: 0.0,
            inv_beta_sq: 1.0,
        }
    }

    /// α = 1, β = +∞: only A is perturbed.
    pub fn a_only() -> Self {
        Self {
            inv_alpha_sq: 1.0,
            inv_beta_sq: 0.0,
        }
    }

    pub fn inv_alpha_sq(&self) -> f64 {
        self.inv_alpha_sq
    }

    pub fn inv_beta_sq(&self) -> f64 {
        self.inv_beta_sq
    }

    pub fn alpha(&self) -> f64 {
        1.0 / self.inv_alpha_sq.sqrt()
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.inv_beta_sq.sqrt()
    }

    pub fn perturbs_a(&self) -> bool {
        self.inv_alpha_sq > 0.0
    }

    pub fn perturbs_b(&self) -> bool {
        self.inv_beta_sq > 0.0
    }

    /// `√(α²‖A‖² + β²‖b‖²)`, dropping excluded channels. ‖b‖ is only needed
    /// when b is perturbed.
    pub fn data_norm(&self, a_norm: f64, b_norm: Option<f64>) -> Result<f64> {
        let mut sq = 0.0;
        if self.perturbs_a() {
            sq += a_norm * a_norm / self.inv_alpha_sq;
        }
        if self.perturbs_b() {
            let b = b_norm.ok_or(Error::MissingData("‖b‖ is required for relative conditioning"))?;
            sq += b * b / self.inv_beta_sq;
        }
        Ok(sq.sqrt())
    }
}

/// `‖A†ᵀ…‖`-type squared norms combined into the Frobenius condition number:
/// `pinv_sq = ‖LᵀA†‖²`, `inv_sq = ‖Lᵀ(AᵀA)⁻¹‖²`.
fn combine(pinv_sq: f64, inv_sq: f64, sol: &LlsSolution, w: &NormWeights) -> f64 {
    let r2 = sol.residual_norm() * sol.residual_norm();
    let x2 = sol.x_norm() * sol.x_norm();
    let ia = w.inv_alpha_sq;
    (inv_sq * r2 * ia + pinv_sq * (x2 * ia + w.inv_beta_sq)).sqrt()
}

/// Solution-level value for a given estimate of `‖(AᵀA)⁻¹‖₂ = ‖R⁻¹‖₂²`.
fn combine_solution(r_inv_norm_sq: f64, sol: &LlsSolution, w: &NormWeights) -> f64 {
    combine(r_inv_norm_sq, r_inv_norm_sq * r_inv_norm_sq, sol, w)
}

fn check_index(sol: &LlsSolution, i: usize) -> Result<()> {
    if i < sol.n() {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index: i, len: sol.n() })
    }
}

/// `f(A, b)` for an n×k matrix L, k ≤ n: an upper bound on the Frobenius
/// condition number of `Lᵀx` that is within a factor √3 of it.
pub fn f_general(sol: &LlsSolution, l_mat: &DenseMatrix, w: &NormWeights) -> Result<f64> {
    let n = sol.n();
    if l_mat.rows() != n {
        return Err(Error::DimensionMismatch {
            what: "rows of L",
            expected: n,
            found: l_mat.rows(),
        });
    }
    if l_mat.cols() > n {
        return Err(Error::DimensionMismatch {
            what: "columns of L (at most n)",
            expected: n,
            found: l_mat.cols(),
        });
    }
    let r = sol.factors().r();
    let k = l_mat.cols();
    let mut y = vec![0.0; n * k];
    let mut z = vec![0.0; n * k];
    for j in 0..k {
        let mut col = l_mat.column(j);
        r.solve_in_place(&mut col, Triangular::Transposed);
        for i in 0..n {
            y[i * k + j] = col[i];
        }
        r.solve_in_place(&mut col, Triangular::Plain);
        for i in 0..n {
            z[i * k + j] = col[i];
        }
    }
    let pinv = spectral_norm(&DenseMatrix::from_parts(n, k, y));
    let inv = spectral_norm(&DenseMatrix::from_parts(n, k, z));
    Ok(combine(pinv * pinv, inv * inv, sol, w))
}

/// κ_i(A, b): exact condition number of the component `x_i`, from two
/// triangular solves. With α = +∞, β = 1 this is `κ_i(b) = ‖e_iᵀA†‖`.
pub fn kappa_component(sol: &LlsSolution, i: usize, w: &NormWeights) -> Result<f64> {
    check_index(sol, i)?;
    let r = sol.factors().r();
    let mut v = unit_vector(sol.n(), i);
    r.solve_in_place(&mut v, Triangular::Transposed);
    let pinv_sq = norm2(&v).powi(2);
    if !w.perturbs_a() {
        return Ok(combine(pinv_sq, 0.0, sol, w));
    }
    r.solve_in_place(&mut v, Triangular::Plain);
    let inv_sq = norm2(&v).powi(2);
    Ok(combine(pinv_sq, inv_sq, sol, w))
}

/// Every κ_i at once. The b-only case needs just the rows of R⁻¹ (n³/3
/// flops); otherwise the rows of `(AᵀA)⁻¹` are formed as well (2n³/3).
pub fn kappa_components(sol: &LlsSolution, w: &NormWeights) -> Result<Vec<f64>> {
    let n = sol.n();
    let inv = sol.factors().r().inverse();
    let pinv_sq: Vec<f64> = (0..n).map(|i| norm2(&inv.row(i)[i..]).powi(2)).collect();
    if !w.perturbs_a() {
        return Ok(pinv_sq.iter().map(|&p| combine(p, 0.0, sol, w)).collect());
    }
    let gram_inv = cov_full(sol, Some(1.0))?;
    Ok((0..n)
        .map(|i| combine(pinv_sq[i], norm2(gram_inv.row(i)).powi(2), sol, w))
        .collect())
}

/// How `‖R⁻¹‖₂` is obtained for the solution-level condition number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionMethod {
    /// `1/σ_min(R)` by Jacobi SVD.
    ExactSigmaMin,
    /// `‖R⁻¹‖_F = √(tr(C)/σ_b²)`.
    TraceApprox,
    /// Hager–Higham estimate of `‖R⁻¹‖₁`.
    OneNormEstimate,
    /// Hager–Higham estimate of `‖R⁻¹‖_∞`.
    InfNormEstimate,
}

impl SolutionMethod {
    pub const ALL: [SolutionMethod; 4] = [
        SolutionMethod::ExactSigmaMin,
        SolutionMethod::TraceApprox,
        SolutionMethod::OneNormEstimate,
        SolutionMethod::InfNormEstimate,
    ];
}

/// The stand-in for `‖R⁻¹‖₂` and the interval it is known to bracket.
fn r_inv_norm(sol: &LlsSolution, method: SolutionMethod) -> Result<(f64, Option<(f64, f64)>)> {
    let r = sol.factors().r();
    let sqrt_n = (sol.n() as f64).sqrt();
    Ok(match method {
        SolutionMethod::ExactSigmaMin => (1.0 / triangular_sigma_min(r), None),
        SolutionMethod::TraceApprox => {
            let inv = r.inverse();
            let fro = inv.frobenius_norm();
            (fro, Some((fro / sqrt_n, fro)))
        }
        SolutionMethod::OneNormEstimate | SolutionMethod::InfNormEstimate => {
            let kind = if method == SolutionMethod::OneNormEstimate {
                NormKind::One
            } else {
                NormKind::Infinity
            };
            let est = inv_norm_estimate(r, kind);
            (est, Some((est / sqrt_n, est * sqrt_n)))
        }
    })
}

/// κ_LS(A, b), exactly or through one of the cheaper stand-ins for
/// `‖R⁻¹‖₂`. With α = +∞, β = 1 this is `κ_LS(b) = ‖A†‖`, and the trace
/// variant becomes `√tr(C)/σ_b`.
pub fn kappa_solution(sol: &LlsSolution, w: &NormWeights, method: SolutionMethod) -> Result<f64> {
    let (s, _) = r_inv_norm(sol, method)?;
    Ok(combine_solution(s * s, sol, w))
}

/// The interval obtained by pushing the norm inequalities
/// `‖R⁻¹‖_F/√n ≤ ‖R⁻¹‖₂ ≤ ‖R⁻¹‖_F` (and the √n brackets for the 1- and
/// ∞-norms) through the κ_LS formula. `None` for the exact method.
pub fn kappa_solution_bracket(
    sol: &LlsSolution,
    w: &NormWeights,
    method: SolutionMethod,
) -> Result<Option<(f64, f64)>> {
    let (_, bracket) = r_inv_norm(sol, method)?;
    Ok(bracket.map(|(lo, hi)| (combine_solution(lo * lo, sol, w), combine_solution(hi * hi, sol, w))))
}

/// Relative condition number; unbounded when the conditioned quantity is 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Relative {
    Finite(f64),
    Infinite,
}

impl Relative {
    pub fn value(&self) -> f64 {
        match self {
            Relative::Finite(v) => *v,
            Relative::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for Relative {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Relative::Finite(v) => serializer.serialize_f64(*v),
            Relative::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Relative {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(v) => Ok(Relative::Finite(v)),
            Repr::Text(t) if t == "inf" => Ok(Relative::Infinite),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }
}

/// `κ · ‖(A, b)‖ / ‖g‖`, where `value_norm` is `|x_i|` or `‖x‖`.
///
/// In the b-only regime this is `κ_i(b)·‖b‖/|x_i|`. `b_norm` overrides the
/// norm stored in the solution; one of the two must be present whenever b is
/// perturbed.
pub fn kappa_relative(
    kappa_abs: f64,
    value_norm: f64,
    sol: &LlsSolution,
    w: &NormWeights,
    b_norm: Option<f64>,
) -> Result<Relative> {
    let data = w.data_norm(sol.a_norm(), b_norm.or(sol.b_norm()))?;
    if value_norm == 0.0 {
        return Ok(Relative::Infinite);
    }
    Ok(Relative::Finite(kappa_abs * data / value_norm))
}

/// Relative asymmetry tolerated between σ_b² and the residual MSE.
pub const VARIANCE_CONSISTENCY: f64 = 1e-12;

/// κ_i(A, b) rebuilt from variance-covariance quantities alone, for
/// σ_b² equal to the residual MSE `‖r‖²/(m − n)`:
///
/// ```text
/// κ_i = (1/σ_b) ( ‖C_i‖² (m − n)/α² + c_ii ‖x‖²/α² + c_ii/β² )^½
/// ```
pub fn kappa_component_statistical(
    cov_col: &[f64],
    c_ii: f64,
    sigma_sq: f64,
    sol: &LlsSolution,
    w: &NormWeights,
) -> Result<f64> {
    if cov_col.len() != sol.n() {
        return Err(Error::DimensionMismatch {
            what: "covariance column length",
            expected: sol.n(),
            found: cov_col.len(),
        });
    }
    let expected = sol.residual_mse().ok_or(Error::DegenerateMse { n: sol.n() })?;
    if !(sigma_sq > 0.0) || (sigma_sq - expected).abs() > VARIANCE_CONSISTENCY * expected {
        return Err(Error::InconsistentVariance {
            supplied: sigma_sq,
            expected,
        });
    }
    let dof = (sol.m() - sol.n()) as f64;
    let x2 = sol.x_norm() * sol.x_norm();
    let col_sq = norm2(cov_col).powi(2);
    let ia = w.inv_alpha_sq;
    let inner = col_sq * dof * ia + c_ii * x2 * ia + c_ii * w.inv_beta_sq;
    Ok(inner.sqrt() / sigma_sq.sqrt())
}

/// Which linear functional of the solution is being conditioned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "target", content = "index")]
pub enum Functional {
    Component(usize),
    Solution,
}

impl Functional {
    /// The matrix L with `g = Lᵀx`.
    pub fn l_matrix(&self, n: usize) -> Result<DenseMatrix> {
        match *self {
            Functional::Component(i) if i < n => {
                Ok(DenseMatrix::from_parts(n, 1, unit_vector(n, i)))
            }
            Functional::Component(i) => Err(Error::IndexOutOfRange { index: i, len: n }),
            Functional::Solution => Ok(DenseMatrix::identity(n)),
        }
    }
}

/// Slack on the `√2·f` ceiling for finite-difference noise.
pub const SANDWICH_UPPER_TOLERANCE: f64 = 1e-6;
/// A random search is not expected to find the worst direction; the witness
/// only has to reach this fraction of `f/√3`.
pub const SANDWICH_WITNESS_FACTOR: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichResult {
    pub target: Functional,
    pub f: f64,
    pub samples: usize,
    pub sampled_max: f64,
    /// `f/√3`
    pub lower_bound: f64,
    /// `√2·f`
    pub upper_bound: f64,
    pub upper_ok: bool,
    pub lower_ok: bool,
    pub step: f64,
}

/// Samples spectral-norm directional sensitivities of `Lᵀx(A, b)` and checks
/// them against `f/√3 ≤ κ₂ ≤ √2·f`.
///
/// Each sample draws Gaussian `(E, e)`, normalizes it to
/// `√(‖E‖₂² + ‖e‖²) = 1` and differentiates `g` along `(E/α, e/β)` with a
/// central difference. Directions in an excluded channel are zero.
pub fn sandwich_check(
    a: &DenseMatrix,
    b: &[f64],
    target: Functional,
    w: &NormWeights,
    samples: usize,
    seed: u64,
) -> Result<SandwichResult> {
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    let (m, n) = a.shape();
    let sol = crate::solver::solve_qr(a, b, Some(1.0))?;
    let l = target.l_matrix(n)?;
    let f = f_general(&sol, &l, w)?;
    let g = |a: &DenseMatrix, b: &[f64]| -> Result<Vec<f64>> {
        let (x, _) = householder_qr(a)?.least_squares(b)?;
        Ok(match target {
            Functional::Component(i) => vec![x[i]],
            Functional::Solution => x,
        })
    };

    let data = (a.frobenius_norm().powi(2) + norm2(b).powi(2)).sqrt();
    let step = f64::EPSILON.sqrt() * (1.0 + data);
    let (sa, sb) = (w.inv_alpha_sq.sqrt(), w.inv_beta_sq.sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let upper_bound = std::f64::consts::SQRT_2 * f;
    let lower_bound = f / 3f64.sqrt();
    let mut sampled_max: f64 = 0.0;
    let mut upper_ok = true;

    for _ in 0..samples {
        let (mut e_a, mut e_b) = loop {
            let e_a = if w.perturbs_a() { gaussian_vector(m * n, &mut rng) } else { vec![0.0; m * n] };
            let e_b = if w.perturbs_b() { gaussian_vector(m, &mut rng) } else { vec![0.0; m] };
            let spec = if w.perturbs_a() {
                spectral_norm(&DenseMatrix::from_parts(m, n, e_a.clone()))
            } else {
                0.0
            };
            let nrm = (spec * spec + norm2(&e_b).powi(2)).sqrt();
            if nrm > 0.0 {
                let ea: Vec<f64> = e_a.iter().map(|v| v / nrm).collect();
                let eb: Vec<f64> = e_b.iter().map(|v| v / nrm).collect();
                break (ea, eb);
            }
        };
        e_a.iter_mut().for_each(|v| *v *= sa);
        e_b.iter_mut().for_each(|v| *v *= sb);

        let shifted = |sign: f64| -> Result<Vec<f64>> {
            let ad: Vec<f64> = a.as_slice().iter().zip(&e_a).map(|(x, d)| x + sign * step * d).collect();
            let bd: Vec<f64> = b.iter().zip(&e_b).map(|(x, d)| x + sign * step * d).collect();
            g(&DenseMatrix::from_parts(m, n, ad), &bd)
        };
        let (plus, minus) = (shifted(1.0)?, shifted(-1.0)?);
        let deriv: Vec<f64> = plus.iter().zip(&minus).map(|(p, q)| (p - q) / (2.0 * step)).collect();
        let value = norm2(&deriv);
        sampled_max = sampled_max.max(value);
        if value > upper_bound * (1.0 + SANDWICH_UPPER_TOLERANCE) {
            upper_ok = false;
        }
    }

    Ok(SandwichResult {
        target,
        f,
        samples,
        sampled_max,
        lower_bound,
        upper_bound,
        upper_ok,
        lower_ok: sampled_max >= SANDWICH_WITNESS_FACTOR * lower_bound,
        step,
    })
}

/// `AᵀA + diag(0, …, 0, δ, …, δ)` with δ on positions `start_index..n`.
pub fn kaula_regularize(n_mat: &DenseMatrix, delta: f64, start_index: usize) -> Result<DenseMatrix> {
    if !n_mat.is_square() {
        return Err(Error::InvalidShape {
            rows: n_mat.rows(),
            cols: n_mat.cols(),
            reason: "normal equations matrix must be square",
        });
    }
    if delta.is_nan() || delta < 0.0 || delta.is_infinite() {
        return Err(Error::NegativeDelta(delta));
    }
    let n = n_mat.rows();
    if start_index > n {
        return Err(Error::IndexOutOfRange {
            index: start_index,
            len: n + 1,
        });
    }
    let mut out = n_mat.clone();
    for i in start_index..n {
        out.set(i, i, out.get(i, i) + delta);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentCondition {
    pub index: usize,
    pub kappa_abs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_rel: Option<Relative>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionCondition {
    pub kappa_abs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_rel: Option<Relative>,
    pub method: SolutionMethod,
    /// Guaranteed interval for the exact value, for approximate methods.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub per_component: Vec<ComponentCondition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<SolutionCondition>,
    pub weights: NormWeights,
    pub sigma_sq_used: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentSelection {
    None,
    One(usize),
    All,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRequest {
    pub components: ComponentSelection,
    pub solution: Option<SolutionMethod>,
    pub relative: bool,
    pub b_norm: Option<f64>,
    pub sigma_sq: Option<f64>,
}

impl Default for ReportRequest {
    fn default() -> Self {
        Self {
            components: ComponentSelection::All,
            solution: Some(SolutionMethod::ExactSigmaMin),
            relative: false,
            b_norm: None,
            sigma_sq: None,
        }
    }
}

impl ConditionReport {
    pub fn build(sol: &LlsSolution, w: &NormWeights, req: &ReportRequest) -> Result<Self> {
        let sigma_sq_used = resolve_sigma_sq(sol, req.sigma_sq)?;
        let relative = |kappa: f64, value: f64| -> Result<Option<Relative>> {
            if req.relative {
                kappa_relative(kappa, value, sol, w, req.b_norm).map(Some)
            } else {
                Ok(None)
            }
        };

        let pairs: Vec<(usize, f64)> = match req.components {
            ComponentSelection::None => Vec::new(),
            ComponentSelection::One(i) => vec![(i, kappa_component(sol, i, w)?)],
            ComponentSelection::All => kappa_components(sol, w)?.into_iter().enumerate().collect(),
        };
        let per_component = pairs
            .into_iter()
            .map(|(index, kappa_abs)| {
                Ok(ComponentCondition {
                    index,
                    kappa_abs,
                    kappa_rel: relative(kappa_abs, sol.x()[index].abs())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let solution = match req.solution {
            None => None,
            Some(method) => {
                let kappa_abs = kappa_solution(sol, w, method)?;
                Some(SolutionCondition {
                    kappa_abs,
                    kappa_rel: relative(kappa_abs, sol.x_norm())?,
                    method,
                    bracket: kappa_solution_bracket(sol, w, method)?.map(|(lo, hi)| [lo, hi]),
                })
            }
        };

        Ok(Self {
            per_component,
            solution,
            weights: *w,
            sigma_sq_used,
        })
    }
}
