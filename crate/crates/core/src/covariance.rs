//! Variance-covariance quantities of the least squares estimator,
//! `C = σ_b² (AᵀA)⁻¹ = σ_b² R⁻¹R⁻ᵀ`, evaluated from the triangular factor.
//!
//! Every function takes an optional σ_b²; `None` means the value carried by
//! the solution (normally the MSE).

use serde::{Deserialize, Serialize};

use crate::dense::{norm2, unit_vector, DenseMatrix};
use crate::error::{Error, Result};
use crate::factor::Triangular;
use crate::solver::{validate_sigma_sq, LlsSolution};

pub(crate) fn resolve_sigma_sq(sol: &LlsSolution, sigma_sq: Option<f64>) -> Result<f64> {
    match sigma_sq {
        Some(s) => {
            validate_sigma_sq(s)?;
            Ok(s)
        }
        None => Ok(sol.mse()),
    }
}

fn check_index(sol: &LlsSolution, i: usize) -> Result<()> {
    if i < sol.n() {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index: i, len: sol.n() })
    }
}

/// Column `C_i` from `Rᵀy = e_i`, `Rz = y`; about 2n² flops.
pub fn cov_column(sol: &LlsSolution, i: usize, sigma_sq: Option<f64>) -> Result<Vec<f64>> {
    check_index(sol, i)?;
    let s = resolve_sigma_sq(sol, sigma_sq)?;
    let r = sol.factors().r();
    let mut z = unit_vector(sol.n(), i);
    r.solve_in_place(&mut z, Triangular::Transposed);
    r.solve_in_place(&mut z, Triangular::Plain);
    Ok(z.into_iter().map(|v| s * v).collect())
}

/// All variances `c_ii = σ_b² ‖e_iᵀR⁻¹‖²`, from one triangular inversion.
pub fn cov_diagonal(sol: &LlsSolution, sigma_sq: Option<f64>) -> Result<Vec<f64>> {
    let s = resolve_sigma_sq(sol, sigma_sq)?;
    let inv = sol.factors().r().inverse();
    Ok((0..sol.n()).map(|i| s * norm2(&inv.row(i)[i..]).powi(2)).collect())
}

/// The whole matrix: upper triangle of `σ_b² R⁻¹R⁻ᵀ`, mirrored.
pub fn cov_full(sol: &LlsSolution, sigma_sq: Option<f64>) -> Result<DenseMatrix> {
    let s = resolve_sigma_sq(sol, sigma_sq)?;
    let inv = sol.factors().r().inverse();
    let n = sol.n();
    let mut c = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            // Row i of R⁻¹ is zero before column i, row j before column j ≥ i.
            let v: f64 = (j..n).map(|k| inv.get(i, k) * inv.get(j, k)).sum();
            c.set(i, j, s * v);
            c.set(j, i, s * v);
        }
    }
    Ok(c)
}

/// `tr(C) = σ_b² ‖R⁻¹‖_F²`.
pub fn cov_trace(sol: &LlsSolution, sigma_sq: Option<f64>) -> Result<f64> {
    Ok(cov_diagonal(sol, sigma_sq)?.iter().sum())
}

/// Variance of the linear functional `ℓᵀx̂`, i.e. `ℓᵀCℓ = σ_b² ‖R⁻ᵀℓ‖²`.
pub fn functional_variance(sol: &LlsSolution, ell: &[f64], sigma_sq: Option<f64>) -> Result<f64> {
    let s = resolve_sigma_sq(sol, sigma_sq)?;
    let y = sol.factors().r().solve(ell, Triangular::Transposed)?;
    Ok(s * norm2(&y).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "index")]
pub enum CovarianceKind {
    Column(usize),
    Diagonal,
    Full,
    Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CovarianceValues {
    Scalar(f64),
    Vector(Vec<f64>),
    Matrix(DenseMatrix),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceResult {
    #[serde(flatten)]
    pub kind: CovarianceKind,
    pub values: CovarianceValues,
    pub sigma_sq_used: f64,
}

impl CovarianceResult {
    pub fn compute(sol: &LlsSolution, kind: CovarianceKind, sigma_sq: Option<f64>) -> Result<Self> {
        let sigma_sq_used = resolve_sigma_sq(sol, sigma_sq)?;
        let s = Some(sigma_sq_used);
        let values = match kind {
            CovarianceKind::Column(i) => CovarianceValues::Vector(cov_column(sol, i, s)?),
            CovarianceKind::Diagonal => CovarianceValues::Vector(cov_diagonal(sol, s)?),
            CovarianceKind::Full => CovarianceValues::Matrix(cov_full(sol, s)?),
            CovarianceKind::Trace => CovarianceValues::Scalar(cov_trace(sol, s)?),
        };
        Ok(Self {
            kind,
            values,
            sigma_sq_used,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset;
    use crate::oracle::instance::{random_problem, random_unit_vector, rng};
    use crate::solver::{solve_normal_equations, solve_qr};
    use crate::svd::triangular_sigma_min;

    fn padded_identity(n: usize, extra: usize, sigma_sq: f64) -> LlsSolution {
        let a = DenseMatrix::vstack(&DenseMatrix::identity(n), &DenseMatrix::new(extra, n, vec![0.0; extra * n]).unwrap()).unwrap();
        let b: Vec<f64> = (0..n + extra).map(|i| i as f64 + 1.0).collect();
        solve_qr(&a, &b, Some(sigma_sq)).unwrap()
    }

    fn laplace() -> LlsSolution {
        dataset::laplace().unwrap().solve().unwrap()
    }

    /// Upper triangle printed for the Laplace system, row by row.
    const LAPLACE_COV: [[f64; 6]; 6] = [
        [0.005245, -0.000004, -0.499200, 0.137212, 0.235241, -0.186069],
        [0.0, 0.000004, 0.009873, 0.003302, 0.002779, -0.001235],
        [0.0, 0.0, 71.466023, -5.441882, -16.672689, 14.922752],
        [0.0, 0.0, 0.0, 10.860492, 5.418506, -4.896579],
        [0.0, 0.0, 0.0, 0.0, 66.088476, -28.467391],
        [0.0, 0.0, 0.0, 0.0, 0.0, 15.874809],
    ];

    #[test]
    fn orthonormal_columns_give_scaled_identity() {
        let sol = padded_identity(2, 2, 1.0);
        assert_eq!(cov_column(&sol, 0, None).unwrap(), vec![1.0, 0.0]);
        assert_eq!(cov_column(&sol, 1, None).unwrap(), vec![0.0, 1.0]);
        let sol = padded_identity(3, 1, 2.5);
        assert_eq!(cov_full(&sol, None).unwrap(), DenseMatrix::from_diagonal(&[2.5; 3]));
        assert_eq!(cov_trace(&padded_identity(3, 2, 2.0), None).unwrap(), 6.0);
    }

    #[test]
    fn diagonal_factor() {
        let a = DenseMatrix::from_rows(&[[2.0, 0.0], [0.0, 4.0], [0.0, 0.0]]).unwrap();
        let sol = solve_qr(&a, &[1.0, 1.0, 1.0], Some(1.0)).unwrap();
        assert_eq!(cov_diagonal(&sol, None).unwrap(), vec![0.25, 0.0625]);
    }

    #[test]
    fn two_variable_closed_form() {
        let (a, b) = random_problem(7, 2, 30.0, 17);
        let sol = solve_qr(&a, &b, None).unwrap();
        let g = a.gram();
        let det = g.get(0, 0) * g.get(1, 1) - g.get(0, 1) * g.get(1, 0);
        let s = sol.mse();
        let inv = [[g.get(1, 1) / det, -g.get(0, 1) / det], [-g.get(1, 0) / det, g.get(0, 0) / det]];
        for i in 0..2 {
            let col = cov_column(&sol, i, None).unwrap();
            for j in 0..2 {
                assert!((col[j] - s * inv[j][i]).abs() <= 1e-10 * s * inv[i][i].abs());
            }
        }
    }

    #[test]
    fn laplace_first_column() {
        let col = cov_column(&laplace(), 0, None).unwrap();
        for (got, want) in col.iter().zip(LAPLACE_COV[0]) {
            assert!((got - want).abs() <= 1e-5, "{got} vs {want}");
        }
    }

    #[test]
    fn laplace_jupiter_variance() {
        let d = cov_diagonal(&laplace(), None).unwrap();
        assert!((d[1] - 4.383233e-6).abs() <= 1e-4 * 4.383233e-6, "{}", d[1]);
    }

    #[test]
    fn laplace_full_matrix() {
        let c = cov_full(&laplace(), None).unwrap();
        for i in 0..6 {
            for j in i..6 {
                let (got, want) = (c.get(i, j), LAPLACE_COV[i][j]);
                let ok = (got - want).abs() <= 1e-5 || (got - want).abs() <= 1e-3 * want.abs();
                assert!(ok, "({i},{j}): {got} vs {want}");
            }
        }
        let printed_trace: f64 = (0..6).map(|i| LAPLACE_COV[i][i]).sum();
        let trace = cov_trace(&laplace(), None).unwrap();
        assert!((trace - printed_trace).abs() <= 1e-3 * printed_trace);
    }

    #[test]
    fn full_matrix_is_an_inverse_certificate() {
        let (a, b) = random_problem(7, 3, 50.0, 2);
        let sol = solve_qr(&a, &b, None).unwrap();
        let c = cov_full(&sol, None).unwrap();
        let prod = c.matmul(&a.gram()).unwrap().scale(1.0 / sol.mse());
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((prod.get(i, j) - target).abs() <= 1e-8);
            }
        }
        assert_eq!(c.max_asymmetry(), 0.0);
    }

    #[test]
    fn routes_agree() {
        for seed in 0..5 {
            let (a, b) = random_problem(6, 4, 100.0, seed);
            let sol = solve_qr(&a, &b, None).unwrap();
            let full = cov_full(&sol, None).unwrap();
            let diag = cov_diagonal(&sol, None).unwrap();
            for i in 0..4 {
                assert!((full.get(i, i) - diag[i]).abs() <= 1e-10 * diag[i]);
                let col = cov_column(&sol, i, None).unwrap();
                assert!((col[i] - diag[i]).abs() <= 1e-12 * diag[i]);
                let e = unit_vector(4, i);
                assert!((functional_variance(&sol, &e, None).unwrap() - diag[i]).abs() <= 1e-12 * diag[i]);
            }
            let sum: f64 = full.diagonal().iter().sum();
            assert!((cov_trace(&sol, None).unwrap() - sum).abs() <= 1e-12 * sum);
        }
    }

    #[test]
    fn last_variance_is_cheap() {
        let (a, b) = random_problem(8, 4, 20.0, 6);
        let sol = solve_qr(&a, &b, None).unwrap();
        let rnn = sol.factors().r().matrix().get(3, 3);
        let d = cov_diagonal(&sol, None).unwrap();
        assert!((d[3] - sol.mse() / (rnn * rnn)).abs() <= 1e-14 * d[3]);
    }

    #[test]
    fn functional_variance_bounds() {
        let (a, b) = random_problem(9, 4, 100.0, 8);
        let sol = solve_qr(&a, &b, None).unwrap();
        assert_eq!(functional_variance(&sol, &[0.0; 4], None).unwrap(), 0.0);
        assert!(functional_variance(&sol, &[1.0; 3], None).is_err());
        let s = sol.mse();
        let kappa_ls_b = 1.0 / triangular_sigma_min(sol.factors().r());
        let ceiling = s * kappa_ls_b * kappa_ls_b;
        let mut r = rng(1);
        for _ in 0..1000 {
            let ell = random_unit_vector(4, &mut r);
            let v = functional_variance(&sol, &ell, None).unwrap();
            assert!(v >= 0.0);
            assert!(v <= ceiling + 1e-10);
        }
    }

    #[test]
    fn scaling_is_linear_in_sigma_sq() {
        let (a, b) = random_problem(8, 3, 10.0, 4);
        let sol = solve_qr(&a, &b, None).unwrap();
        let base = cov_full(&sol, Some(1.0)).unwrap();
        let scaled = cov_full(&sol, Some(4.0)).unwrap();
        for (x, y) in base.as_slice().iter().zip(scaled.as_slice()) {
            assert_eq!(4.0 * x, *y);
        }
        assert!(cov_full(&sol, Some(-1.0)).is_err());
    }

    #[test]
    fn index_errors() {
        let sol = padded_identity(2, 1, 1.0);
        assert_eq!(cov_column(&sol, 2, None).unwrap_err(), Error::IndexOutOfRange { index: 2, len: 2 });
    }

    #[test]
    fn normal_equation_route_matches_qr_route() {
        let (a, b) = random_problem(10, 3, 100.0, 3);
        let qr = solve_qr(&a, &b, None).unwrap();
        let ne = solve_normal_equations(&a.gram(), &a.transpose_matvec(&b).unwrap(), 10, qr.residual_norm().powi(2)).unwrap();
        let (c1, c2) = (cov_full(&qr, None).unwrap(), cov_full(&ne, None).unwrap());
        for (x, y) in c1.as_slice().iter().zip(c2.as_slice()) {
            assert!((x - y).abs() <= 1e-8 * c1.max_abs());
        }
    }

    #[test]
    fn result_wrapper_records_sigma() {
        let sol = padded_identity(2, 2, 3.0);
        let res = CovarianceResult::compute(&sol, CovarianceKind::Trace, None).unwrap();
        assert_eq!(res.values, CovarianceValues::Scalar(6.0));
        assert_eq!(res.sigma_sq_used, 3.0);
        let res = CovarianceResult::compute(&sol, CovarianceKind::Column(1), Some(1.0)).unwrap();
        assert_eq!(res.values, CovarianceValues::Vector(vec![0.0, 1.0]));
    }
}
