//! The condition number as an exact singular value.
//!
//! Scaling the A-entries of a perturbation by α and the b-entries by β maps
//! the product norm onto the Euclidean norm. In those coordinates the
//! derivative of `g = Lᵀx` is the Jacobian with its A-columns divided by α
//! and its b-columns divided by β, and κ is its largest singular value.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditioning::NormWeights;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::factor::householder_qr;
use crate::svd::spectral_norm;

/// Largest `m·n + m` accepted.
pub const DESK_SCALE_LIMIT: usize = 2000;
/// Largest relative change of σ_max allowed when the step is doubled.
pub const STEP_ROBUSTNESS: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianOracleResult {
    pub sigma_max: f64,
    /// `(k, m·n + m)`, the size of the full derivative before any block is
    /// dropped for an infinite weight.
    pub jacobian_dims: (usize, usize),
    /// Base step: per entry the step is `fd_step·(1 + |entry|)`.
    pub fd_step: f64,
    pub l_mat_used: DenseMatrix,
    /// `|σ_max(2h) − σ_max(h)| / σ_max(h)`.
    pub step_deviation: f64,
}

/// Scaled finite-difference Jacobian of `Lᵀx(A, b)`, k × (columns kept).
fn scaled_jacobian(a: &DenseMatrix, b: &[f64], l_mat: &DenseMatrix, w: &NormWeights, base: f64) -> Result<DenseMatrix> {
    let (m, n) = a.shape();
    let k = l_mat.cols();
    let g = |a: &DenseMatrix, b: &[f64]| -> Result<Vec<f64>> {
        let (x, _) = householder_qr(a)?.least_squares(b)?;
        l_mat.transpose_matvec(&x)
    };

    // Column j < m·n perturbs A entry j (row-major); the rest perturb b.
    let mut cols: Vec<(usize, f64)> = Vec::new();
    if w.perturbs_a() {
        cols.extend((0..m * n).map(|j| (j, w.inv_alpha_sq().sqrt())));
    }
    if w.perturbs_b() {
        cols.extend((0..m).map(|j| (m * n + j, w.inv_beta_sq().sqrt())));
    }

    let columns = cols
        .par_iter()
        .map(|&(j, scale)| {
            let diff = |sign: f64, h: f64| -> Result<Vec<f64>> {
                let mut ad = a.as_slice().to_vec();
                let mut bd = b.to_vec();
                if j < m * n {
                    ad[j] += sign * h;
                } else {
                    bd[j - m * n] += sign * h;
                }
                g(&DenseMatrix::from_parts(m, n, ad), &bd)
            };
            let entry = if j < m * n { a.as_slice()[j] } else { b[j - m * n] };
            let h = base * (1.0 + entry.abs());
            let (plus, minus) = (diff(1.0, h)?, diff(-1.0, h)?);
            Ok(plus.iter().zip(&minus).map(|(p, q)| scale * (p - q) / (2.0 * h)).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;

    let width = columns.len();
    let mut data = vec![0.0; k * width];
    for (c, col) in columns.iter().enumerate() {
        for r in 0..k {
            data[r * width + c] = col[r];
        }
    }
    Ok(DenseMatrix::from_parts(k, width, data))
}

/// κ of `g = Lᵀx` under the Frobenius product norm, from an explicit
/// central-difference Jacobian. The instance is rejected with
/// `StepSensitive` if doubling the step moves σ_max by more than 1%.
pub fn jacobian_kappa(a: &DenseMatrix, b: &[f64], l_mat: &DenseMatrix, w: &NormWeights) -> Result<JacobianOracleResult> {
    let (m, n) = a.shape();
    let size = m * n + m;
    if size > DESK_SCALE_LIMIT {
        return Err(Error::ScaleExceeded {
            size,
            limit: DESK_SCALE_LIMIT,
        });
    }
    if b.len() != m {
        return Err(Error::DimensionMismatch {
            what: "right-hand side length",
            expected: m,
            found: b.len(),
        });
    }
    if l_mat.rows() != n {
        return Err(Error::DimensionMismatch {
            what: "rows of L",
            expected: n,
            found: l_mat.rows(),
        });
    }
    // Surface rank deficiency before any differencing.
    householder_qr(a)?;

    let fd_step = f64::EPSILON.sqrt();
    let sigma = |base: f64| -> Result<f64> {
        let j = scaled_jacobian(a, b, l_mat, w, base)?;
        Ok(if j.rows() == 0 || j.cols() == 0 { 0.0 } else { spectral_norm(&j) })
    };
    let sigma_max = sigma(fd_step)?;
    let doubled = sigma(2.0 * fd_step)?;
    let step_deviation = if sigma_max > 0.0 {
        (doubled - sigma_max).abs() / sigma_max
    } else {
        doubled.abs()
    };
    if step_deviation > STEP_ROBUSTNESS {
        return Err(Error::StepSensitive {
            deviation: step_deviation,
        });
    }
    Ok(JacobianOracleResult {
        sigma_max,
        jacobian_dims: (l_mat.cols(), size),
        fd_step,
        l_mat_used: l_mat.clone(),
        step_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditioning::{kappa_component, Functional};
    use crate::oracle::instance::random_problem;
    use crate::solver::solve_qr;

    fn padded_identity() -> DenseMatrix {
        DenseMatrix::vstack(&DenseMatrix::identity(2), &DenseMatrix::new(2, 2, vec![0.0; 4]).unwrap()).unwrap()
    }

    #[test]
    fn orthonormal_columns_b_only() {
        let res = jacobian_kappa(&padded_identity(), &[1.0, 0.0, 0.0, 0.0], &DenseMatrix::identity(2), &NormWeights::b_only()).unwrap();
        assert!((res.sigma_max - 1.0).abs() < 1e-9, "{}", res.sigma_max);
        assert_eq!(res.jacobian_dims, (2, 12));
    }

    #[test]
    fn zero_functional() {
        let (a, b) = random_problem(5, 2, 10.0, 0);
        let l = DenseMatrix::new(2, 1, vec![0.0, 0.0]).unwrap();
        assert_eq!(jacobian_kappa(&a, &b, &l, &NormWeights::unit()).unwrap().sigma_max, 0.0);
    }

    #[test]
    fn matches_closed_form_component() {
        let (a, b) = random_problem(6, 3, 10.0, 42);
        let sol = solve_qr(&a, &b, None).unwrap();
        for w in [NormWeights::unit(), NormWeights::b_only(), NormWeights::a_only()] {
            let l = Functional::Component(2).l_matrix(3).unwrap();
            let res = jacobian_kappa(&a, &b, &l, &w).unwrap();
            let closed = kappa_component(&sol, 2, &w).unwrap();
            assert!((res.sigma_max - closed).abs() <= 1e-6 * closed, "{} vs {closed}", res.sigma_max);
        }
    }

    #[test]
    fn identity_dominates_components() {
        for seed in 0..3 {
            let (a, b) = random_problem(6, 3, 20.0, seed);
            let w = NormWeights::unit();
            let full = jacobian_kappa(&a, &b, &DenseMatrix::identity(3), &w).unwrap().sigma_max;
            for i in 0..3 {
                let l = Functional::Component(i).l_matrix(3).unwrap();
                assert!(full >= jacobian_kappa(&a, &b, &l, &w).unwrap().sigma_max * (1.0 - 1e-9));
            }
        }
    }

    #[test]
    fn rejects_large_and_deficient_inputs() {
        let big = DenseMatrix::new(100, 20, vec![1.0; 2000]).unwrap();
        assert!(matches!(
            jacobian_kappa(&big, &[0.0; 100], &DenseMatrix::identity(20), &NormWeights::unit()),
            Err(Error::ScaleExceeded { .. })
        ));
        let a = DenseMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(
            jacobian_kappa(&a, &[1.0, 2.0, 3.0], &DenseMatrix::identity(2), &NormWeights::unit()),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn deterministic() {
        let (a, b) = random_problem(5, 2, 10.0, 8);
        let l = DenseMatrix::identity(2);
        let r1 = jacobian_kappa(&a, &b, &l, &NormWeights::unit()).unwrap();
        let r2 = jacobian_kappa(&a, &b, &l, &NormWeights::unit()).unwrap();
        assert_eq!(r1.sigma_max.to_bits(), r2.sigma_max.to_bits());
    }
}
