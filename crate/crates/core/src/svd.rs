//! One-sided (Hestenes) Jacobi singular values.
//!
//! Plane rotations are applied to pairs of columns until all columns are
//! numerically orthogonal; the singular values are then the column norms.
//! Small singular values come out with high relative accuracy, which is what
//! `‖A†‖ = 1/σ_min` needs.

use crate::dense::{dot, norm2, DenseMatrix};
use crate::error::Result;
use crate::factor::{householder_qr, UpperTriangular};

pub const MAX_SWEEPS: usize = 30;

/// Singular values in descending order. Wide matrices are handled through
/// their transpose.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    let work = if a.rows() >= a.cols() {
        a.clone()
    } else {
        a.transpose()
    };
    let (m, n) = work.shape();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| work.column(j)).collect();
    let tol = (m as f64).sqrt() * f64::EPSILON;

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    singular_values(a)[0]
}

/// Smallest singular value of a triangular factor.
pub fn triangular_sigma_min(r: &UpperTriangular) -> f64 {
    *singular_values(r.matrix()).last().expect("nonempty")
}

/// `σ_min(A) = 1/‖A†‖₂`, computed from the n×n R factor of A.
pub fn smallest_singular_value(a: &DenseMatrix) -> Result<f64> {
    let qr = householder_qr(a)?;
    Ok(triangular_sigma_min(qr.r()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::axpy;
    use crate::error::Error;
    use crate::factor::{Triangular, UpperTriangular};
    use crate::oracle::instance::gaussian_matrix;

    #[test]
    fn padded_diagonal() {
        let a = DenseMatrix::from_rows(&[[3.0, 0.0], [0.0, 7.0], [0.0, 0.0], [0.0, 0.0]]).unwrap();
        assert!((smallest_singular_value(&a).unwrap() - 3.0).abs() < 1e-15);
        assert_eq!(singular_values(&a), vec![7.0, 3.0]);
    }

    #[test]
    fn identity() {
        assert_eq!(smallest_singular_value(&DenseMatrix::identity(4)).unwrap(), 1.0);
    }

    #[test]
    fn wide_input_uses_transpose() {
        let a = DenseMatrix::from_rows(&[[3.0, 0.0, 0.0], [0.0, 4.0, 0.0]]).unwrap();
        assert_eq!(singular_values(&a), vec![4.0, 3.0]);
    }

    #[test]
    fn rank_deficiency_propagates() {
        let a = DenseMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(smallest_singular_value(&a), Err(Error::RankDeficient { .. })));
    }

    /// Power iteration on an explicit Gauss–Jordan inverse of AᵀA; shares no
    /// code with the QR/Jacobi path.
    fn inverse_power_sigma_min(a: &DenseMatrix) -> f64 {
        let g = a.gram();
        let n = g.rows();
        // Explicit inverse of AᵀA by Gauss–Jordan with partial pivoting.
        let mut aug: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut row = g.row(i).to_vec();
                row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
                row
            })
            .collect();
        for c in 0..n {
            let p = (c..n).max_by(|&x, &y| aug[x][c].abs().total_cmp(&aug[y][c].abs())).unwrap();
            aug.swap(c, p);
            let piv = aug[c][c];
            aug[c].iter_mut().for_each(|v| *v /= piv);
            for r in 0..n {
                if r != c {
                    let f = aug[r][c];
                    let src = aug[c].clone();
                    axpy(-f, &src, &mut aug[r]);
                }
            }
        }
        let inv: Vec<Vec<f64>> = aug.iter().map(|r| r[n..].to_vec()).collect();
        let mut v = vec![1.0; n];
        let mut lambda = 0.0;
        for _ in 0..5000 {
            let w: Vec<f64> = inv.iter().map(|r| dot(r, &v)).collect();
            let nrm = norm2(&w);
            let next = dot(&w, &v) / dot(&v, &v);
            v = w.into_iter().map(|x| x / nrm).collect();
            if (next - lambda).abs() <= 1e-15 * next {
                lambda = next;
                break;
            }
            lambda = next;
        }
        1.0 / lambda.sqrt()
    }

    #[test]
    fn matches_inverse_power_iteration() {
        for seed in 0..5 {
            let a = gaussian_matrix(10, 4, seed);
            let jacobi = smallest_singular_value(&a).unwrap();
            let power = inverse_power_sigma_min(&a);
            assert!((jacobi - power).abs() <= 1e-8 * power, "seed {seed}: {jacobi} vs {power}");
        }
    }

    #[test]
    fn triangular_sigma_min_consistent_with_solves() {
        // ‖R⁻¹ v‖ ≤ ‖v‖ / σ_min for any v.
        let r = UpperTriangular::new(DenseMatrix::from_rows(&[[2.0, 1.0], [0.0, 0.5]]).unwrap()).unwrap();
        let smin = triangular_sigma_min(&r);
        for v in [[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]] {
            let z = r.solve(&v, Triangular::Plain).unwrap();
            assert!(norm2(&z) <= (1.0 + 1e-14) / smin);
        }
    }
}
