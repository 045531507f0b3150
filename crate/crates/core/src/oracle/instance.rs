//! Seeded random test instances.
//!
//! Matrices with a prescribed condition number are assembled as
//! `Q₁ · diag(σ) · Q₂ᵀ` from orthonormal factors obtained by twice-repeated
//! modified Gram–Schmidt on Gaussian matrices, so they do not depend on the
//! Householder code they are used to test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dense::{axpy, dot, norm2, DenseMatrix};
use crate::factor::UpperTriangular;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = rng(seed);
    DenseMatrix::from_parts(rows, cols, gaussian_vector(rows * cols, &mut rng))
}

/// Uniformly distributed unit vector.
pub fn random_unit_vector(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v = gaussian_vector(len, rng);
        let nrm = norm2(&v);
        if nrm > 0.0 {
            return v.into_iter().map(|x| x / nrm).collect();
        }
    }
}

/// `rows × cols` matrix with orthonormal columns (`rows ≥ cols`).
pub fn orthonormal_columns(rows: usize, cols: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    assert!(rows >= cols);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cols);
    while basis.len() < cols {
        let mut v = gaussian_vector(rows, rng);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let nrm = norm2(&v);
        if nrm > 1e-8 {
            basis.push(v.into_iter().map(|x| x / nrm).collect());
        }
    }
    basis
}

/// Tall matrix whose singular values are log-spaced between 1 and
/// `1 / condition`.
pub fn conditioned_matrix(rows: usize, cols: usize, condition: f64, seed: u64) -> DenseMatrix {
    assert!(rows >= cols && cols >= 1 && condition >= 1.0);
    let mut rng = rng(seed);
    let left = orthonormal_columns(rows, cols, &mut rng);
    let right = orthonormal_columns(cols, cols, &mut rng);
    let sigma: Vec<f64> = (0..cols)
        .map(|k| {
            let t = if cols == 1 { 0.0 } else { k as f64 / (cols - 1) as f64 };
            condition.powf(-t)
        })
        .collect();
    let mut data = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            data[i * cols + j] = (0..cols).map(|k| left[k][i] * sigma[k] * right[k][j]).sum();
        }
    }
    DenseMatrix::from_parts(rows, cols, data)
}

/// Upper triangular matrix with diagonal in [1, 2) and off-diagonal entries
/// in [-1, 1).
pub fn random_upper_triangular(n: usize, seed: u64) -> UpperTriangular {
    let mut rng = rng(seed);
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        data[i * n + i] = rng.random_range(1.0..2.0);
        for j in i + 1..n {
            data[i * n + j] = rng.random_range(-1.0..1.0);
        }
    }
    UpperTriangular::new(DenseMatrix::from_parts(n, n, data)).expect("valid triangular factor")
}

/// A least squares instance `(A, b)` with prescribed conditioning and a
/// right-hand side that is not in the range of A.
pub fn random_problem(rows: usize, cols: usize, condition: f64, seed: u64) -> (DenseMatrix, Vec<f64>) {
    let a = conditioned_matrix(rows, cols, condition, seed);
    let mut rng = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let b = gaussian_vector(rows, &mut rng);
    (a, b)
}
