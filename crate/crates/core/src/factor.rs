//! Householder QR, upper Cholesky and the triangular kernels on the R factor.
//!
//! Both factorizations produce an upper triangular factor with a strictly
//! positive diagonal, so the R of `A = QR` and the Cholesky factor of `AᵀA`
//! coincide up to rounding.

use serde::{Deserialize, Serialize};

use crate::dense::{axpy, dot, DenseMatrix};
use crate::error::{Error, Result};

/// Which factorization produced the triangular factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorSource {
    QrOfA,
    CholeskyOfNormalEquations,
}

/// Selects `Rᵀ y = rhs` or `R z = rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triangular {
    Transposed,
    Plain,
}

/// Square upper triangular matrix with a positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperTriangular {
    r: DenseMatrix,
}

impl UpperTriangular {
    pub fn new(r: DenseMatrix) -> Result<Self> {
        if !r.is_square() {
            return Err(Error::InvalidShape {
                rows: r.rows(),
                cols: r.cols(),
                reason: "triangular factor must be square",
            });
        }
        if !r.is_upper_triangular() {
            return Err(Error::InvalidArgument(
                "matrix has nonzero entries below the diagonal".into(),
            ));
        }
        if let Some(i) = r.diagonal().iter().position(|&d| d <= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "diagonal entry {i} of the triangular factor is not positive"
            )));
        }
        Ok(Self { r })
    }

    pub fn dim(&self) -> usize {
        self.r.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.r
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.r
    }

    pub fn solve(&self, rhs: &[f64], mode: Triangular) -> Result<Vec<f64>> {
        if rhs.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "right-hand side of triangular solve",
                expected: self.dim(),
                found: rhs.len(),
            });
        }
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x, mode);
        Ok(x)
    }

    pub(crate) fn solve_in_place(&self, x: &mut [f64], mode: Triangular) {
        let n = self.dim();
        match mode {
            Triangular::Plain => {
                for i in (0..n).rev() {
                    let row = self.r.row(i);
                    let s = x[i] - dot(&row[i + 1..], &x[i + 1..]);
                    x[i] = s / row[i];
                }
            }
            Triangular::Transposed => {
                // Leading zeros of the right-hand side stay zero, which is what
                // makes Rᵀy = e_i cost (n-i)² rather than n².
                let start = x.iter().position(|&v| v != 0.0).unwrap_or(n);
                for j in start..n {
                    let row = self.r.row(j);
                    x[j] /= row[j];
                    let xj = x[j];
                    if xj != 0.0 {
                        axpy(-xj, &row[j + 1..], &mut x[j + 1..]);
                    }
                }
            }
        }
    }

    /// Explicit upper triangular inverse, built column by column with the same
    /// back substitution as [`UpperTriangular::solve`]. About n³/3 flops.
    pub fn inverse(&self) -> DenseMatrix {
        let n = self.dim();
        let mut inv = DenseMatrix::zeros(n, n);
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = 0.0);
            col[j] = 1.0;
            let head = &mut col[..=j];
            for i in (0..=j).rev() {
                let row = &self.r.row(i)[..=j];
                let s = head[i] - dot(&row[i + 1..], &head[i + 1..]);
                head[i] = s / row[i];
            }
            for (i, &v) in head.iter().enumerate() {
                inv.set(i, j, v);
            }
        }
        inv
    }
}

/// Householder vectors `v_k` (unit leading entry implied) and scalars
/// `beta_k` such that `H_k = I - beta_k v_k v_kᵀ` and `Qᵀ = H_n ⋯ H_1`.
#[derive(Debug, Clone, PartialEq)]
struct Reflectors {
    /// m×n; column k holds the entries of v_k below position k.
    vectors: DenseMatrix,
    betas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QrFactors {
    r: UpperTriangular,
    reflectors: Option<Reflectors>,
    source: FactorSource,
}

impl QrFactors {
    pub fn r(&self) -> &UpperTriangular {
        &self.r
    }

    pub fn source(&self) -> FactorSource {
        self.source
    }

    pub fn n(&self) -> usize {
        self.r.dim()
    }

    /// Row count of the factored matrix, when the reflectors were kept.
    pub fn m(&self) -> Option<usize> {
        self.reflectors.as_ref().map(|h| h.vectors.rows())
    }

    /// `Qᵀ v` for a vector of length m. Only available for QR of A.
    pub fn apply_qt(&self, v: &[f64]) -> Result<Vec<f64>> {
        let h = self.reflectors_for(v.len())?;
        let mut out = v.to_vec();
        for k in 0..h.betas.len() {
            apply_reflector(&h.vectors, k, h.betas[k], &mut out);
        }
        Ok(out)
    }

    /// `Q v` for a vector of length m. Only available for QR of A.
    pub fn apply_q(&self, v: &[f64]) -> Result<Vec<f64>> {
        let h = self.reflectors_for(v.len())?;
        let mut out = v.to_vec();
        for k in (0..h.betas.len()).rev() {
            apply_reflector(&h.vectors, k, h.betas[k], &mut out);
        }
        Ok(out)
    }

    fn reflectors_for(&self, len: usize) -> Result<&Reflectors> {
        let h = self
            .reflectors
            .as_ref()
            .ok_or(Error::MissingData("orthogonal factor (Cholesky factors carry no Q)"))?;
        if len != h.vectors.rows() {
            return Err(Error::DimensionMismatch {
                what: "vector length for Q application",
                expected: h.vectors.rows(),
                found: len,
            });
        }
        Ok(h)
    }

    /// Solves `min ‖Ax − b‖` from the stored factors and returns
    /// `(x, ‖b − Ax‖)`, the residual norm read off the trailing m−n entries
    /// of `Qᵀb`.
    pub fn least_squares(&self, b: &[f64]) -> Result<(Vec<f64>, f64)> {
        let qtb = self.apply_qt(b)?;
        let n = self.n();
        let residual_norm = crate::dense::norm2(&qtb[n..]);
        let mut x = qtb[..n].to_vec();
        self.r.solve_in_place(&mut x, Triangular::Plain);
        Ok((x, residual_norm))
    }
}

fn apply_reflector(vectors: &DenseMatrix, k: usize, beta: f64, x: &mut [f64]) {
    if beta == 0.0 {
        return;
    }
    let m = vectors.rows();
    let mut s = x[k];
    for i in k + 1..m {
        s += vectors.get(i, k) * x[i];
    }
    let s = beta * s;
    x[k] -= s;
    for i in k + 1..m {
        x[i] -= s * vectors.get(i, k);
    }
}

/// Computes `(v, beta, mu)` with `v[0] = 1` so that
/// `(I − beta v vᵀ) x = mu e_1` and `mu = ‖x‖ ≥ 0`. The leading entry is
/// formed without cancellation when `x[0] > 0`.
fn house(x: &[f64]) -> (Vec<f64>, f64, f64) {
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut v: Vec<f64> = x.to_vec();
    if scale == 0.0 {
        v[0] = 1.0;
        return (v, 0.0, 0.0);
    }
    v.iter_mut().for_each(|e| *e /= scale);
    let x0 = v[0];
    let sigma: f64 = v[1..].iter().map(|e| e * e).sum();
    v[0] = 1.0;
    if sigma == 0.0 {
        return if x0 >= 0.0 {
            (v, 0.0, x0 * scale)
        } else {
            (v, 2.0, -x0 * scale)
        };
    }
    let mu = (x0 * x0 + sigma).sqrt();
    let v0 = if x0 <= 0.0 { x0 - mu } else { -sigma / (x0 + mu) };
    let beta = 2.0 * v0 * v0 / (sigma + v0 * v0);
    v[1..].iter_mut().for_each(|e| *e /= v0);
    (v, beta, mu * scale)
}

/// Householder QR of a tall matrix with the positive-diagonal convention.
///
/// Fails with [`Error::RankDeficient`] when some `R_ii ≤ n·ε·max_j R_jj`.
pub fn householder_qr(a: &DenseMatrix) -> Result<QrFactors> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::InvalidShape {
            rows: m,
            cols: n,
            reason: "least squares needs at least as many rows as columns",
        });
    }
    let mut work = a.clone();
    let mut vectors = DenseMatrix::zeros(m, n);
    let mut betas = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(m);

    for k in 0..n {
        x.clear();
        x.extend((k..m).map(|i| work.get(i, k)));
        let (v, beta, mu) = house(&x);
        for (off, &vi) in v.iter().enumerate().skip(1) {
            vectors.set(k + off, k, vi);
        }
        betas.push(beta);

        work.set(k, k, mu);
        for i in k + 1..m {
            work.set(i, k, 0.0);
        }
        if beta != 0.0 {
            for j in k + 1..n {
                let mut s = 0.0;
                for (off, &vi) in v.iter().enumerate() {
                    s += vi * work.get(k + off, j);
                }
                let s = beta * s;
                for (off, &vi) in v.iter().enumerate() {
                    let i = k + off;
                    work.set(i, j, work.get(i, j) - s * vi);
                }
            }
        }
    }

    let mut r = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            r.set(i, j, work.get(i, j));
        }
    }
    check_rank(&r)?;
    Ok(QrFactors {
        r: UpperTriangular { r },
        reflectors: Some(Reflectors { vectors, betas }),
        source: FactorSource::QrOfA,
    })
}

fn check_rank(r: &DenseMatrix) -> Result<()> {
    let diag = r.diagonal();
    let n = diag.len();
    let largest = diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let tolerance = n as f64 * f64::EPSILON * largest;
    match diag.iter().position(|d| d.abs() <= tolerance) {
        Some(index) => Err(Error::RankDeficient {
            index,
            value: diag[index],
            tolerance,
        }),
        None => Ok(()),
    }
}

/// Relative asymmetry accepted by [`cholesky_upper`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Upper Cholesky factor `U` with `UᵀU = N`, reading the upper triangle of N.
pub fn cholesky_upper(n_mat: &DenseMatrix) -> Result<QrFactors> {
    if !n_mat.is_square() {
        return Err(Error::InvalidShape {
            rows: n_mat.rows(),
            cols: n_mat.cols(),
            reason: "normal equations matrix must be square",
        });
    }
    let scale = n_mat.max_abs();
    let asymmetry = if scale > 0.0 {
        n_mat.max_asymmetry() / scale
    } else {
        0.0
    };
    if asymmetry > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric { asymmetry });
    }

    let n = n_mat.rows();
    let mut u = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = n_mat.get(j, j);
        for k in 0..j {
            pivot -= u.get(k, j) * u.get(k, j);
        }
        if pivot.is_nan() || pivot <= 0.0 {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        let ujj = pivot.sqrt();
        u.set(j, j, ujj);
        for i in j + 1..n {
            let mut s = n_mat.get(j, i);
            for k in 0..j {
                s -= u.get(k, j) * u.get(k, i);
            }
            u.set(j, i, s / ujj);
        }
    }
    Ok(QrFactors {
        r: UpperTriangular { r: u },
        reflectors: None,
        source: FactorSource::CholeskyOfNormalEquations,
    })
}

pub fn tri_solve(r: &UpperTriangular, rhs: &[f64], mode: Triangular) -> Result<Vec<f64>> {
    r.solve(rhs, mode)
}

pub fn tri_invert(r: &UpperTriangular) -> DenseMatrix {
    r.inverse()
}
