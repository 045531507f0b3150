//! Normal-equations problem files and the bundled Laplace dataset.
//!
//! A normal-equations file is TOML with the cross-product matrix `AᵀA`, the
//! right-hand side `Aᵀb`, the observation count and `‖b − Ax̂‖²`:
//!
//! ```toml
//! m = 129
//! residual_norm_sq = 31096
//! b_norm = 1234.5            # optional
//! matrix = [[...], [...]]    # n rows of n numbers
//! rhs = [...]
//! ```

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::solver::{solve_normal_equations, LlsSolution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalEquationsFile {
    pub m: usize,
    pub residual_norm_sq: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_norm: Option<f64>,
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
}

impl NormalEquationsFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = toml::from_str(text).map_err(|e| Error::Dataset(e.to_string()))?;
        if !file.matrix.is_square() || file.matrix.rows() != file.rhs.len() {
            return Err(Error::Dataset(format!(
                "matrix is {}x{} but rhs has {} entries",
                file.matrix.rows(),
                file.matrix.cols(),
                file.rhs.len()
            )));
        }
        if file.m <= file.matrix.rows() {
            return Err(Error::Dataset(format!(
                "observation count m = {} must exceed the number of unknowns {}",
                file.m,
                file.matrix.rows()
            )));
        }
        Ok(file)
    }

    pub fn solve(&self) -> Result<LlsSolution> {
        let sol = solve_normal_equations(&self.matrix, &self.rhs, self.m, self.residual_norm_sq)?;
        match self.b_norm {
            Some(b) => sol.with_b_norm(b),
            None => Ok(sol),
        }
    }
}

/// Raw text of the bundled Laplace normal equations.
pub const LAPLACE_TOML: &str = include_str!("../data/laplace.toml");

/// SHA-256 of [`LAPLACE_TOML`].
pub const LAPLACE_SHA256: &str = "fda7c23e7a8586d230ba9f44caf095f4b687879025d196e3760cee65e168fe26";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Loads the bundled Laplace system after checking its content hash.
pub fn laplace() -> Result<NormalEquationsFile> {
    let digest = sha256_hex(LAPLACE_TOML.as_bytes());
    if digest != LAPLACE_SHA256 {
        return Err(Error::Dataset(format!(
            "bundled Laplace dataset hash {digest} does not match {LAPLACE_SHA256}"
        )));
    }
    NormalEquationsFile::parse(LAPLACE_TOML)
}

/// `(1 + z) / divisor` expressed as "one part in N" of the solar mass.
pub fn solar_mass_fraction(z: f64, divisor: f64) -> f64 {
    divisor / (1.0 + z)
}

/// Divisor converting z₁ of the Laplace system into the mass of Jupiter.
pub const JUPITER_DIVISOR: f64 = 1067.09;
/// Divisor converting z₀ of the Laplace system into the mass of Uranus.
pub const URANUS_DIVISOR: f64 = 19504.0;
