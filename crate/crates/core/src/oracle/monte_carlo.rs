//! Monte Carlo replicates of `b = A x_true + ε` for checking the
//! statistical identities against sample standard deviations.
//!
//! Replicate r draws its noise from a fresh ChaCha stream seeded with
//! `seed + r`, so the output does not depend on the number of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dense::{dot, norm2};
use crate::error::{Error, Result};
use crate::factor::{householder_qr, Triangular, UpperTriangular};
use crate::oracle::instance::random_unit_vector;
use crate::solver::{add_noise, noise_rng, StatisticalModel};

pub const MIN_REPLICATES: usize = 100;

const POWER_ITERATIONS: usize = 1000;

#[derive(Default)]
struct Welford {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, v: f64) {
        self.count += 1.0;
        let delta = v - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (v - self.mean);
    }

    fn std(&self) -> f64 {
        (self.m2 / (self.count - 1.0)).sqrt()
    }
}

/// x̂ for every replicate, in replicate order.
fn replicate_solutions(model: &StatisticalModel, replicates: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if replicates < MIN_REPLICATES {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_REPLICATES} replicates are required, got {replicates}"
        )));
    }
    let factors = householder_qr(model.a())?;
    let mean = model.mean_observations();
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let b = add_noise(&mean, model.sigma_b(), &mut noise_rng(seed.wrapping_add(r)));
            factors.least_squares(&b).map(|(x, _)| x)
        })
        .collect()
}

/// Sample standard deviation of `ℓᵀx̂` for each direction ℓ.
pub fn functional_std(
    model: &StatisticalModel,
    directions: &[Vec<f64>],
    replicates: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let n = model.a().cols();
    for d in directions {
        if d.len() != n {
            return Err(Error::DimensionMismatch {
                what: "direction length",
                expected: n,
                found: d.len(),
            });
        }
    }
    let xs = replicate_solutions(model, replicates, seed)?;
    Ok(directions
        .iter()
        .map(|ell| {
            let mut acc = Welford::default();
            for x in &xs {
                acc.push(dot(ell, x));
            }
            acc.std()
        })
        .collect())
}

/// Sample standard deviation of x̂_i.
pub fn monte_carlo_component_std(model: &StatisticalModel, i: usize, replicates: usize, seed: u64) -> Result<f64> {
    let n = model.a().cols();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    Ok(functional_std(model, &[crate::dense::unit_vector(n, i)], replicates, seed)?[0])
}

/// Unit eigenvector of `(AᵀA)⁻¹ = R⁻¹R⁻ᵀ` for its largest eigenvalue, by
/// power iteration.
pub fn dominant_covariance_direction(r: &UpperTriangular, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    let mut v = random_unit_vector(r.dim(), &mut rng);
    let mut lambda = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let mut w = v.clone();
        r.solve_in_place(&mut w, Triangular::Transposed);
        r.solve_in_place(&mut w, Triangular::Plain);
        let next = dot(&w, &v);
        let nrm = norm2(&w);
        v = w.into_iter().map(|x| x / nrm).collect();
        if (next - lambda).abs() <= 1e-14 * next {
            break;
        }
        lambda = next;
    }
    v
}

/// Largest sample standard deviation of `ℓᵀx̂` over the dominant covariance
/// direction and `directions − 1` further random unit vectors.
pub fn max_functional_std(model: &StatisticalModel, replicates: usize, directions: usize, seed: u64) -> Result<f64> {
    if directions == 0 {
        return Err(Error::InvalidArgument("at least one direction is required".into()));
    }
    let n = model.a().cols();
    let factors = householder_qr(model.a())?;
    let mut ells = vec![dominant_covariance_direction(factors.r(), seed)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    ells.extend((1..directions).map(|_| random_unit_vector(n, &mut rng)));
    let stds = functional_std(model, &ells, replicates, seed)?;
    Ok(stds.into_iter().fold(0.0, f64::max))
}
