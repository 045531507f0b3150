//! Brute-force validators that share as little code as possible with the
//! closed-form paths: explicit finite-difference Jacobians, Monte Carlo
//! replicates and seeded instance generators.

pub mod instance;
pub mod jacobian;
pub mod monte_carlo;

pub use jacobian::{jacobian_kappa, JacobianOracleResult, DESK_SCALE_LIMIT, STEP_ROBUSTNESS};
pub use monte_carlo::{
    dominant_covariance_direction, functional_std, max_functional_std, monte_carlo_component_std, MIN_REPLICATES,
};
