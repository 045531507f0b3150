//! Sensitivity diagnostics for full-rank linear least squares: solutions,
//! variance-covariance quantities and partial condition numbers, with
//! independent oracles to check them.

pub mod conditioning;
pub mod covariance;
pub mod dataset;
pub mod dense;
pub mod error;
pub mod estimate;
pub mod factor;
pub mod oracle;
pub mod solver;
pub mod svd;

pub use conditioning::{
    f_general, kappa_component, kappa_component_statistical, kappa_components, kappa_relative, kappa_solution,
    kappa_solution_bracket, kaula_regularize, sandwich_check, ComponentCondition, ComponentSelection, ConditionReport,
    Functional, NormWeights, Relative, ReportRequest, SandwichResult, SolutionCondition, SolutionMethod,
};
pub use covariance::{
    cov_column, cov_diagonal, cov_full, cov_trace, functional_variance, CovarianceKind, CovarianceResult,
    CovarianceValues,
};
pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use estimate::{inv_norm_estimate, NormKind};
pub use factor::{cholesky_upper, householder_qr, tri_invert, tri_solve, FactorSource, QrFactors, Triangular, UpperTriangular};
pub use solver::{simulate_observations, solve_normal_equations, solve_qr, LlsSolution, MseSource, StatisticalModel};
pub use svd::{singular_values, smallest_singular_value};
