//! The JSON report written by every subcommand.
//!
//! Numbers go through serde_json, which prints the shortest decimal that
//! parses back to the same double.

use lls_sense::{ConditionReport, CovarianceResult, LlsSolution, MseSource, NormWeights};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSummary {
    /// `dense` or `normal`.
    pub mode: String,
    pub sources: Vec<String>,
    pub m: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_norm: Option<f64>,
    pub residual_norm: f64,
    pub mse: f64,
    pub mse_source: MseSource,
}

impl ProblemSummary {
    pub fn new(mode: &str, sources: &[String], sol: &LlsSolution) -> Self {
        Self {
            mode: mode.to_string(),
            sources: sources.to_vec(),
            m: sol.m(),
            n: sol.n(),
            b_norm: sol.b_norm(),
            residual_norm: sol.residual_norm(),
            mse: sol.mse(),
            mse_source: sol.mse_source(),
        }
    }
}

/// "One part in N" of the solar mass for the two planets of the Laplace
/// example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassFractions {
    pub jupiter: f64,
    pub uranus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    Jacobian,
    Montecarlo,
    Sandwich,
}

/// One closed-form value set against its oracle. The check passes when
/// `oracle / formula` lies in `bounds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationCheck {
    pub label: String,
    pub formula: f64,
    pub oracle: f64,
    pub ratio: f64,
    pub bounds: [f64; 2],
    pub passed: bool,
}

impl ValidationCheck {
    pub fn new(label: String, formula: f64, oracle: f64, bounds: [f64; 2]) -> Self {
        let ratio = if formula == 0.0 && oracle == 0.0 { 1.0 } else { oracle / formula };
        Self {
            label,
            formula,
            oracle,
            ratio,
            bounds,
            passed: bounds[0] <= ratio && ratio <= bounds[1],
        }
    }

    /// `|oracle/formula − 1| ≤ tolerance`.
    pub fn relative(label: String, formula: f64, oracle: f64, tolerance: f64) -> Self {
        Self::new(label, formula, oracle, [1.0 - tolerance, 1.0 + tolerance])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub oracle: OracleKind,
    pub passed: bool,
    pub checks: Vec<ValidationCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub command: String,
    pub problem: ProblemSummary,
    pub solution: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariance: Option<CovarianceResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<ConditionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_fractions: Option<MassFractions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<NormWeights>,
}

impl ReportDocument {
    pub fn new(command: &str, problem: ProblemSummary, solution: Vec<f64>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            problem,
            solution,
            covariance: None,
            condition: None,
            validation: None,
            mass_fractions: None,
            seed: None,
            weights: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are finite");
        s.push('\n');
        s
    }

    /// False only for a validation report with a failed check.
    pub fn passed(&self) -> bool {
        self.validation.as_ref().is_none_or(|v| v.passed)
    }
}
