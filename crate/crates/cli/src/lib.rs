//! Command-line front end: `solve`, `cov`, `cond` and `validate`, each
//! producing a [`ReportDocument`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lls_sense::conditioning::{
    kappa_component, kappa_solution, sandwich_check, ComponentSelection, ConditionReport, Functional, NormWeights,
    ReportRequest, SolutionMethod, SANDWICH_UPPER_TOLERANCE,
};
use lls_sense::covariance::{CovarianceKind, CovarianceResult};
use lls_sense::dataset::{solar_mass_fraction, JUPITER_DIVISOR, URANUS_DIVISOR};
use lls_sense::dense::unit_vector;
use lls_sense::oracle::{jacobian_kappa, max_functional_std, monte_carlo_component_std, MIN_REPLICATES};
use lls_sense::{DenseMatrix, StatisticalModel};
use thiserror::Error;

pub mod input;
pub mod report;

use input::ProblemArgs;
use report::{MassFractions, OracleKind, ProblemSummary, ReportDocument, ValidationCheck, ValidationReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] lls_sense::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Parse(_) => "Parse",
            CliError::Core(e) => e.name(),
            CliError::Io(_) => "Io",
        }
    }

    /// 3 for numerical failures, 2 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lls-sense", version, about = "Least squares solutions, covariances and condition numbers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the report to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve and summarize.
    Solve(SolveArgs),
    /// Variance-covariance quantities.
    Cov(CovArgs),
    /// Condition numbers.
    Cond(CondArgs),
    /// Compare closed forms with an independent oracle.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Report z₁ and z₀ of the Laplace system as fractions of the solar mass.
    #[arg(long)]
    pub jupiter: bool,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct CovSelect {
    /// Column i of C (zero-based).
    #[arg(long, value_name = "I")]
    pub column: Option<usize>,
    /// Variances c_ii
    #[arg(long)]
    pub diag: bool,
    /// The whole n×n matrix
    #[arg(long)]
    pub full: bool,
    /// trace(C)
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct CovArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub select: CovSelect,
}

fn parse_weight(s: &str) -> Result<f64, String> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    s.parse::<f64>().map_err(|_| format!("expected a positive number or \"inf\", got {s:?}"))
}

#[derive(Debug, Args)]
pub struct WeightArgs {
    /// Weight α on ΔA; "inf" keeps A exact.
    #[arg(long, default_value = "1", value_parser = parse_weight)]
    pub alpha: f64,
    /// Weight β on Δb; "inf" keeps b exact.
    #[arg(long, default_value = "1", value_parser = parse_weight)]
    pub beta: f64,
}

impl WeightArgs {
    pub fn weights(&self) -> Result<NormWeights, CliError> {
        Ok(NormWeights::new(self.alpha, self.beta)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    ExactSigmaMin,
    TraceApprox,
    /// Same as inf-norm-estimate.
    Estimate,
    OneNormEstimate,
    InfNormEstimate,
}

impl From<MethodArg> for SolutionMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::ExactSigmaMin => SolutionMethod::ExactSigmaMin,
            MethodArg::TraceApprox => SolutionMethod::TraceApprox,
            MethodArg::OneNormEstimate => SolutionMethod::OneNormEstimate,
            MethodArg::Estimate | MethodArg::InfNormEstimate => SolutionMethod::InfNormEstimate,
        }
    }
}

#[derive(Debug, Args)]
pub struct CondArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub weights: WeightArgs,
    /// Condition number of x_i (zero-based).
    #[arg(long, value_name = "I", conflicts_with = "all")]
    pub component: Option<usize>,
    /// Every component.
    #[arg(long)]
    pub all: bool,
    /// The whole solution vector.
    #[arg(long)]
    pub solution: bool,
    #[arg(long, value_enum, default_value = "exact-sigma-min")]
    pub method: MethodArg,
    /// Also report relative condition numbers.
    #[arg(long)]
    pub relative: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long, value_enum)]
    pub oracle: OracleKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo replicates.
    #[arg(long, default_value_t = 10_000)]
    pub replicates: usize,
    /// Sampled directions (sandwich: 500, montecarlo: 20).
    #[arg(long)]
    pub samples: Option<usize>,
}

pub fn run(cli: &Cli) -> Result<ReportDocument, CliError> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Cov(a) => cmd_cov(a),
        Command::Cond(a) => cmd_cond(a),
        Command::Validate(a) => cmd_validate(a),
    }
}

fn base_report(command: &str, problem: &ProblemArgs) -> Result<(ReportDocument, input::LoadedProblem, lls_sense::LlsSolution), CliError> {
    let loaded = problem.load()?;
    let sol = loaded.solve(problem)?;
    let doc = ReportDocument::new(command, ProblemSummary::new(loaded.mode(), &loaded.sources, &sol), sol.x().to_vec());
    Ok((doc, loaded, sol))
}

pub fn cmd_solve(args: &SolveArgs) -> Result<ReportDocument, CliError> {
    let (mut doc, _, sol) = base_report("solve", &args.problem)?;
    if args.jupiter {
        if sol.n() < 2 {
            return Err(CliError::Usage("--jupiter needs at least two unknowns".into()));
        }
        doc.mass_fractions = Some(MassFractions {
            jupiter: solar_mass_fraction(sol.x()[1], JUPITER_DIVISOR),
            uranus: solar_mass_fraction(sol.x()[0], URANUS_DIVISOR),
        });
    }
    Ok(doc)
}

pub fn cmd_cov(args: &CovArgs) -> Result<ReportDocument, CliError> {
    let (mut doc, _, sol) = base_report("cov", &args.problem)?;
    let s = &args.select;
    let kind = match (s.column, s.diag, s.full, s.trace) {
        (Some(i), ..) => CovarianceKind::Column(i),
        (_, true, ..) => CovarianceKind::Diagonal,
        (_, _, true, _) => CovarianceKind::Full,
        _ => CovarianceKind::Trace,
    };
    doc.covariance = Some(CovarianceResult::compute(&sol, kind, None)?);
    Ok(doc)
}

pub fn cmd_cond(args: &CondArgs) -> Result<ReportDocument, CliError> {
    let (mut doc, _, sol) = base_report("cond", &args.problem)?;
    let w = args.weights.weights()?;
    let any = args.component.is_some() || args.all || args.solution;
    let components = match (args.component, args.all || !any) {
        (Some(i), _) => ComponentSelection::One(i),
        (None, true) => ComponentSelection::All,
        (None, false) => ComponentSelection::None,
    };
    let req = ReportRequest {
        components,
        solution: (args.solution || !any).then(|| args.method.into()),
        relative: args.relative,
        b_norm: args.problem.bnorm,
        sigma_sq: None,
    };
    doc.condition = Some(ConditionReport::build(&sol, &w, &req)?);
    doc.weights = Some(w);
    Ok(doc)
}

/// Relative agreement demanded of the finite-difference Jacobian.
pub const JACOBIAN_TOLERANCE: f64 = 1e-3;
/// Monte Carlo agreement for per-component standard deviations.
pub const MONTE_CARLO_TOLERANCE: f64 = 0.05;
/// Accepted `max_ℓ std(ℓᵀx̂) / (σ_b κ_LS(b))`.
pub const MAX_FUNCTIONAL_BOUNDS: [f64; 2] = [0.9, 1.05];

pub fn cmd_validate(args: &ValidateArgs) -> Result<ReportDocument, CliError> {
    if args.oracle == OracleKind::Montecarlo && args.replicates < MIN_REPLICATES {
        return Err(CliError::Usage(format!(
            "--replicates must be at least {MIN_REPLICATES}, got {}",
            args.replicates
        )));
    }
    if args.samples == Some(0) {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let (mut doc, loaded, sol) = base_report("validate", &args.problem)?;
    let w = args.weights.weights()?;
    let (a, b) = loaded.dense()?;
    let n = sol.n();
    let mut checks = Vec::new();

    match args.oracle {
        OracleKind::Jacobian => {
            for i in 0..n {
                let l = DenseMatrix::new(n, 1, unit_vector(n, i))?;
                let oracle = jacobian_kappa(a, b, &l, &w)?.sigma_max;
                let formula = kappa_component(&sol, i, &w)?;
                checks.push(ValidationCheck::relative(format!("kappa x[{i}]"), formula, oracle, JACOBIAN_TOLERANCE));
            }
            let oracle = jacobian_kappa(a, b, &DenseMatrix::identity(n), &w)?.sigma_max;
            let formula = kappa_solution(&sol, &w, SolutionMethod::ExactSigmaMin)?;
            checks.push(ValidationCheck::relative("kappa x".into(), formula, oracle, JACOBIAN_TOLERANCE));
        }
        OracleKind::Montecarlo => {
            let sigma_b = sol.mse().sqrt();
            let model = StatisticalModel::new(a.clone(), sol.x().to_vec(), sigma_b)?;
            let b_only = NormWeights::b_only();
            for i in 0..n {
                let oracle = monte_carlo_component_std(&model, i, args.replicates, args.seed)?;
                let formula = sigma_b * kappa_component(&sol, i, &b_only)?;
                checks.push(ValidationCheck::relative(format!("std x[{i}]"), formula, oracle, MONTE_CARLO_TOLERANCE));
            }
            let directions = args.samples.unwrap_or(20);
            let oracle = max_functional_std(&model, args.replicates, directions, args.seed)?;
            let formula = sigma_b * kappa_solution(&sol, &b_only, SolutionMethod::ExactSigmaMin)?;
            checks.push(ValidationCheck::new("max std l'x".into(), formula, oracle, MAX_FUNCTIONAL_BOUNDS));
        }
        OracleKind::Sandwich => {
            let samples = args.samples.unwrap_or(500);
            let targets = (0..n).map(Functional::Component).chain([Functional::Solution]);
            for target in targets {
                let res = sandwich_check(a, b, target, &w, samples, args.seed)?;
                let label = match target {
                    Functional::Component(i) => format!("sandwich x[{i}]"),
                    Functional::Solution => "sandwich x".into(),
                };
                let ceiling = std::f64::consts::SQRT_2 * (1.0 + SANDWICH_UPPER_TOLERANCE);
                checks.push(ValidationCheck::new(label, res.f, res.sampled_max, [0.0, ceiling]));
            }
        }
    }

    doc.validation = Some(ValidationReport {
        oracle: args.oracle,
        passed: checks.iter().all(|c| c.passed),
        checks,
    });
    doc.seed = Some(args.seed);
    doc.weights = Some(w);
    Ok(doc)
}

/// Sizes the global rayon pool from `LLS_SENSE_THREADS`, if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("LLS_SENSE_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("LLS_SENSE_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}
