//! Problem files: Matrix Market and CSV matrices, plain-text vectors and
//! normal-equations TOML.

use std::fs;
use std::path::{Path, PathBuf};

use lls_sense::dataset::{self, NormalEquationsFile};
use lls_sense::{solve_qr, DenseMatrix, LlsSolution};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixFormat {
    /// Matrix Market if the file starts with `%%MatrixMarket`, CSV otherwise.
    Auto,
    MatrixMarket,
    Csv,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn parse_f64(tok: &str, what: &str) -> Result<f64, CliError> {
    let v: f64 = tok
        .trim()
        .parse()
        .map_err(|_| CliError::Parse(format!("{what}: {tok:?} is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Parse(format!("{what}: {tok:?} is not finite")))
    }
}

fn parse_index(tok: &str, limit: usize, what: &str) -> Result<usize, CliError> {
    match tok.parse::<usize>() {
        Ok(i) if (1..=limit).contains(&i) => Ok(i - 1),
        _ => Err(CliError::Parse(format!("{what}: index {tok:?} outside 1..={limit}"))),
    }
}

/// Matrix Market `array` or `coordinate`, `real`/`integer`, `general` or
/// `symmetric`.
pub fn parse_matrix_market(text: &str) -> Result<DenseMatrix, CliError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("").to_ascii_lowercase();
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(CliError::Parse(format!("bad Matrix Market header {header:?}")));
    }
    let (layout, field, symmetry) = (fields[2], fields[3], fields[4]);
    if !matches!(field, "real" | "integer" | "double") {
        return Err(CliError::Parse(format!("unsupported Matrix Market field {field:?}")));
    }
    let symmetric = match symmetry {
        "general" => false,
        "symmetric" => true,
        other => return Err(CliError::Parse(format!("unsupported Matrix Market symmetry {other:?}"))),
    };

    let mut body = lines.map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('%'));
    let size_line = body.next().ok_or_else(|| CliError::Parse("missing Matrix Market size line".into()))?;
    let size: Vec<&str> = size_line.split_whitespace().collect();
    let dim = |k: usize| -> Result<usize, CliError> {
        size.get(k)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| CliError::Parse(format!("bad Matrix Market size line {size_line:?}")))
    };
    let (rows, cols) = (dim(0)?, dim(1)?);
    if symmetric && rows != cols {
        return Err(CliError::Parse("symmetric Matrix Market matrix must be square".into()));
    }
    let mut data = vec![0.0; rows * cols];

    match layout {
        "array" => {
            if size.len() != 2 {
                return Err(CliError::Parse(format!("bad Matrix Market size line {size_line:?}")));
            }
            // Column-major; symmetric files list the lower triangle only.
            let mut slots = Vec::new();
            for j in 0..cols {
                for i in if symmetric { j..rows } else { 0..rows } {
                    slots.push((i, j));
                }
            }
            let values: Vec<&str> = body.flat_map(str::split_whitespace).collect();
            if values.len() != slots.len() {
                return Err(CliError::Parse(format!(
                    "Matrix Market array expects {} values, found {}",
                    slots.len(),
                    values.len()
                )));
            }
            for ((i, j), tok) in slots.into_iter().zip(values) {
                let v = parse_f64(tok, "Matrix Market entry")?;
                data[i * cols + j] = v;
                if symmetric {
                    data[j * cols + i] = v;
                }
            }
        }
        "coordinate" => {
            let nnz = dim(2)?;
            let mut count = 0;
            for line in body {
                let t: Vec<&str> = line.split_whitespace().collect();
                if t.len() != 3 {
                    return Err(CliError::Parse(format!("bad Matrix Market entry {line:?}")));
                }
                let i = parse_index(t[0], rows, "Matrix Market row")?;
                let j = parse_index(t[1], cols, "Matrix Market column")?;
                let v = parse_f64(t[2], "Matrix Market entry")?;
                data[i * cols + j] = v;
                if symmetric {
                    data[j * cols + i] = v;
                }
                count += 1;
            }
            if count != nnz {
                return Err(CliError::Parse(format!("Matrix Market header promises {nnz} entries, found {count}")));
            }
        }
        other => return Err(CliError::Parse(format!("unsupported Matrix Market layout {other:?}"))),
    }
    DenseMatrix::new(rows, cols, data).map_err(|e| CliError::Parse(e.to_string()))
}

/// Header-free numeric rows, comma separated.
pub fn parse_csv(text: &str) -> Result<DenseMatrix, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Parse(format!("CSV: {e}")))?;
        let row = record
            .iter()
            .map(|tok| parse_f64(tok, &format!("CSV row {}", k + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Parse("CSV: no rows".into()));
    }
    DenseMatrix::from_rows(&rows).map_err(|e| CliError::Parse(format!("CSV: {e}")))
}

pub fn parse_matrix(text: &str, format: MatrixFormat) -> Result<DenseMatrix, CliError> {
    let mm = match format {
        MatrixFormat::Auto => text.trim_start().starts_with("%%MatrixMarket"),
        MatrixFormat::MatrixMarket => true,
        MatrixFormat::Csv => false,
    };
    if mm {
        parse_matrix_market(text)
    } else {
        parse_csv(text)
    }
}

/// One value per line or comma/whitespace separated; a single-column
/// Matrix Market array is accepted too.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, CliError> {
    if text.trim_start().starts_with("%%MatrixMarket") {
        let m = parse_matrix_market(text)?;
        if m.cols() != 1 {
            return Err(CliError::Parse(format!("vector file has {} columns", m.cols())));
        }
        return Ok(m.column(0));
    }
    let values = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|t| !t.is_empty())
        .map(|t| parse_f64(t, "vector entry"))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(CliError::Parse("vector file is empty".into()));
    }
    Ok(values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BundledDataset {
    Laplace,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ProblemArgs {
    /// Design matrix A (Matrix Market or CSV).
    #[arg(long, value_name = "FILE")]
    pub a: Option<PathBuf>,
    /// Observations b.
    #[arg(long, value_name = "FILE")]
    pub b: Option<PathBuf>,
    /// Normal equations as TOML (m, residual_norm_sq, matrix, rhs, optional b_norm).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["a", "b", "ata", "dataset"])]
    pub normal: Option<PathBuf>,
    /// Cross-product matrix AᵀA.
    #[arg(long, value_name = "FILE", requires_all = ["atb", "m", "residual_sq"], conflicts_with_all = ["a", "b", "dataset"])]
    pub ata: Option<PathBuf>,
    /// Right-hand side Aᵀb.
    #[arg(long, value_name = "FILE", requires = "ata")]
    pub atb: Option<PathBuf>,
    /// Number of observations, with --ata.
    #[arg(long, requires = "ata")]
    pub m: Option<usize>,
    /// ‖b − Ax̂‖², with --ata.
    #[arg(long, requires = "ata")]
    pub residual_sq: Option<f64>,
    #[arg(long, value_enum, conflicts_with_all = ["a", "b"])]
    pub dataset: Option<BundledDataset>,
    #[arg(long, value_enum, default_value = "auto")]
    pub format: MatrixFormat,
    /// ‖b‖, needed for relative conditioning of normal-equations input.
    #[arg(long)]
    pub bnorm: Option<f64>,
    /// Noise variance σ_b² in place of the residual MSE.
    #[arg(long)]
    pub sigma2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Dense { a: DenseMatrix, b: Vec<f64> },
    Normal(NormalEquationsFile),
}

#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub problem: Problem,
    pub sources: Vec<String>,
}

impl ProblemArgs {
    pub fn load(&self) -> Result<LoadedProblem, CliError> {
        let show = |p: &Path| p.display().to_string();
        let (problem, sources) = if let Some(ds) = self.dataset {
            match ds {
                BundledDataset::Laplace => (Problem::Normal(dataset::laplace()?), vec!["bundled:laplace".to_string()]),
            }
        } else if let Some(path) = &self.normal {
            let file = NormalEquationsFile::parse(&read(path)?).map_err(|e| CliError::Parse(e.to_string()))?;
            (Problem::Normal(file), vec![show(path)])
        } else if let Some(ata) = &self.ata {
            let atb = self.atb.as_ref().ok_or_else(|| CliError::Usage("--ata needs --atb".into()))?;
            let matrix = parse_matrix(&read(ata)?, self.format)?;
            let rhs = parse_vector(&read(atb)?)?;
            let file = NormalEquationsFile {
                m: self.m.ok_or_else(|| CliError::Usage("--ata needs --m".into()))?,
                residual_norm_sq: self.residual_sq.ok_or_else(|| CliError::Usage("--ata needs --residual-sq".into()))?,
                b_norm: None,
                matrix,
                rhs,
            };
            check_normal(&file)?;
            (Problem::Normal(file), vec![show(ata), show(atb)])
        } else {
            let (Some(a_path), Some(b_path)) = (&self.a, &self.b) else {
                return Err(CliError::Usage(
                    "give --a and --b, --normal, --ata/--atb/--m/--residual-sq, or --dataset".into(),
                ));
            };
            let a = parse_matrix(&read(a_path)?, self.format)?;
            let b = parse_vector(&read(b_path)?)?;
            if b.len() != a.rows() {
                return Err(CliError::Parse(format!("A has {} rows but b has {} entries", a.rows(), b.len())));
            }
            (Problem::Dense { a, b }, vec![show(a_path), show(b_path)])
        };
        Ok(LoadedProblem { problem, sources })
    }
}

/// The checks `NormalEquationsFile::parse` applies to TOML input.
fn check_normal(file: &NormalEquationsFile) -> Result<(), CliError> {
    let n = file.matrix.rows();
    if !file.matrix.is_square() || file.rhs.len() != n {
        return Err(CliError::Parse(format!(
            "AᵀA is {}x{} but Aᵀb has {} entries",
            n,
            file.matrix.cols(),
            file.rhs.len()
        )));
    }
    if file.m <= n {
        return Err(CliError::Parse(format!("m = {} must exceed n = {n}", file.m)));
    }
    Ok(())
}

impl LoadedProblem {
    pub fn mode(&self) -> &'static str {
        match self.problem {
            Problem::Dense { .. } => "dense",
            Problem::Normal(_) => "normal",
        }
    }

    /// Solves, applying `--sigma2` and `--bnorm` overrides.
    pub fn solve(&self, args: &ProblemArgs) -> Result<LlsSolution, CliError> {
        let mut sol = match &self.problem {
            Problem::Dense { a, b } => solve_qr(a, b, args.sigma2)?,
            Problem::Normal(file) => {
                let sol = file.solve()?;
                match args.sigma2 {
                    Some(s) => sol.with_sigma_sq(s)?,
                    None => sol,
                }
            }
        };
        if let Some(bn) = args.bnorm {
            sol = sol.with_b_norm(bn)?;
        }
        Ok(sol)
    }

    pub fn dense(&self) -> Result<(&DenseMatrix, &[f64]), CliError> {
        match &self.problem {
            Problem::Dense { a, b } => Ok((a, b)),
            Problem::Normal(_) => Err(CliError::Usage("this oracle needs the data (A, b), not normal equations".into())),
        }
    }
}
