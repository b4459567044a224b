//! Command-line interface: kernel tables, residual reports, identity checks,
//! inversion sweeps and the indicator obstruction.
//!
//! Exit codes are 0 on success, 1 when a tolerance or a numerical step fails
//! and 2 on invalid usage.

mod commands;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use table::{manifest_path, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "kplane", version, about = "Backprojection kernels for the k-plane transform")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Output table; the manifest goes to <OUT>.manifest.json.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Pass/fail tolerance; each command has its own default.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Suppress the summary on stdout.
    #[arg(short, long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Family {
    /// X-ray kernel with the indicator mollifier (k = 1).
    #[value(name = "theoremA")]
    #[serde(rename = "theoremA")]
    TheoremA,
    /// Finite term kernel with the power-tail mollifier.
    #[value(name = "theoremB")]
    #[serde(rename = "theoremB")]
    TheoremB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Psi {
    Indicator,
    PowerTail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhantomArg {
    Gaussian,
    Ball,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineArg {
    Reduced,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// The Abel equation in r.
    Abel,
    /// The Riemann–Liouville form in u = r².
    Fractional,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PairArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    /// Defaults to theoremA for k = 1 and theoremB otherwise.
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Mollifier override; by default the one matching the family.
    #[arg(long, value_enum)]
    pub psi: Option<Psi>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PhantomArgs {
    #[arg(long, value_enum, default_value_t = PhantomArg::Gaussian)]
    pub phantom: PhantomArg,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 1.0)]
    pub height: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
    pub r_min: f64,
    #[arg(long, default_value_t = 20.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 30)]
    pub samples: usize,
    /// Explicit comma-separated r values, replacing the log-spaced grid.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub grid: Option<RealList>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Tabulate w and ψ on a log-spaced grid.
    Kernel {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        grid: KernelGrid,
    },
    /// Both sides of the Abel equation on a grid.
    Residual {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = Form::Abel)]
        form: Form,
        /// Quadrature tolerance.
        #[arg(long, default_value_t = 1e-10)]
        quad_tol: f64,
    },
    /// Backprojection against the convolution f ∗ ψₐ at a list of points.
    Identity {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        phantom: PhantomArgs,
        #[arg(long)]
        a: f64,
        /// A point as comma-separated coordinates; repeatable. Default:
        /// 0, 0.5e₁ and 1.5e₁.
        #[arg(long = "x", value_parser = parse_vector, allow_hyphen_values = true)]
        points: Vec<RealList>,
        #[arg(long, value_enum, default_value_t = EngineArg::Reduced)]
        engine: EngineArg,
        /// Monte Carlo frame samples.
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        /// Quadrature tolerance; defaults to 1e-8 (reduced) or 1e-7 (mc).
        #[arg(long)]
        quad_tol: Option<f64>,
    },
    /// λ⁻¹ W*ₐ f̂(x) along a = a_start·factor^i, i = 0..=steps.
    Invert {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        phantom: PhantomArgs,
        /// Default 0.5e₁.
        #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
        x: Option<RealList>,
        #[arg(long, default_value_t = 1.0)]
        a_start: f64,
        #[arg(long, default_value_t = 0.5)]
        factor: f64,
        #[arg(long, default_value_t = 5)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = EngineArg::Reduced)]
        engine: EngineArg,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long)]
        quad_tol: Option<f64>,
    },
    /// Obstruction constants for the indicator mollifier with k ≥ 2.
    Infeasible {
        /// With --k, a single case; otherwise every 2 ≤ k < n ≤ n-max.
        #[arg(long, requires = "k")]
        n: Option<usize>,
        #[arg(long, requires = "n")]
        k: Option<usize>,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
    },
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KernelGrid {
    #[arg(long, default_value_t = 0.01, allow_hyphen_values = true)]
    pub r_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Explicit comma-separated r values, replacing the log-spaced grid.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub grid: Option<RealList>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Kernel { .. } => "kernel",
            Command::Residual { .. } => "residual",
            Command::Identity { .. } => "identity",
            Command::Invert { .. } => "invert",
            Command::Infeasible { .. } => "infeasible",
        }
    }
}

/// A comma-separated list of reals such as `0.5,0,0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RealList(pub Vec<f64>);

pub fn parse_vector(s: &str) -> Result<RealList, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| format!("invalid number {t:?}: {e}"))
        })
        .collect::<Result<Vec<_>, _>>()
        .and_then(|v| {
            if v.iter().all(|x| x.is_finite()) {
                Ok(RealList(v))
            } else {
                Err("values must be finite".to_string())
            }
        })
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Failure(m) => write!(f, "{m}"),
        }
    }
}

impl From<crate::error::Error> for CliError {
    fn from(e: crate::error::Error) -> Self {
        match e {
            crate::error::Error::Domain(_) | crate::error::Error::Unsupported(_) => CliError::Usage(e.to_string()),
            crate::error::Error::Accuracy { .. } => CliError::Failure(e.to_string()),
        }
    }
}

/// What a completed command reports.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
    pub output: PathBuf,
    pub manifest: PathBuf,
}

/// Runs a parsed command, writing its table and manifest.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    commands::execute(cli)
}

/// Parses `std::env::args`, runs, and maps the result to an exit code.
pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            if !cli.global.quiet {
                println!("{}", outcome.summary);
                println!("wrote {} and {}", outcome.output.display(), outcome.manifest.display());
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("tolerance check failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
