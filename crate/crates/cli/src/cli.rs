use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qdtrap", version, about = "Three-level quantum-dot emission: models, simulation and fits")]
pub struct Cli {
    /// Worker threads for simulation fan-out (0 = all cores). Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean lifetime of a stretched-like decay.
    Lifetime {
        /// 1/r in ns.
        inv_r_ns: f64,
        beta: f64,
        #[arg(long)]
        json: bool,
    },
    /// Run a pulsed or CW photon simulation from a config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides [simulate].output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fit a histogram or correlogram CSV and write a JSON report.
    Fit(FitArgs),
    /// Simulate and fit every (r32_prime, alpha) point of a sweep grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides [sweep].output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Tabulate the correlation function on a lag grid.
    #[command(name = "g2-model")]
    G2Model(G2ModelArgs),
    /// Exact and approximate eigenvalues of the rate matrix.
    Eigen {
        #[command(flatten)]
        rates: RateArgs,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitKind {
    Exponential,
    Stretched,
    G2,
}

impl FitKind {
    pub fn name(self) -> &'static str {
        match self {
            FitKind::Exponential => "exponential",
            FitKind::Stretched => "stretched",
            FitKind::G2 => "g2",
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(value_enum)]
    pub kind: FitKind,
    /// Histogram CSV (exponential, stretched) or correlogram CSV (g2).
    pub input: PathBuf,
    /// Fit range in ns.
    #[arg(long, num_args = 2, value_names = ["LO_NS", "HI_NS"], allow_negative_numbers = true)]
    pub window: Option<Vec<f64>>,
    /// Report path (default: <input>.fit.json).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// g2 only: fit an overall scale factor.
    #[arg(long)]
    pub fit_scale: bool,
    /// g2 only: fit a constant background.
    #[arg(long)]
    pub fit_background: bool,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct RateArgs {
    /// |1>→|2> (ns⁻¹)
    pub r12: f64,
    /// |2>→|1>
    pub r21: f64,
    /// |1>→|3>
    pub r13: f64,
    /// |3>→|1>
    pub r31: f64,
    /// |3>→|2>
    pub r32: f64,
}

#[derive(Debug, Args)]
pub struct G2ModelArgs {
    /// Rates r12 r21 r13 r31 r32 (ns⁻¹); tabulates the exact and approximate curves.
    #[arg(long, num_args = 5, value_names = ["R12", "R21", "R13", "R31", "R32"], conflicts_with_all = ["lambda1", "lambda2", "a"])]
    pub rates: Option<Vec<f64>>,
    #[arg(long, requires_all = ["lambda2", "a"])]
    pub lambda1: Option<f64>,
    #[arg(long, requires_all = ["lambda1", "a"])]
    pub lambda2: Option<f64>,
    /// Bunching amplitude.
    #[arg(long, requires_all = ["lambda1", "lambda2"])]
    pub a: Option<f64>,
    #[arg(long, default_value_t = 1000.0)]
    pub max_lag: f64,
    #[arg(long, default_value_t = 0.5)]
    pub step: f64,
    /// CSV destination (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}
