//! `numindex`: numerical radii, certificates and index estimates on weighted
//! `l_p` spaces.
//!
//! Exit codes: 0 when every check passes, 1 when a checked inequality fails,
//! 2 on bad input or usage.

mod commands;
mod operator_file;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use numindex_core::Field;

#[derive(Debug, Parser)]
#[command(
    name = "numindex",
    version,
    about = "Numerical radius laboratory for weighted l_p spaces"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Master seed of every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Random restarts per estimate.
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Convergence tolerance (relative objective improvement, or the
    /// accuracy in t for `mp`).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "NUMINDEX_THREADS")]
    pub threads: Option<usize>,
    /// Output format; defaults to csv for `sweep` and json elsewhere.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file (default stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Norm,
    V,
    Absv,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WitnessSource {
    Solve,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Real => Field::Real,
            FieldArg::Complex => Field::Complex,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// M_p and the bounds derived from it.
    Mp {
        #[arg(long = "p", required = true)]
        p: Vec<f64>,
    },
    /// Operator norm, numerical radius and absolute numerical radius.
    Radius {
        /// Operator file.
        spec: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        objective: ObjectiveArg,
    },
    /// Lower-bound certificate for v(T) from a witness of |v|(T).
    Certify {
        /// Operator file (omit with --random).
        spec: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "solve")]
        witness: WitnessSource,
        /// JSON array holding a unit witness, for `--witness file`.
        #[arg(long)]
        witness_file: Option<PathBuf>,
        /// Right end of the t-grid (default max(10, 3 t*)).
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = 512)]
        t_points: usize,
        /// Certify this many random operators instead of a file.
        #[arg(long, conflicts_with = "spec")]
        random: Option<usize>,
        /// Exponent of the random operators (default: cycle 1.3, 1.7, 2.5, 4).
        #[arg(long = "p")]
        p: Option<f64>,
        /// Dimension of the random operators (default: random in 2..=6).
        #[arg(long = "m")]
        m: Option<usize>,
    },
    /// Complexification report: norms, radii and the sign-pattern chain.
    Complexify {
        /// Operator file (real).
        spec: PathBuf,
    },
    /// Upper estimate of the numerical index by operator search.
    Index(IndexArgs),
    /// Index estimates over a grid of exponents and dimensions.
    Sweep {
        #[arg(long = "p", required = true)]
        p: Vec<f64>,
        #[arg(long = "m", required = true)]
        m: Vec<usize>,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, value_enum, default_value = "real")]
        field: FieldArg,
    },
    /// Randomized corpus over every checked inequality.
    Verify {
        /// Small corpus (40 operators).
        #[arg(long)]
        quick: bool,
        /// Override the number of real operators.
        #[arg(long)]
        operators: Option<usize>,
        #[arg(long)]
        lskf_triples: Option<usize>,
        #[arg(long)]
        chain_pairs: Option<usize>,
        #[arg(long)]
        complex_operators: Option<usize>,
        /// Grid resolution of the two-atom oracle.
        #[arg(long)]
        oracle_resolution: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[arg(long = "p")]
    pub p: f64,
    #[arg(long = "m")]
    pub m: usize,
    #[arg(long, value_enum, default_value = "real")]
    pub field: FieldArg,
    /// Comma-separated weights (default all 1).
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Random dense candidates.
    #[arg(long, default_value_t = 256)]
    pub random_candidates: usize,
    /// Random skew candidates.
    #[arg(long, default_value_t = 64)]
    pub skew_candidates: usize,
    /// Candidates refined by descent.
    #[arg(long, default_value_t = 8)]
    pub descent_top: usize,
    #[arg(long, default_value_t = 40)]
    pub descent_steps: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(report) => {
            if let Err(e) = output::emit(cli.global.out.as_deref(), &report.text) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            for note in &report.notes {
                eprintln!("note: {note}");
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: a checked inequality failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
