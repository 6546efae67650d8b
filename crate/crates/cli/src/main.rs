mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "ghz", version, about = "GHZ parallel repetition and Z4 structure experiments")]
pub struct Cli {
    /// Master seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Constant0,
    Constant1,
    ProductConstant1,
    Random,
    /// Cross triple `s + 2ℓ`; only for commands that take cross-functions.
    Planted,
}

#[derive(Args, Debug, Clone)]
pub struct Source {
    /// Strategy file `{n, f, g, h}`.
    #[arg(long, conflicts_with = "family")]
    pub strategy: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Corruption fraction for the planted family.
    #[arg(long, default_value_t = 0.0)]
    pub corruption: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ValueMode {
    Exact,
    Bestresponse,
    Gamevalue,
    Naive,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QuadMethod {
    Histogram,
    Naive,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DecayMode {
    Auto,
    Exact,
    Mc,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Winning probability of a strategy triple, or the game value.
    Value {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ValueMode,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Cross-function tables of a strategy triple and the equivalence check.
    Transform {
        #[command(flatten)]
        source: Source,
        /// Directory for F.json, G.json and H.json.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Check these CrossFn files in place of the derived F, G or H.
        #[arg(long)]
        verify_f: Option<PathBuf>,
        #[arg(long)]
        verify_g: Option<PathBuf>,
        #[arg(long)]
        verify_h: Option<PathBuf>,
        /// Sampled questions above the exhaustive bound.
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
    /// Additive quadruple count of F.
    Quadruples {
        #[command(flatten)]
        source: Source,
        /// CrossFn file.
        #[arg(long, conflicts_with_all = ["strategy", "family"])]
        function: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "histogram")]
        method: QuadMethod,
    },
    /// The full extraction pipeline.
    Extract {
        #[command(flatten)]
        source: Source,
        /// Randomized Freiman check trials.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 64)]
        w_retry_cap: usize,
    },
    /// Largest mass of F in one coset `s + {0,2}ⁿ`.
    ShiftStructure {
        /// Strategy file; F is its transform.
        #[arg(long, conflicts_with_all = ["function", "family"])]
        from_strategy: Option<PathBuf>,
        /// CrossFn file.
        #[arg(long, conflicts_with = "family")]
        function: Option<PathBuf>,
        #[arg(long, value_enum)]
        family: Option<Family>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        corruption: f64,
    },
    /// Value of a strategy family over a range of n.
    Decay {
        #[arg(long, value_enum, default_value = "product-constant1")]
        family: Family,
        #[arg(long, default_value_t = 1)]
        n_min: usize,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[arg(long, value_enum, default_value = "auto")]
        mode: DecayMode,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
}

/// Failure with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_REFUSAL: u8 = 3;
pub const EXIT_ASSERTION: u8 = 4;

impl Failure {
    pub fn validation(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_VALIDATION, message: msg.into() }
    }

    pub fn refusal(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_REFUSAL, message: msg.into() }
    }

    pub fn assertion(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_ASSERTION, message: msg.into() }
    }
}

impl From<ghz_core::Error> for Failure {
    fn from(e: ghz_core::Error) -> Self {
        if e.is_resource_refusal() {
            Failure::refusal(e.to_string())
        } else {
            Failure::validation(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
