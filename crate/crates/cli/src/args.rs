use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exact expected determinants and permanents of random Gram matrices.
#[derive(Debug, Parser)]
#[command(name = "gram-expect", version)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Model file (JSON).
    #[arg(long, global = true, env = "GRAM_EXPECT_MODEL", conflicts_with = "paper")]
    pub model: Option<PathBuf>,

    /// Use the built-in multinomial model (ell = 10, p = [3/8, 1/4, 1/4, 1/8]).
    #[arg(long, global = true, env = "GRAM_EXPECT_PAPER")]
    pub paper: bool,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json, env = "GRAM_EXPECT_OUTPUT")]
    pub output: OutputFormat,

    /// Decimal places used when rendering rationals as decimals.
    #[arg(long, global = true, default_value_t = 2, env = "GRAM_EXPECT_DECIMALS")]
    pub decimals: usize,

    #[arg(long, global = true, default_value_t = 0, env = "GRAM_EXPECT_SEED")]
    pub seed: u64,

    /// Worker thread cap; results do not depend on it.
    #[arg(long, global = true, env = "GRAM_EXPECT_THREADS")]
    pub threads: Option<usize>,

    /// Operation budget for permanental coefficients and brute-force enumeration.
    #[arg(long, global = true, env = "GRAM_EXPECT_GUARD_OPS")]
    pub guard_ops: Option<u64>,

    /// Write the run manifest here instead of stderr.
    #[arg(long, global = true, env = "GRAM_EXPECT_MANIFEST")]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Det,
    Perm,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathArg {
    Recursion,
    Char,
    Egf,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleName {
    /// A^T A of the input matrix.
    Gram,
    DetExpansion,
    PermExpansion,
    Ryser,
    Bareiss,
    /// Sign-adjusted characteristic coefficients b_0..b_n of the input matrix.
    CharPoly,
    /// Sign-adjusted permanental coefficients d_0..d_k of the input matrix.
    PermPoly,
    /// Exhaustive expectation over an atoms model.
    BruteForce,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the second-moment matrix M.
    Moments,
    /// Print t_1..t_N, t_n = trace(M^n).
    Traces {
        #[arg(short = 'n', long = "n", default_value_t = 7)]
        n: usize,
    },
    /// Expected determinants a_0..a_N and/or permanents p_0..p_N.
    Expect {
        #[arg(short = 'n', long = "n", default_value_t = 6)]
        n: usize,
        #[arg(long, value_enum, default_value_t = KindArg::Both)]
        kind: KindArg,
        #[arg(long, value_enum, default_value_t = PathArg::Recursion)]
        path: PathArg,
    },
    /// Run a brute-force oracle.
    Oracle {
        #[arg(value_enum)]
        name: OracleName,
        /// Matrix file (JSON).
        #[arg(long, conflicts_with_all = ["ones", "identity"])]
        matrix: Option<PathBuf>,
        /// Use the n x n all-ones matrix.
        #[arg(long, conflicts_with = "identity")]
        ones: Option<usize>,
        /// Use the n x n identity.
        #[arg(long)]
        identity: Option<usize>,
        /// Sample size for brute-force.
        #[arg(short = 'n', long = "n", default_value_t = 2)]
        n: usize,
        #[arg(long, value_enum, default_value_t = KindArg::Det)]
        kind: KindArg,
        /// Largest coefficient index for perm-poly (defaults to the matrix size).
        #[arg(long)]
        max_index: Option<usize>,
    },
    /// Monte Carlo comparison of sampled coefficients with their expectations.
    Simulate {
        #[arg(short = 'n', long = "n", default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, default_value_t = 4)]
        max_index: usize,
        #[arg(long, value_enum, default_value_t = KindArg::Det)]
        kind: KindArg,
        /// Largest n for exact determinant coefficients; larger runs use f64.
        #[arg(long, default_value_t = 1000)]
        exact_limit: usize,
        /// Directory for per-replicate CSV files (<kind>_samples.csv).
        #[arg(long)]
        csv_dir: Option<PathBuf>,
    },
    /// Normalized standard deviation of one coefficient across sample sizes.
    Trend {
        #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, default_value_t = 2)]
        index: usize,
        #[arg(long, value_enum, default_value_t = KindArg::Det)]
        kind: KindArg,
    },
    /// Print the model in canonical file form.
    Model,
}
