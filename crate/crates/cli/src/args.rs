use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "commoninfo", version, about = "Lossy Wyner and Gács-Körner common information on finite alphabets")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Residual tolerance for exact constructions.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol_construction: f64,
    /// Tolerance for information identities and Markov residuals.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_identity: f64,
    /// Tolerance for comparisons that go through an optimizer (bits).
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub tol_solver: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Random restarts of the Wyner solver.
    #[arg(long, global = true, default_value_t = 4)]
    pub restarts: usize,
    /// Cardinality of the Wyner auxiliary (default |Z1|·|Z2|).
    #[arg(long, global = true)]
    pub u_card: Option<usize>,
    /// Iteration cap of the Blahut-Arimoto solver.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropies and (conditional) mutual information of a distribution.
    Info(InfoArgs),
    /// Rate-distortion encoder at a target distortion.
    Rd(RdArgs),
    /// Upper bound on Wyner's lossy common information.
    Wyner(SolverArgs),
    /// Lower bound on Gács-Körner lossy common information.
    Gk(SolverArgs),
    /// Check K ≤ I(Z1;Z2) ≤ C on a source pair.
    Verify(VerifyArgs),
    /// Walk through the equality case on a shared-component source.
    EqualityDemo(EqualityArgs),
    /// Evaluate the three quantities on a grid of distortion targets.
    Sweep(SweepArgs),
    /// Emit a source distribution.
    #[command(subcommand)]
    Gen(GenFamily),
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    #[arg(long)]
    pub dist: PathBuf,
    /// Entropy of a group, e.g. `--entropy X1,X2`.
    #[arg(long)]
    pub entropy: Option<String>,
    /// Mutual information between two groups.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub mi: Option<Vec<String>>,
    /// Conditional mutual information I(A;B|C).
    #[arg(long, num_args = 3, value_names = ["A", "B", "C"])]
    pub cmi: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct RdArgs {
    /// Distribution over one variable, or over (X1, X2) for a joint encoder.
    #[arg(long)]
    pub dist: PathBuf,
    #[arg(long)]
    pub d1: f64,
    #[arg(long)]
    pub d2: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Joint over (X1, X2, Z1, Z2), or over (X1, X2) together with --d1/--d2.
    #[arg(long)]
    pub dist: PathBuf,
    #[arg(long, requires = "d2")]
    pub d1: Option<f64>,
    #[arg(long, requires = "d1")]
    pub d2: Option<f64>,
    /// Feasibility threshold on the Markov residuals.
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Source over (X1, X2).
    #[arg(long)]
    pub dist: PathBuf,
    #[arg(long)]
    pub d1: f64,
    #[arg(long)]
    pub d2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Encoders {
    /// Ẑi = Xi.
    Copy,
    /// Ẑi = W.
    Shared,
    /// Ẑi = (noisy X'i, W) with seeded random noise.
    Noisy,
}

#[derive(Debug, Args)]
pub struct EqualityArgs {
    /// P(W) as comma-separated probabilities.
    #[arg(long, default_value = "0.5,0.5")]
    pub w: String,
    #[arg(long, default_value = "0.5,0.5")]
    pub x1: String,
    #[arg(long, default_value = "0.5,0.5")]
    pub x2: String,
    #[arg(long, value_enum, default_value_t = Encoders::Copy)]
    pub encoders: Encoders,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Source over (X1, X2).
    #[arg(long)]
    pub dist: PathBuf,
    /// Grid `start:stop:count` for D1.
    #[arg(long)]
    pub d1: String,
    /// Grid `start:stop:count` for D2.
    #[arg(long)]
    pub d2: String,
}

#[derive(Debug, Subcommand)]
pub enum GenFamily {
    /// Doubly symmetric binary source.
    Dsbs {
        #[arg(long)]
        p: f64,
    },
    /// X1 = (X'1, W), X2 = (X'2, W) with random component pmfs.
    Shared {
        #[arg(long)]
        w: usize,
        #[arg(long)]
        x1: usize,
        #[arg(long)]
        x2: usize,
    },
    /// Block-diagonal joint with random block masses.
    Blockdiag {
        #[arg(long)]
        blocks: usize,
        #[arg(long)]
        size: usize,
    },
    /// Flat-Dirichlet joint of the given shape.
    Random {
        #[arg(long, num_args = 1.., required = true)]
        shape: Vec<usize>,
    },
}
