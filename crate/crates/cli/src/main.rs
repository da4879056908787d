//! `jlab`: classify, decompose and extend operators stored as JSON matrix
//! files, run the worked examples, generate seeded inputs and sweep the
//! property suite.
//!
//! Exit status: 0 ok, 1 a property failed, 2 bad input or parameters,
//! 3 an input gate failed (not J-unitary, not symmetric J-imaginary),
//! 4 the extension is a multivalued relation.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "jlab",
    version,
    about = "Conjugation-structured operators on dense complex matrices"
)]
pub struct Cli {
    /// Also write the JSON run report to this file.
    #[arg(long, global = true, value_name = "FILE")]
    pub report: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct ConjArgs {
    /// Conjugation file (`Jx = C·conj(x)`, C stored as a matrix document).
    #[arg(long, value_name = "FILE")]
    pub conj: Option<PathBuf>,
    /// Entrywise complex conjugation.
    #[arg(long)]
    pub canonical: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Report the residual of every J-class identity for a matrix.
    Classify {
        matrix: PathBuf,
        #[command(flatten)]
        conj: ConjArgs,
    },
    /// Refined polar decomposition A = U·B of a J-unitary matrix.
    Polar {
        matrix: PathBuf,
        #[command(flatten)]
        conj: ConjArgs,
        /// Directory for u.json and b.json.
        #[arg(long, value_name = "DIR", default_value = ".")]
        out_dir: PathBuf,
    },
    /// J-imaginary self-adjoint extension of a partial symmetric operator.
    Extend {
        partial: PathBuf,
        #[command(flatten)]
        conj: ConjArgs,
        /// Total number of pairings to try before giving up.
        #[arg(long, value_name = "K")]
        retries: Option<usize>,
        /// Directory for a_tilde.json and v.json.
        #[arg(long, value_name = "DIR", default_value = ".")]
        out_dir: PathBuf,
    },
    /// Worked operator families.
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
    /// Seeded random inputs, written as files.
    Random {
        #[arg(long, value_enum)]
        kind: RandomKind,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "DIR", default_value = ".")]
        out_dir: PathBuf,
    },
    /// Seeded property sweep over random J-unitary and J-imaginary inputs.
    VerifySuite {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 16)]
        maxdim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Break the inputs of this trial index (harness self-test).
        #[arg(long, value_name = "INDEX")]
        corrupt_trial: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
pub enum Demo {
    /// Block family A₀(1 − 1/k): growth of ((I + A)⁻¹e_k, e_k) as CSV.
    Unbounded {
        #[arg(long)]
        levels: usize,
    },
    /// Imaginary Jacobi operator restricted to the first d coordinates.
    Jacobi {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Comma-separated positive weights; all ones when omitted.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        alphas: Vec<f64>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomKind {
    Conjugation,
    JRealUnitary,
    PositiveJUnitary,
    JUnitary,
    JImaginaryPartial,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    commands::run(cli, argv)
}
