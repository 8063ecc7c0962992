//! `ftq`: coherent information, qubit bounds and noise thresholds from the command line.
//!
//! Exit status: 0 on success, 2 on invalid input, 3 on numerical failure or an
//! unwritable output path.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "ftq", version, about = "Coherent information and fault-tolerance qubit bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "FTQ_THREADS")]
    threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Maximize the coherent information of N^{(x)g}.
    CoherentInfo {
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Maximize the sandwiched Rényi coherent information of N^{(x)g}.
    RenyiInfo {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Rényi order, > 1.
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Evaluate one closed-form bound.
    Bound {
        #[arg(value_enum)]
        kind: BoundKind,
        #[command(flatten)]
        bound: BoundArgs,
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Locate the noise strength where the optimized coherent information reaches zero.
    Threshold {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value_t = ftq_core::threshold::DEFAULT_TOL_ZERO)]
        tol_zero: f64,
        #[arg(long, default_value_t = ftq_core::threshold::DEFAULT_TOL_PARAM)]
        tol_param: f64,
        /// Use the Rényi coherent information of this order.
        #[arg(long)]
        alpha: Option<f64>,
        /// Search range `lo:hi` (default: the family's range).
        #[arg(long)]
        range: Option<String>,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Coherent information and the qubit bound over a parameter grid.
    Sweep {
        #[command(flatten)]
        channel: ChannelArgs,
        /// `lo:hi:steps`, `steps` evenly spaced points including both ends.
        #[arg(long)]
        grid: String,
        /// Logical qubits for the qubit bound.
        #[arg(long, default_value_t = 100)]
        d: u64,
        #[arg(long, default_value_t = ftq_core::threshold::DEFAULT_TOL_ZERO)]
        tol_zero: f64,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// k / Ic(N^{(x)k}) for k = 1..=k_max.
    CompareCapacity {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value_t = 2)]
        k_max: usize,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
struct ChannelArgs {
    /// depolarizing, dephasing or amplitude_damping.
    #[arg(long)]
    family: Option<String>,
    /// Noise parameter of the family.
    #[arg(long)]
    param: Option<f64>,
    /// JSON channel spec with Kraus operators.
    #[arg(long)]
    channel_file: Option<PathBuf>,
    /// Gate size: the noise acts as N^{(x)g}.
    #[arg(long, default_value_t = 1)]
    g: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
struct OptimizerArgs {
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ranks of the random starting factors, comma separated (default: full rank).
    #[arg(long, value_delimiter = ',')]
    ranks: Vec<usize>,
    /// Central-difference gradients instead of analytic ones.
    #[arg(long)]
    finite_difference: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
struct BoundArgs {
    /// Logical qubits.
    #[arg(long)]
    d: Option<u64>,
    /// Gate count G.
    #[arg(long)]
    gates: Option<u64>,
    /// Target accuracy, in (0, 0.11).
    #[arg(long)]
    eps: Option<f64>,
    /// Inverse-Lipschitz constant L.
    #[arg(long, default_value_t = 1.0)]
    lip: f64,
    /// Rényi order.
    #[arg(long)]
    alpha: Option<f64>,
    /// Coherent information of N^{(x)g} in bits; optimized from the channel flags if absent.
    #[arg(long)]
    ic: Option<f64>,
    /// Per-gate accuracy for the one-shot converse.
    #[arg(long)]
    eps_i: Option<f64>,
    /// Per-gate accuracies, comma separated.
    #[arg(long, value_delimiter = ',')]
    alloc: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Constraint::Halved)]
    constraint: Constraint,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Constraint {
    Halved,
    Plain,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum BoundKind {
    Oneshot,
    Lemma1,
    P1,
    P3,
    Thm1,
    Prop1,
    Corollary1,
    Prop2,
    AppendixD,
    AppendixDDmax,
}

/// A failure with its exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }

    /// Core errors, with the offending flag named where one maps to it.
    pub fn from_core(flag: Option<&str>, err: ftq_core::Error) -> Self {
        let message = match flag {
            Some(f) => format!("{f}: {err}"),
            None => match flag_for(&err) {
                Some(f) => format!("{f}: {err}"),
                None => err.to_string(),
            },
        };
        Self {
            code: if err.is_validation() { 2 } else { 3 },
            message,
        }
    }
}

fn flag_for(err: &ftq_core::Error) -> Option<&'static str> {
    match err {
        ftq_core::Error::OutOfRange { name, .. } => Some(match *name {
            "eps" => "--eps",
            "L" => "--lip",
            "eps*L" => "--eps/--lip",
            "alpha" => "--alpha",
            "Ic" => "--ic",
            "d" => "--d",
            "G" => "--gates",
            "eps_i" => "--eps-i/--alloc",
            "tol_zero" => "--tol-zero",
            "tol_param" => "--tol-param",
            "grid point" => "--grid",
            _ => return None,
        }),
        ftq_core::Error::InfeasibleAllocation { .. } => Some("--alloc"),
        ftq_core::Error::Io { .. } | ftq_core::Error::Parse(_) => Some("--channel-file"),
        _ => None,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::validation("--threads: must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::numerical(format!("--threads: {e}")))?;
    }
    let document = commands::execute(&cli.command, cli.format)?;
    output::write(&document, cli.output.as_deref())
}
