mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use gramlax::Tolerances;

use crate::output::Format;

#[derive(Parser, Debug)]
#[command(name = "gramlax", version, about = "Alignment, duality and rank-2 certificates for near-orthogonal line packings")]
struct Cli {
    /// Output format [default: csv for `table`, json otherwise].
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    #[command(flatten)]
    tol: TolArgs,

    /// Print timings to stderr.
    #[arg(long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct TolArgs {
    /// Certificate residual threshold.
    #[arg(long, env = "GRAMLAX_TOL", global = true)]
    residual_tol: Option<f64>,
    #[arg(long, global = true)]
    rank_tol: Option<f64>,
    #[arg(long, global = true)]
    lp_pivot_tol: Option<f64>,
    #[arg(long, global = true)]
    psd_tol: Option<f64>,
}

impl TolArgs {
    fn resolve(&self) -> Result<Tolerances, Failure> {
        let mut t = Tolerances::default();
        if let Some(v) = self.residual_tol {
            t.residual_tol = v;
        }
        if let Some(v) = self.rank_tol {
            t.rank_tol = v;
        }
        if let Some(v) = self.lp_pivot_tol {
            t.lp_pivot_tol = v;
        }
        if let Some(v) = self.psd_tol {
            t.psd_tol = v;
        }
        t.validate().map_err(Failure::from)?;
        Ok(t)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Alignment of a subspace, per index with witnesses.
    Align {
        #[arg(long)]
        subspace: PathBuf,
        /// Only this (1-based) index.
        #[arg(long)]
        index: Option<usize>,
    },
    /// The alpha table of a point configuration.
    Alpha {
        #[arg(long)]
        config: PathBuf,
        /// Dump the hull of the other points and their negatives for this
        /// (1-based) index instead, as JSON vertices.
        #[arg(long, value_name = "INDEX")]
        emit_polygon: Option<usize>,
    },
    /// Certificate matrix annihilating a subspace.
    Dualize {
        #[arg(long)]
        subspace: PathBuf,
    },
    /// The rank-2 construction on the regular configuration of N lines.
    Rank2 {
        #[arg(long)]
        n: usize,
    },
    /// Search for a low-alignment configuration.
    Solve {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_iters: Option<usize>,
        /// Also write the best-so-far history as CSV.
        #[arg(long)]
        history_csv: Option<PathBuf>,
    },
    /// Re-check a certificate from its raw matrix.
    Verify {
        #[arg(long)]
        certificate: PathBuf,
        /// Also require a symmetric PSD Gram matrix of unit vectors.
        #[arg(long)]
        theta: bool,
    },
    /// Search results against the exact planar value for a range of N.
    Table {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        n_from: usize,
        #[arg(long)]
        n_to: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// The Welch lower bound.
    Welch {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
    },
}

/// How a run ended, and its exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable or malformed files, out-of-domain values.
    Input(String),
    /// The computation ran but something it checks did not hold.
    Verification(String),
    /// A numerical routine reported an impossible state.
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Verification(_) | Failure::Internal(_) => 1,
        }
    }
}

impl From<gramlax::Error> for Failure {
    fn from(e: gramlax::Error) -> Self {
        match e.root() {
            gramlax::Error::Internal(_) => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "error: {m}"),
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
            Failure::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(&cli);
    if cli.verbose {
        eprintln!("elapsed: {:?}", start.elapsed());
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let tol = cli.tol.resolve()?;
    let done = commands::dispatch(&cli.command, &tol)?;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let format = cli.format.unwrap_or(match cli.command {
        Command::Table { .. } => Format::Csv,
        _ => Format::Json,
    });
    done.output.write(format, &mut lock).map_err(Failure::Input)?;
    lock.flush().ok();
    match done.failure {
        Some(msg) => Err(Failure::Verification(msg)),
        None => Ok(()),
    }
}
