//! The `tdesign` command line. Every subcommand writes CSV tables and a
//! `manifest.txt` into `--out-dir`.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;
mod rbconfig;

pub use rbconfig::RbSimConfig;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(tdesign::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: usage: {m}"),
            CliError::Numerical(e) => write!(f, "error: numerical: {e}"),
            CliError::Io(m) => write!(f, "error: io: {m}"),
        }
    }
}

impl From<tdesign::Error> for CliError {
    fn from(e: tdesign::Error) -> Self {
        match e {
            tdesign::Error::InvalidArgument(m) => CliError::Usage(m),
            other => CliError::Numerical(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "tdesign",
    version,
    about = "Unitary design checks, walk spectral gaps, bounds and RB simulation"
)]
pub struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Directory receiving CSV files and the manifest.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Monte Carlo Haar monomial averages against exact values.
    HaarCheck(HaarCheckArgs),
    /// Design distance and frame potential of a finite group.
    DesignDistance(DesignDistanceArgs),
    /// Spectral gap of the local walk Hamiltonian.
    SpectralGap(SpectralGapArgs),
    /// Randomized benchmarking from a TOML configuration.
    RbSim(RbSimArgs),
    /// Closed-form bound sweeps.
    Bounds(BoundsArgs),
    /// Clifford twirl of random `ρ ↦ AρB` against the closed form.
    TwirlCheck(TwirlCheckArgs),
    /// Simulated circuit fidelities and differences against their bounds.
    CircuitBound(CircuitBoundArgs),
}

#[derive(Args, Debug)]
pub struct HaarCheckArgs {
    /// Dimensions, as `a..b` or `a,b,c`.
    #[arg(long, default_value = "2,4")]
    pub dim: String,
    #[arg(long, default_value = "1..3")]
    pub t: String,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
}

#[derive(Args, Debug)]
pub struct DesignDistanceArgs {
    /// One of clifford1, clifford2, pauli1, pauli2.
    #[arg(long)]
    pub group: String,
    #[arg(long, default_value = "1..2")]
    pub t: String,
}

#[derive(Args, Debug)]
pub struct SpectralGapArgs {
    #[arg(long)]
    pub n: String,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long)]
    pub t: String,
}

#[derive(Args, Debug)]
pub struct RbSimArgs {
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// Minimal sequence size over `n × t`.
    #[arg(long)]
    pub fig1: bool,
    /// One minus the diamond bound over `t`.
    #[arg(long)]
    pub fig2: bool,
    /// Measured walk gaps joined with their lower bounds.
    #[arg(long)]
    pub gaps: bool,
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long)]
    pub t: Option<String>,
}

#[derive(Args, Debug)]
pub struct TwirlCheckArgs {
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value = "1..2")]
    pub t: String,
    #[arg(long, default_value_t = 20)]
    pub pairs: usize,
}

#[derive(Args, Debug)]
pub struct CircuitBoundArgs {
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub rounds: usize,
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Compare gate-dependent against gate-independent noise instead.
    #[arg(long)]
    pub gate_dependent: bool,
}

/// Parses `a..b` (inclusive), `a,b,c` or a single integer.
pub fn parse_range(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("cannot parse range '{s}'"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    let mut out: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let artifacts = match &cli.command {
        Command::HaarCheck(a) => commands::haar_check(cli, a)?,
        Command::DesignDistance(a) => commands::design_distance_cmd(cli, a)?,
        Command::SpectralGap(a) => commands::spectral_gap_cmd(cli, a)?,
        Command::RbSim(a) => commands::rb_sim(cli, a)?,
        Command::Bounds(a) => commands::bounds(cli, a)?,
        Command::TwirlCheck(a) => commands::twirl_check(cli, a)?,
        Command::CircuitBound(a) => commands::circuit_bound(cli, a)?,
    };
    artifacts.write()
}
