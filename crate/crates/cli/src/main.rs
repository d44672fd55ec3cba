use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Relative-intensity squeezing of high-harmonic twin beams.
#[derive(Debug, Parser)]
#[command(name = "twinbeam", version, about)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// TOML configuration; the built-in operating point when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for data files and the run manifest.
    #[arg(long, global = true, default_value = "twinbeam-out")]
    pub output: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads for maps and sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Rescale dipoles so the largest |chi_c| of the base grid equals X.
    #[arg(long, global = true, value_name = "X")]
    pub calibrate_peak_chi: Option<f64>,
    /// Find the peak |chi_c| at which the calibration pair reaches this noise
    /// figure (dB) and calibrate to it.
    #[arg(long, global = true, value_name = "DB", conflicts_with = "calibrate_peak_chi")]
    pub target_snf_db: Option<f64>,
    /// Channel n of the calibration pair for --target-snf-db.
    #[arg(long, global = true, value_name = "N")]
    pub target_channel: Option<u32>,
    /// Add 10*log10 noise-figure columns.
    #[arg(long, global = true)]
    pub db: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Eigen,
    Analytic,
    Ode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variable {
    PumpIntensity,
    CellLength,
    ProbeOrder,
    GasPressure,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Squeezing report for one probe/conjugate pair, or every pair of the grid.
    Pair {
        /// Probe harmonic order (default: config).
        #[arg(long)]
        q: Option<u32>,
        /// Channel n, with conjugate order n - q (default: all channels).
        #[arg(long)]
        n: Option<u32>,
    },
    /// Noise-figure matrix over probe order and conjugate order.
    Map {
        /// Probe orders (default: [map] section).
        #[arg(long, value_delimiter = ',')]
        probe_orders: Option<Vec<u32>>,
    },
    /// One-variable sweep of a pair's noise figure, multimode and two-mode.
    Sweep(SweepArgs),
    /// Output Wigner function on the (x_pr, x_ck) plane through its peak.
    Wigner {
        /// Channel n of the conjugate axis (default: [wigner] section).
        #[arg(long)]
        channel: Option<u32>,
        #[arg(long)]
        half_width: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Per-channel dipoles, susceptibilities and couplings.
    DumpChi,
    /// Propagator T(z) entries.
    DumpTransfer {
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Run the oracle suite; exit status 1 if any check fails.
    Validate {
        /// Multiply every tolerance by this factor.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        /// Perturb one propagator entry by 1e-3 to exercise the failure path.
        #[arg(long)]
        inject_fault: bool,
    },
}

/// Overrides for the [sweep] section.
#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub variable: Option<Variable>,
    #[arg(long)]
    pub start: Option<f64>,
    #[arg(long)]
    pub stop: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub log: bool,
    #[arg(long)]
    pub channel: Option<u32>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Pair { q, n } => commands::pair(&cli.global, q, n),
        Command::Map { probe_orders } => commands::map(&cli.global, probe_orders),
        Command::Sweep(args) => commands::sweep(&cli.global, &args),
        Command::Wigner { channel, half_width, samples } => commands::wigner(&cli.global, channel, half_width, samples),
        Command::DumpChi => commands::dump_chi(&cli.global),
        Command::DumpTransfer { method } => commands::dump_transfer(&cli.global, method),
        Command::Validate { tolerance_scale, inject_fault } => {
            commands::validate(&cli.global, tolerance_scale, inject_fault)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
