//! `mtf-spectra`: CSV/JSON experiments on the multi-trace symbol calculus.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::CliError;

const THREADS_ENV: &str = "MTF_SPECTRA_THREADS";

#[derive(Parser, Debug)]
#[command(name = "mtf-spectra", version, about = "Spectra, accumulation points, coercivity and GMRes runs for the local multi-trace formulation on the unit sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-mode eigenvalues with distances to the accumulation points.
    Spectrum(RunArgs),
    /// Closed-form accumulation points as JSON.
    Accum(RunArgs),
    /// GMRes residual histories for the preconditioned variants.
    Gmres(RunArgs),
    /// Exact and asymptotic coercivity quotients per mode.
    Coercivity(RunArgs),
    /// Identity checks across all presets.
    Selftest(SelftestArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Preset name (teflon-lf, teflon-hf, teflon-vhf, ferrite-lf, ferrite-hf, ferrite-vhf).
    #[arg(long, conflicts_with = "custom")]
    pub scenario: Option<String>,
    /// key=value file with eps0, mu0, eps1, mu1, kappa0, kappa1.
    #[arg(long, value_name = "FILE")]
    pub custom: Option<PathBuf>,
    /// Operator variant(s); comma separated for gmres.
    #[arg(long, value_delimiter = ',')]
    pub variant: Vec<String>,
    /// Highest mode degree (default: ceil(1.5 * kappa) + 20).
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Apply the normalization of each variant.
    #[arg(long)]
    pub scaled: bool,
    /// Repeat each degree-n block 2n+1 times (gmres).
    #[arg(long)]
    pub multiplicity: bool,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 20)]
    pub restart: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,
    /// Right-hand side model for gmres: mie-like, flat or random.
    #[arg(long, default_value = "mie-like")]
    pub model: String,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct SelftestArgs {
    /// Machine-readable results.
    #[arg(long)]
    pub json: bool,
    #[arg(long, hide = true, value_name = "FAULT")]
    pub inject_fault: Option<String>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure {threads} worker threads: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Spectrum(args) => commands::spectrum(&args),
        Command::Accum(args) => commands::accum(&args),
        Command::Gmres(args) => commands::gmres(&args),
        Command::Coercivity(args) => commands::coercivity(&args),
        Command::Selftest(args) => commands::selftest(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
