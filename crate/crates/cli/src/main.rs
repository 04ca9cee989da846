//! Command-line driver: every verification and computation in the library as
//! a reproducible, config-driven run with machine-readable output.
//!
//! Configuration is resolved as flags over JSON config file over defaults,
//! and the fully-resolved values are echoed into every report. Exit code 0
//! means every check in the run passed its threshold, 1 means some check
//! failed, 2 means the run itself could not be carried out.

mod commands;
mod config;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use commands::Outcome;
use config::FileConfig;

#[derive(Parser, Debug)]
#[command(
    name = "rabilab",
    version,
    about = "Numerical laboratory for quantum Rabi/Dicke-family models",
    after_help = "Values resolve as: command-line flag, then JSON config file, then default.\n\
                  Set RABILAB_THREADS to bound the worker-thread count (default: all cores)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the Yang-Baxter equation over seeded random (u, v, eta) draws.
    VerifyYbe,
    /// Check the RTT relation for a monodromy pinned to an integrable point.
    VerifyRtt,
    /// Extract conserved charges from a transfer matrix and score their
    /// commutators.
    Charges,
    /// Diagonalize a model and emit its (optionally parity-resolved)
    /// spectrum.
    Spectrum,
    /// Gap-ratio statistics of a model spectrum or a reference ensemble.
    LevelStats,
    /// Level statistics over a one-parameter grid.
    Sweep,
    /// Charge-search probe along the arc between the two integrable points.
    Probe,
}

/// Every tunable, shared across subcommands; unset flags fall through to the
/// config file and then to per-command defaults.
#[derive(Args, Debug, Default)]
pub struct Flags {
    /// JSON config file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Output format: json (default) or csv (tabular commands only).
    #[arg(long, global = true)]
    pub format: Option<String>,

    /// Model: rabi|jc|dicke|tc|generalized (twist commands: rabi|dicke|generalized).
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Integrable point: delta0|omega0.
    #[arg(long, global = true)]
    pub point: Option<String>,
    /// Use the site-factorised full-tensor monodromy (true|false).
    #[arg(long, global = true)]
    pub factorised: Option<bool>,
    /// Spin representation: collective|full_tensor.
    #[arg(long, global = true)]
    pub rep: Option<String>,

    /// Qubit splitting.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Field frequency.
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    /// Coupling strength.
    #[arg(long, global = true)]
    pub g: Option<f64>,
    /// Parity-breaking drive (generalized model).
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub n_qubits: Option<usize>,
    /// Fock-space truncation.
    #[arg(long, global = true)]
    pub n_max: Option<usize>,

    /// First spectral parameter.
    #[arg(long, global = true)]
    pub u: Option<f64>,
    /// Second spectral parameter.
    #[arg(long, global = true)]
    pub v: Option<f64>,
    /// R-matrix parameter (pinned to omega/g at delta0; free at omega0).
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Twist parameter override (pinned to delta/g at omega0).
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Extended-twist parameter override (pinned to epsilon*eta/g at delta0).
    #[arg(long, global = true)]
    pub b: Option<f64>,
    /// Extended-twist parameter override (pinned to epsilon/(2g) at omega0).
    #[arg(long, global = true)]
    pub c: Option<f64>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of random draws.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Fock states excised at the truncation edge by projected checks.
    #[arg(long, global = true)]
    pub buffer: Option<usize>,
    /// Pass/fail threshold for the command's residuals.
    #[arg(long, global = true)]
    pub threshold: Option<f64>,

    /// Parity sectors to analyze: both|plus|minus|unsectored.
    #[arg(long, global = true)]
    pub sector: Option<String>,
    /// Compute the unfolded spacing histogram (true|false).
    #[arg(long, global = true)]
    pub histogram: Option<bool>,

    /// Probe arc radius.
    #[arg(long, global = true)]
    pub r: Option<f64>,
    /// Probe grid points over [0, pi/2].
    #[arg(long, global = true)]
    pub steps: Option<usize>,

    /// Fraction of levels trimmed at each spectral edge.
    #[arg(long, global = true)]
    pub trim_fraction: Option<f64>,
    /// Width-relative gap below which levels count as degenerate.
    #[arg(long, global = true)]
    pub degeneracy_rel_tol: Option<f64>,
    /// Minimum converged levels required for statistics.
    #[arg(long, global = true)]
    pub min_levels: Option<usize>,
    /// Polynomial degree of the unfolding staircase fit.
    #[arg(long, global = true)]
    pub unfolding_degree: Option<usize>,
    /// Histogram bin count.
    #[arg(long, global = true)]
    pub bins: Option<usize>,
    /// Histogram upper edge in units of the mean spacing.
    #[arg(long, global = true)]
    pub s_max: Option<f64>,

    /// Reference ensemble instead of a model: poisson|goe.
    #[arg(long, global = true)]
    pub ensemble: Option<String>,
    /// Matrix dimension per ensemble draw.
    #[arg(long, global = true)]
    pub dimension: Option<usize>,
    /// Number of ensemble draws.
    #[arg(long, global = true)]
    pub draws: Option<usize>,

    /// Parameter swept over the grid: delta|omega|g|epsilon|n_qubits|n_max.
    #[arg(long, global = true)]
    pub sweep_param: Option<String>,
    /// Comma-separated grid values for --sweep-param.
    #[arg(long, global = true)]
    pub sweep_values: Option<String>,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return 2;
    }
    let file = match load_config(cli.flags.config.as_deref()) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 2;
        }
    };
    let outcome = match dispatch(&cli.command, &cli.flags, &file) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 2;
        }
    };
    if let Err(e) = emit(&cli.flags, &file, &outcome) {
        eprintln!("error: {e:#}");
        return 2;
    }
    if outcome.pass {
        0
    } else {
        1
    }
}

fn dispatch(command: &Command, flags: &Flags, file: &FileConfig) -> Result<Outcome> {
    match command {
        Command::VerifyYbe => commands::cmd_verify_ybe(flags, file),
        Command::VerifyRtt => commands::cmd_verify_rtt(flags, file),
        Command::Charges => commands::cmd_charges(flags, file),
        Command::Spectrum => commands::cmd_spectrum(flags, file),
        Command::LevelStats => commands::cmd_level_stats(flags, file),
        Command::Sweep => commands::cmd_sweep(flags, file),
        Command::Probe => commands::cmd_probe(flags, file),
    }
}

/// One optional environment variable bounds the worker-thread count; the
/// default is machine parallelism (rayon's own default).
fn init_threads() -> Result<()> {
    if let Ok(s) = std::env::var("RABILAB_THREADS") {
        let n: usize = s
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .with_context(|| format!("RABILAB_THREADS must be a positive integer, got `{s}`"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("failed to configure the worker-thread pool")?;
    }
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
}

/// Render the outcome in the requested format and write it to the output
/// path (or stdout). JSON carries the whole report; CSV is the command's
/// table prefixed by provenance comments.
fn emit(flags: &Flags, file: &FileConfig, outcome: &Outcome) -> Result<()> {
    let format = config::pick(flags.format.clone(), file.format.clone(), "json".into());
    let text = match format.as_str() {
        "json" => {
            let mut s = serde_json::to_string_pretty(&outcome.report)?;
            s.push('\n');
            s
        }
        "csv" => match &outcome.csv {
            Some(csv) => csv.clone(),
            None => bail!("this command has no CSV representation; use --format json"),
        },
        other => bail!("unknown format `{other}` (expected json|csv)"),
    };
    let output = config::pick_opt(flags.output.clone(), file.output.clone());
    match output {
        Some(path) => std::fs::write(&path, text)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => {
            use std::io::Write;
            // A closed pipe (e.g. `| head`) is a normal way to stop reading,
            // not an error worth reporting.
            if let Err(e) = std::io::stdout().write_all(text.as_bytes()) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e).context("cannot write to stdout");
                }
            }
        }
    }
    Ok(())
}
