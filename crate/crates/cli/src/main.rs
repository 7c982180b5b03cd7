mod commands;
mod config;
mod failure;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{ExperimentSpec, FileConfig, FlagParams, FlagSource};
use failure::Failure;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

/// Smooth entropy, resolvability codes and rate formulas for mixed sources.
#[derive(Debug, Parser)]
#[command(name = "resolv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Smooth entropy H_[delta], pivot rank and residual.
    Smooth(CommonArgs),
    /// First- and second-order rates of a mixture of i.i.d. sources.
    Rates(CommonArgs),
    /// Variable-length resolvability code metrics and bounds.
    Code(CommonArgs),
    /// Delta-error fixed-to-variable code metrics.
    Fv(CommonArgs),
    /// Finite-n smooth entropy against the rate formulas over an n sweep.
    Converge(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Explicit distribution, comma separated.
    #[arg(long, value_delimiter = ',')]
    probs: Option<Vec<f64>>,
    /// i.i.d. source: one number p means a binary letter with P(0) = p.
    #[arg(long, value_delimiter = ',')]
    iid: Option<Vec<f64>>,
    /// Mixture component (repeatable), same syntax as --iid.
    #[arg(long = "component")]
    components: Vec<String>,
    /// Mixture weights, comma separated.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Blocklength.
    #[arg(long)]
    n: Option<usize>,
    /// Blocklengths to sweep, comma separated.
    #[arg(long = "n-sweep", value_delimiter = ',')]
    n_sweep: Option<Vec<usize>>,
    /// Distance budgets, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    delta: Option<Vec<f64>>,
    /// Slack parameters of the resolvability code, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    gamma: Option<Vec<f64>>,
    /// Coin alphabet size [default: 2].
    #[arg(long = "K")]
    k: Option<u32>,
    /// Grid step of the per-component allocation oracle [default: 0.001].
    #[arg(long = "grid-step")]
    grid_step: Option<f64>,
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    json: bool,
    /// Append a wall_time_ms column (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
    /// Skip the second-order rate.
    #[arg(long = "first-only")]
    first_only: bool,
}

fn parse_list(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Failure::spec(format!("bad number {s:?} in {text:?}: {e}")))
        })
        .collect()
}

impl CommonArgs {
    fn into_spec(self) -> Result<ExperimentSpec, Failure> {
        let file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let components = self
            .components
            .iter()
            .map(|c| parse_list(c))
            .collect::<Result<Vec<_>, _>>()?;
        let flags = FlagParams {
            source: FlagSource {
                probs: self.probs,
                iid: self.iid,
                components,
                weights: self.weights,
            },
            n: self.n,
            n_sweep: self.n_sweep,
            deltas: self.delta,
            gammas: self.gamma,
            k: self.k,
            grid_step: self.grid_step,
            out: self.out,
            json: self.json,
            timing: self.timing,
            first_only: self.first_only,
        };
        ExperimentSpec::merge(flags, file)
    }
}

type CommandFn = fn(&ExperimentSpec) -> Result<output::Table, Failure>;

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("RESOLV_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| {
            Failure::spec(format!(
                "RESOLV_THREADS must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::spec(format!("cannot configure thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let (args, command): (CommonArgs, CommandFn) = match cli.command {
        Command::Smooth(a) => (a, commands::smooth),
        Command::Rates(a) => (a, commands::rates),
        Command::Code(a) => (a, commands::code),
        Command::Fv(a) => (a, commands::fv),
        Command::Converge(a) => (a, commands::converge),
    };
    let spec = args.into_spec()?;
    let mut table = command(&spec)?;
    if spec.timing {
        table = table.with_timing();
    }
    let text = if spec.json {
        table.to_json()
    } else {
        table.to_csv()
    };
    match &spec.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::spec(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::spec(format!("cannot write to stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{failure}");
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
