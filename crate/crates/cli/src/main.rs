//! `seqmcm`: maximum-confidence measurements and sequential discrimination
//! chains from the command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod error;
mod input;
mod oracle;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::sweep::{SweepConfig, Vary};
use commands::verify::Suite;
use error::{CliError, CliResult, Exit};
use input::{params_map, parse_list, read_json, ExperimentConfig, Policy, Source};
use output::{Format, Sink};

#[derive(Parser)]
#[command(name = "seqmcm", version, about = "Sequential maximum-confidence measurement simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct EnsembleArgs {
    /// Ensemble JSON file: {"priors": [...], "states": [{"dim", "entries"}]}.
    #[arg(long)]
    ensemble: Option<PathBuf>,
    /// Family name: two_mixed, gu, lifted_gu or mirror.
    #[arg(long)]
    family: Option<String>,
    /// Family parameters as a JSON object. Angles may be strings with a
    /// `deg` suffix.
    #[arg(long)]
    params: Option<String>,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Number of parties R.
    #[arg(long, default_value_t = 1)]
    parties: usize,
    /// Comma-separated inconclusive rates: one for all parties, or one each.
    #[arg(long)]
    eta0: Option<String>,
    #[arg(long = "retarget", value_enum, default_value_t = Policy::Optimal)]
    policy: Policy,
    /// Comma-separated information gains, one per party (two_mixed with
    /// `--retarget explicit`).
    #[arg(long)]
    gains: Option<String>,
    /// JSON file with one pure state per label (`--retarget explicit`).
    #[arg(long)]
    targets: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct OutArgs {
    /// Directory for output files; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum confidences, the optimal measurement and its optimality check.
    Mcm {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        /// Tolerance of the optimality check.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run a chain of parties and write the trace.
    Sequence {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run a family over a parameter grid and tabulate simulator and
    /// closed-form values.
    Sweep {
        /// Family name.
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        params: Option<String>,
        /// Swept parameter: key=start:stop:count or key=v1,v2,...
        #[arg(long)]
        vary: Option<String>,
        /// Comma-separated inconclusive rates, one grid axis.
        #[arg(long)]
        eta0: Option<String>,
        #[arg(long, default_value_t = 1)]
        parties: usize,
        #[arg(long = "retarget", value_enum, default_value_t = Policy::Optimal)]
        policy: Policy,
        /// Confidence threshold for the per-party feasibility columns.
        #[arg(long)]
        threshold: Option<f64>,
        /// Directory for sweep.csv; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run invariant suites and report pass or fail.
    Verify {
        #[arg(value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random instances per check.
        #[arg(long, default_value_t = 500)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a family's closed-form values.
    Family {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        params: Option<String>,
        /// Predict this many parties (needs `--eta0` except for two_mixed).
        #[arg(long)]
        parties: Option<usize>,
        #[arg(long)]
        eta0: Option<String>,
        #[arg(long = "retarget", value_enum, default_value_t = Policy::Optimal)]
        policy: Policy,
        #[arg(long)]
        gains: Option<String>,
        /// Lifted family: party-count bound for this confidence threshold.
        #[arg(long)]
        threshold: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn source(args: &EnsembleArgs) -> CliResult<Source> {
    Source::load(args.ensemble.as_deref(), args.family.as_deref(), args.params.as_deref())
}

fn list(text: &Option<String>) -> CliResult<Option<Vec<f64>>> {
    text.as_deref().map(parse_list).transpose()
}

fn experiment(source: Source, run: &RunArgs) -> CliResult<ExperimentConfig> {
    let targets = run.targets.as_deref().map(read_json).transpose()?;
    ExperimentConfig::new(source, run.parties, list(&run.eta0)?.as_deref(), run.policy, list(&run.gains)?, targets)
}

fn configure_threads() -> CliResult<()> {
    if let Ok(text) = std::env::var("SEQMCM_THREADS") {
        let n: usize = text
            .trim()
            .parse()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| CliError::malformed(format!("SEQMCM_THREADS={text:?} is not a positive integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::malformed(e.to_string()))?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Mcm { ensemble, tol, out } => {
            commands::mcm::run(&source(&ensemble)?, tol, out.format, &Sink::new(out.out.as_deref())?)
        }
        Command::Sequence { ensemble, run, out } => {
            let config = experiment(source(&ensemble)?, &run)?;
            commands::sequence::run(&config, out.format, &Sink::new(out.out.as_deref())?)
        }
        Command::Sweep { family, params, vary, eta0, parties, policy, threshold, out } => {
            let base = params_map(family.as_deref(), params.as_deref())?;
            let config = SweepConfig {
                base,
                vary: vary.as_deref().map(Vary::parse).transpose()?,
                eta0: list(&eta0)?.unwrap_or_default(),
                parties,
                policy,
                threshold,
            };
            if config.parties == 0 {
                return Err(CliError::malformed("--parties must be at least 1"));
            }
            commands::sweep::run(&config, &Sink::new(out.as_deref())?)
        }
        Command::Verify { suite, seed, count, out } => commands::verify::run(suite, seed, count, &Sink::new(out.as_deref())?),
        Command::Family { family, params, parties, eta0, policy, gains, threshold, out } => {
            let spec = input::family_spec(family.as_deref(), params.as_deref())?;
            let config = match parties {
                Some(r) => Some(ExperimentConfig::new(
                    Source::Family(spec),
                    r,
                    list(&eta0)?.as_deref(),
                    policy,
                    list(&gains)?,
                    None,
                )?),
                None if eta0.is_some() => {
                    let rates = list(&eta0)?.unwrap_or_default();
                    Some(ExperimentConfig::new(Source::Family(spec), rates.len(), Some(&rates), policy, None, None)?)
                }
                None => None,
            };
            commands::family::run(spec, config.as_ref(), threshold, out.format, &Sink::new(out.out.as_deref())?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Exit::Malformed as u8 } else { Exit::Ok as u8 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("seqmcm: {}", e.message);
            ExitCode::from(e.exit as u8)
        }
    }
}
