//! `rai-forge`: generate synthetic data, train and evaluate robust ensembles,
//! and rerun the synthetic benchmark tables.
//!
//! Errors go to stderr as a single line, `rai-forge: error[<kind>]: <message>`.
//! Exit status 2 means bad arguments, configuration or input files; 3 means
//! the solver hit a numeric failure.

mod bench;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rai_forge::data::{generate, load_csv, save_csv, SyntheticKind, SyntheticSpec};
use rai_forge::solvers::{solve, SolverConfig};
use rai_forge::{Ensemble64, RaiError, UncertaintySet, UncertaintySetSpec};

#[derive(Parser)]
#[command(name = "rai-forge", version, about = "Robust ensembles from min-max reweighting games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    #[value(name = "I")]
    One,
    #[value(name = "II")]
    Two,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one of the two synthetic datasets to CSV.
    GenData {
        #[arg(long, value_enum)]
        dataset: Which,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train an ensemble from a solver config.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Evaluate a saved ensemble against an uncertainty set.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rerun a synthetic experiment and write the averaged table.
    Bench {
        #[arg(long)]
        experiment: String,
        #[arg(long, default_value_t = 3)]
        seeds: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure reported on stderr and mapped to an exit status.
pub(crate) struct Failure {
    kind: String,
    message: String,
    code: u8,
}

impl From<RaiError> for Failure {
    fn from(e: RaiError) -> Self {
        let code = if matches!(e, RaiError::Numeric(_)) { 3 } else { 2 };
        Failure { kind: e.kind().to_string(), message: e.to_string(), code }
    }
}

impl Failure {
    pub(crate) fn new(kind: &str, message: impl Into<String>, code: u8) -> Self {
        Failure { kind: kind.to_string(), message: message.into(), code }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("rai-forge: error[invalid-args]: {}", one_line(first));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rai-forge: error[{}]: {}", f.kind, one_line(&f.message));
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::GenData { dataset, n, seed, out } => {
            let which = match dataset {
                Which::One => SyntheticKind::DatasetI,
                Which::Two => SyntheticKind::DatasetII,
            };
            let d = generate::<f64>(&SyntheticSpec { which, n, seed })?;
            save_csv(&d, &out)?;
        }
        Command::Train { config, data, out, trace } => {
            let cfg = SolverConfig::load(&config)?;
            let d = load_csv::<f64>(&data)?;
            let (ensemble, tr) = solve(&d, &cfg)?;
            ensemble.save_json(&out)?;
            if let Some(path) = trace {
                tr.save_csv(path)?;
            }
            if let Some(last) = tr.last() {
                println!("train_obj {}", last.train_obj);
            }
        }
        Command::Eval { model, data, set, out } => {
            let ensemble = Ensemble64::load_json(&model)?;
            let d = load_csv::<f64>(&data)?;
            let text = std::fs::read_to_string(&set).map_err(RaiError::from)?;
            let spec: UncertaintySetSpec =
                serde_json::from_str(&text).map_err(|e| RaiError::InvalidSpec(e.to_string()))?;
            let set = UncertaintySet::for_dataset(spec, &d)?;
            let report = ensemble.metrics(&d, &set)?;
            let json = serde_json::to_string_pretty(&report).map_err(RaiError::from)?;
            std::fs::write(&out, json + "\n").map_err(RaiError::from)?;
        }
        Command::Bench { experiment, seeds, out } => bench::run(&experiment, seeds, &out)?,
    }
    Ok(())
}
