//! Operator surface: scenario files, single and batched runs, and reports.

mod run;
mod scenario;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use run::{
    batch, load_run, report, run, run_dir_name, simulate, BatchOutput, RunManifest, RunOutput, RunRecord, GAZE_FILE,
    LOG_FILE, MANIFEST_FILE, METRICS_FILE, RUNS_DIR,
};
pub use scenario::{
    ConditionSpec, Furniture, Placement, Pose, ProfileSpec, Scenario, ScenarioConfig, SCENARIO_SCHEMA_VERSION,
};

use crate::metrics::MetricsError;
use crate::orchestrator::{OrchestratorError, Outcome};
use crate::worldsim::WorldError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    ScenarioParse { path: PathBuf, source: serde_json::Error },
    #[error("{}: {source}", path.display())]
    Map { path: PathBuf, source: WorldError },
    #[error("invalid scenario: {0}")]
    ScenarioInvalid(String),
    #[error("unknown condition {name:?}; scenario defines {known:?}")]
    UnknownCondition { name: String, known: Vec<String> },
    #[error("{}: {message}", path.display())]
    LogInvalid { path: PathBuf, message: String },
    #[error("no run logs under {}", .0.display())]
    MissingLogs(PathBuf),
    #[error("every run failed: {0:?}")]
    Partial(Vec<String>),
    #[error("{0}")]
    Usage(String),
    #[error("writing output: {0}")]
    Output(String),
    #[error(transparent)]
    Orchestrator(#[from] OrchestratorError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Parser)]
#[command(name = "assist-sim", version, about = "Assist-as-needed medication guidance simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one seeded episode.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        condition: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run paired seeds under each condition and aggregate.
    Batch {
        #[arg(long)]
        scenario: PathBuf,
        /// Number of seeds, 1..=N. Defaults to the scenario's seed list.
        #[arg(long)]
        seeds: Option<u64>,
        /// Comma-separated condition names. Defaults to all.
        #[arg(long, value_delimiter = ',')]
        conditions: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Questionnaire CSV to include in the report.
        #[arg(long)]
        questionnaires: Option<PathBuf>,
    },
    /// Rebuild the report from stored logs.
    Report {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        questionnaires: Option<PathBuf>,
    },
}

/// Executes a parsed command and returns the process exit code:
/// 0 on success, 2 when a single run does not complete, 1 on error.
pub fn execute(cli: Cli) -> i32 {
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Run { scenario, condition, seed, out } => {
            let s = Scenario::load(&scenario)?;
            let o = run(&s, &condition, seed, &out)?;
            let m = &o.metrics;
            println!(
                "{} seed {}: {:?} at {:.2} s, time to locate {:.2} s{}, {} rounds, log {}",
                condition,
                seed,
                m.outcome,
                m.duration,
                m.time_to_locate,
                if m.censored { " (censored)" } else { "" },
                m.interaction_rounds,
                out.join(&o.dir).join(LOG_FILE).display()
            );
            Ok(if m.outcome == Outcome::Done { 0 } else { 2 })
        }
        Command::Batch { scenario, seeds, conditions, out, questionnaires } => {
            let s = Scenario::load(&scenario)?;
            let seed_list: Vec<u64> = match seeds {
                Some(n) => (1..=n).collect(),
                None => s.config.seeds.clone(),
            };
            let b = batch(&s, &conditions, &seed_list, &out, questionnaires.as_deref())?;
            print!("{}", b.summary);
            if b.manifest.failures.is_empty() {
                Ok(0)
            } else {
                for f in &b.manifest.failures {
                    eprintln!("failed: {f}");
                }
                Ok(1)
            }
        }
        Command::Report { dir, questionnaires } => {
            let b = report(&dir, questionnaires.as_deref())?;
            print!("{}", b.summary);
            Ok(0)
        }
    }
}

/// Parses `std::env::args` and executes.
pub fn main_from_env() -> i32 {
    execute(Cli::parse())
}

