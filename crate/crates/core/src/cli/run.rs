use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::scenario::Scenario;
use super::CliError;
use crate::metrics::{
    aggregate, read_questionnaires, session_metrics, summary_text, write_report_csv, MetricsReport, QuestionnaireRow,
    SessionMetrics,
};
use crate::orchestrator::{run_episode, Episode, EpisodeMeta, RuleBackend, SessionLog, World};
use crate::usersim::{read_gaze_csv, write_gaze_csv, GAZE_DT};

pub const LOG_FILE: &str = "log.jsonl";
pub const GAZE_FILE: &str = "gaze.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RUNS_DIR: &str = "runs";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub condition: String,
    pub seed: u64,
    /// Relative to the output directory.
    pub dir: PathBuf,
    pub log_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub scenario: PathBuf,
    pub scenario_hash: String,
    pub conditions: Vec<String>,
    pub seeds: Vec<u64>,
    pub runs: Vec<RunRecord>,
    /// Runs that failed, as `condition/seed: error`.
    #[serde(default)]
    pub failures: Vec<String>,
}

/// Everything one `run` produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub episode: Episode,
    pub metrics: SessionMetrics,
    pub dir: PathBuf,
    pub log_sha256: String,
}

pub fn run_dir_name(condition: &str, seed: u64) -> String {
    format!("{condition}-s{seed}")
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_owned(), source }
}

/// Simulates one episode without writing anything.
pub fn simulate(scenario: &Scenario, condition: &str, seed: u64) -> Result<(Episode, SessionMetrics), CliError> {
    let cfg = scenario.orchestrator(condition)?;
    let c = &scenario.config;
    let scene = scenario.scene(seed)?;
    let world = World {
        scene: &scene,
        costmap: &scenario.costmap,
        camera: &c.camera,
        detector: &c.detector,
        search: &c.search,
        localization: c.localization,
    };
    let meta = EpisodeMeta { condition: condition.to_owned(), seed, scenario_hash: scenario.hash.clone() };
    let backend = RuleBackend { latency: c.intent_latency };
    let profile = c.profile.resolve();
    let episode = run_episode(&world, &cfg, &profile, &c.gaze, &c.episode, &backend, scenario.robot_start(), &meta)?;
    let metrics = session_metrics(&episode.log, &episode.gaze);
    Ok((episode, metrics))
}

/// Runs one episode and writes its log, gaze stream and metrics under
/// `out/runs/<condition>-s<seed>/`.
pub fn run(scenario: &Scenario, condition: &str, seed: u64, out: &Path) -> Result<RunOutput, CliError> {
    let (episode, metrics) = simulate(scenario, condition, seed)?;
    let rel = Path::new(RUNS_DIR).join(run_dir_name(condition, seed));
    let dir = out.join(&rel);
    fs::create_dir_all(&dir).map_err(io(&dir))?;

    let log_text = episode.log.to_jsonl();
    let log_path = dir.join(LOG_FILE);
    fs::write(&log_path, &log_text).map_err(io(&log_path))?;

    let gaze_path = dir.join(GAZE_FILE);
    let f = fs::File::create(&gaze_path).map_err(io(&gaze_path))?;
    write_gaze_csv(std::io::BufWriter::new(f), &episode.gaze).map_err(|e| CliError::Output(format!("{}: {e}", gaze_path.display())))?;

    let m_path = dir.join(METRICS_FILE);
    let m_text = serde_json::to_string_pretty(&metrics).expect("metrics serialize") + "\n";
    fs::write(&m_path, m_text).map_err(io(&m_path))?;

    let log_sha256 = hex::encode(Sha256::digest(log_text.as_bytes()));
    Ok(RunOutput { episode, metrics, dir: rel, log_sha256 })
}

#[derive(Debug, Clone)]
pub struct BatchOutput {
    pub manifest: RunManifest,
    pub sessions: Vec<SessionMetrics>,
    pub report: MetricsReport,
    pub summary: String,
}

fn write_runs_csv(path: &Path, sessions: &[SessionMetrics]) -> Result<(), CliError> {
    let mut wr = csv::Writer::from_path(path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    let err = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
    wr.write_record([
        "condition",
        "seed",
        "time_to_locate",
        "censored",
        "interaction_rounds",
        "completed",
        "outcome",
        "duration",
        "max_level",
    ])
    .map_err(err)?;
    for s in sessions {
        let max_level = s.level_trace.iter().max().map_or(String::new(), |l| format!("{l:?}"));
        wr.write_record([
            s.condition.clone(),
            s.seed.to_string(),
            s.time_to_locate.to_string(),
            s.censored.to_string(),
            s.interaction_rounds.to_string(),
            s.completed.to_string(),
            serde_json::to_value(s.outcome).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
            s.duration.to_string(),
            max_level,
        ])
        .map_err(err)?;
    }
    wr.flush().map_err(io(path))?;
    Ok(())
}

/// Writes `report.csv` and `summary.txt` into `dir` and returns the summary.
fn write_report(dir: &Path, report: &MetricsReport) -> Result<String, CliError> {
    let p = dir.join("report.csv");
    let f = fs::File::create(&p).map_err(io(&p))?;
    write_report_csv(f, report).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?;
    let summary = summary_text(report);
    let p = dir.join("summary.txt");
    fs::write(&p, &summary).map_err(io(&p))?;
    Ok(summary)
}

fn load_questionnaires(path: Option<&Path>) -> Result<Vec<QuestionnaireRow>, CliError> {
    match path {
        None => Ok(Vec::new()),
        Some(p) => {
            let f = fs::File::open(p).map_err(io(p))?;
            read_questionnaires(f).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))
        }
    }
}

/// Runs every seed under every condition, paired by seed, in parallel.
pub fn batch(
    scenario: &Scenario,
    conditions: &[String],
    seeds: &[u64],
    out: &Path,
    questionnaires: Option<&Path>,
) -> Result<BatchOutput, CliError> {
    if seeds.is_empty() {
        return Err(CliError::Usage("batch needs at least one seed".into()));
    }
    let conditions: Vec<String> = if conditions.is_empty() { scenario.condition_names() } else { conditions.to_vec() };
    for c in &conditions {
        scenario.orchestrator(c)?;
    }
    fs::create_dir_all(out).map_err(io(out))?;
    let jobs: Vec<(u64, String)> = seeds.iter().flat_map(|&s| conditions.iter().map(move |c| (s, c.clone()))).collect();
    let results: Vec<_> = jobs.par_iter().map(|(s, c)| (c.clone(), *s, run(scenario, c, *s, out))).collect();

    let mut runs = Vec::new();
    let mut sessions = Vec::new();
    let mut failures = Vec::new();
    for (c, s, r) in results {
        match r {
            Ok(o) => {
                runs.push(RunRecord { condition: c, seed: s, dir: o.dir, log_sha256: o.log_sha256 });
                sessions.push(o.metrics);
            }
            Err(e) => failures.push(format!("{c}/{s}: {e}")),
        }
    }
    let manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_owned(),
        scenario: scenario.path.clone(),
        scenario_hash: scenario.hash.clone(),
        conditions: conditions.clone(),
        seeds: seeds.to_vec(),
        runs,
        failures,
    };
    let mp = out.join(MANIFEST_FILE);
    fs::write(&mp, serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n").map_err(io(&mp))?;
    write_runs_csv(&out.join("runs.csv"), &sessions)?;

    let present: Vec<String> = conditions.iter().filter(|c| sessions.iter().any(|s| &s.condition == *c)).cloned().collect();
    if present.is_empty() {
        return Err(CliError::Partial(manifest.failures.clone()));
    }
    let qs = load_questionnaires(questionnaires)?;
    let report = aggregate(&sessions, &qs, &present)?;
    let summary = write_report(out, &report)?;
    Ok(BatchOutput { manifest, sessions, report, summary })
}

fn check_gaze(path: &Path, gaze: &[crate::usersim::GazeSample]) -> Result<(), CliError> {
    for (k, w) in gaze.windows(2).enumerate() {
        let dt = w[1].timestamp - w[0].timestamp;
        if (dt - GAZE_DT).abs() > 1e-9 {
            return Err(CliError::LogInvalid { path: path.to_owned(), message: format!("gaze row {} breaks the 180 Hz spacing", k + 2) });
        }
    }
    Ok(())
}

/// Reloads one run directory and recomputes its metrics.
pub fn load_run(dir: &Path) -> Result<(SessionLog, SessionMetrics), CliError> {
    let lp = dir.join(LOG_FILE);
    let text = fs::read_to_string(&lp).map_err(io(&lp))?;
    let log = SessionLog::from_jsonl(&text).map_err(|e| CliError::LogInvalid { path: lp.clone(), message: e.to_string() })?;
    let gp = dir.join(GAZE_FILE);
    let f = fs::File::open(&gp).map_err(io(&gp))?;
    let gaze = read_gaze_csv(f).map_err(|e| CliError::LogInvalid { path: gp.clone(), message: e.to_string() })?;
    check_gaze(&gp, &gaze)?;
    let m = session_metrics(&log, &gaze);
    Ok((log, m))
}

/// Regenerates the report from stored logs without re-simulating.
pub fn report(dir: &Path, questionnaires: Option<&Path>) -> Result<BatchOutput, CliError> {
    let runs_root = dir.join(RUNS_DIR);
    let mut run_dirs: Vec<PathBuf> = match fs::read_dir(&runs_root) {
        Ok(rd) => rd.filter_map(Result::ok).map(|e| e.path()).filter(|p| p.join(LOG_FILE).is_file()).collect(),
        Err(_) => Vec::new(),
    };
    if run_dirs.is_empty() {
        return Err(CliError::MissingLogs(dir.to_owned()));
    }
    run_dirs.sort();
    let mut sessions = Vec::new();
    for d in &run_dirs {
        sessions.push(load_run(d)?.1);
    }
    let manifest = match fs::read_to_string(dir.join(MANIFEST_FILE)) {
        Ok(text) => serde_json::from_str::<RunManifest>(&text)
            .map_err(|e| CliError::LogInvalid { path: dir.join(MANIFEST_FILE), message: e.to_string() })?,
        Err(_) => RunManifest {
            artifact_version: env!("CARGO_PKG_VERSION").to_owned(),
            scenario: PathBuf::new(),
            scenario_hash: String::new(),
            conditions: Vec::new(),
            seeds: Vec::new(),
            runs: Vec::new(),
            failures: Vec::new(),
        },
    };
    // Same order as batch: manifest condition order, else sorted names.
    sessions.sort_by(|a, b| a.condition.cmp(&b.condition).then(a.seed.cmp(&b.seed)));
    let names: Vec<String> =
        manifest.conditions.iter().filter(|c| sessions.iter().any(|s| &s.condition == *c)).cloned().collect();
    let qs = load_questionnaires(questionnaires)?;
    let report = aggregate(&sessions, &qs, &names)?;
    let summary = write_report(dir, &report)?;
    Ok(BatchOutput { manifest, sessions, report, summary })
}
