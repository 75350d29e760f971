//! Command dispatch behind the CLI: config loading, suite execution and artifacts.

use crate::config::LabConfig;
use crate::error::{LabError, Result};
use crate::io::{create_run_dir, write_json, write_svg, write_table};
use crate::stats::Verdict;
use crate::suites::{SuiteContext, SuiteRegistry};
use serde::Serialize;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Debug, Default)]
pub struct RunRequest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub workers: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub verdict: Verdict,
    pub run_dir: Option<PathBuf>,
    pub message: String,
}

#[derive(Serialize)]
struct VerdictFile<'a> {
    schema_version: &'static str,
    command: &'a str,
    seed: u64,
    verdict: Verdict,
    error: Option<String>,
    details: serde_json::Value,
}

#[derive(Serialize)]
struct RunMeta<'a> {
    schema_version: &'static str,
    command: &'a str,
    started_utc: String,
    finished_utc: String,
    seed: u64,
    workers: Option<usize>,
    config_path: Option<String>,
    overrides: &'a [String],
    version: &'static str,
}

pub fn commands() -> Vec<&'static str> {
    let mut c = SuiteRegistry::builtin().names();
    c.push("report");
    c.sort();
    c
}

fn exit_for(v: Verdict) -> i32 {
    match v {
        Verdict::Pass | Verdict::Informational => EXIT_OK,
        _ => EXIT_FAILED,
    }
}

/// Execute one command. Usage problems (bad config, unknown command) come back as `Err`;
/// suite outcomes, including refusals, come back as an outcome with an exit code.
pub fn run(req: &RunRequest) -> Result<RunOutcome> {
    let config = LabConfig::load(req.config_path.as_deref(), &req.overrides)?;
    let base = req.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.dir));
    if req.command == "report" {
        return report(&base);
    }
    let registry = SuiteRegistry::builtin();
    let suite = registry.get(&req.command)?;
    let started = chrono::Utc::now().to_rfc3339();
    let dir = create_run_dir(&base, &req.command)?;
    std::fs::write(dir.join("config.toml"), config.to_toml()?)?;
    let ctx = SuiteContext::new(config.clone(), req.seed);
    let result = match req.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| LabError::Config(format!("worker pool: {e}")))?
            .install(|| suite.run(&ctx)),
        None => suite.run(&ctx),
    };
    let (verdict, error, details) = match &result {
        Ok(rep) => (rep.verdict, None, rep.details.clone()),
        Err(e) => (Verdict::Fail, Some(e.to_string()), serde_json::Value::Null),
    };
    if let Ok(rep) = &result {
        for t in &rep.tables {
            write_table(&dir, t)?;
        }
        if config.output.svg {
            for p in &rep.plots {
                write_svg(&dir, p)?;
            }
        }
    }
    write_json(
        &dir.join("verdict.json"),
        &VerdictFile { schema_version: crate::SCHEMA_VERSION, command: &req.command, seed: req.seed, verdict, error: error.clone(), details },
    )?;
    write_json(
        &dir.join("run.json"),
        &RunMeta {
            schema_version: crate::SCHEMA_VERSION,
            command: &req.command,
            started_utc: started,
            finished_utc: chrono::Utc::now().to_rfc3339(),
            seed: req.seed,
            workers: req.workers,
            config_path: req.config_path.as_ref().map(|p| p.display().to_string()),
            overrides: &req.overrides,
            version: env!("CARGO_PKG_VERSION"),
        },
    )?;
    let message = match &error {
        Some(e) => format!("{}: {e}", req.command),
        None => format!("{}: {:?}", req.command, verdict),
    };
    Ok(RunOutcome { exit_code: exit_for(verdict), verdict, run_dir: Some(dir), message })
}

#[derive(Serialize)]
struct ReportEntry {
    run: String,
    command: String,
    verdict: Verdict,
}

#[derive(Serialize)]
struct Report {
    schema_version: &'static str,
    runs: Vec<ReportEntry>,
    overall: Verdict,
}

/// Aggregate the verdict files of every run directory under `base` into `base/report.json`.
fn report(base: &Path) -> Result<RunOutcome> {
    let mut runs = Vec::new();
    if base.is_dir() {
        let mut dirs: Vec<PathBuf> = std::fs::read_dir(base)?.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_dir()).collect();
        dirs.sort();
        for d in dirs {
            let f = d.join("verdict.json");
            if !f.is_file() {
                continue;
            }
            let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&f)?)?;
            let verdict: Verdict = serde_json::from_value(v["verdict"].clone()).unwrap_or(Verdict::Inconclusive);
            runs.push(ReportEntry {
                run: d.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                command: v["command"].as_str().unwrap_or("").to_string(),
                verdict,
            });
        }
    }
    let overall = if runs.is_empty() {
        Verdict::Inconclusive
    } else {
        runs.iter().fold(Verdict::Pass, |acc, r| match r.verdict {
            Verdict::Informational => acc,
            v => acc.and(v),
        })
    };
    std::fs::create_dir_all(base)?;
    let path = base.join("report.json");
    write_json(&path, &Report { schema_version: crate::SCHEMA_VERSION, runs, overall })?;
    Ok(RunOutcome {
        exit_code: exit_for(overall),
        verdict: overall,
        run_dir: Some(base.to_path_buf()),
        message: format!("report: {:?} ({})", overall, path.display()),
    })
}
