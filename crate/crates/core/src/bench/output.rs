use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

use super::run::{ExperimentOutput, SummaryRow, TrialStatus};
use super::spec::{ExperimentSpec, Metric};

/// Bumped whenever a CSV column or JSON field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 12] = [
    "estimator",
    "n",
    "replication",
    "seed",
    "data_hash",
    "status",
    "metric",
    "theta_hat",
    "standard_errors",
    "converged",
    "iterations",
    "message",
];

fn join(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// One row per trial. Wall times are left out so that reruns with the same
/// seed produce byte-identical files.
pub fn trials_csv(out: &ExperimentOutput) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for t in &out.trials {
        let status = match t.status {
            TrialStatus::Ok => "ok",
            TrialStatus::InfiniteKl => "infinite_kl",
            TrialStatus::Failed => "failed",
        };
        w.write_record([
            t.estimator.clone(),
            t.n.to_string(),
            t.replication.to_string(),
            t.seed.to_string(),
            format!("{:016x}", t.data_hash),
            status.to_string(),
            t.metric.map(|m| m.to_string()).unwrap_or_default(),
            join(&t.theta_hat),
            t.standard_errors.as_deref().map(join).unwrap_or_default(),
            t.converged.to_string(),
            t.iterations.to_string(),
            t.message.clone().unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Serialize)]
struct SummaryJson<'a> {
    schema_version: u32,
    name: &'a str,
    metric: Metric,
    replications: usize,
    failed_trials: usize,
    effective_config: &'a ExperimentSpec,
    rows: &'a [SummaryRow],
}

pub fn summary_json(out: &ExperimentOutput) -> Result<String> {
    let doc = SummaryJson {
        schema_version: SCHEMA_VERSION,
        name: &out.summary.name,
        metric: out.summary.metric,
        replications: out.summary.replications,
        failed_trials: out
            .trials
            .iter()
            .filter(|t| t.status == TrialStatus::Failed)
            .count(),
        effective_config: &out.spec,
        rows: &out.summary.rows,
    };
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))
}

/// Writes `<name>_trials.csv` and `<name>_summary.json` into `dir`.
pub fn write_outputs(out: &ExperimentOutput, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{}_trials.csv", out.spec.name));
    let json_path = dir.join(format!("{}_summary.json", out.spec.name));
    std::fs::write(&csv_path, trials_csv(out)?)?;
    std::fs::write(&json_path, summary_json(out)?)?;
    Ok((csv_path, json_path))
}

/// Fixed-width text rendering of the summary table.
pub fn render_summary(out: &ExperimentOutput) -> String {
    let mut s = format!(
        "{:<12} {:>7} {:>12} {:>12} {:>10} {:>5} {:>5} {:>5}\n",
        "estimator", "n", "mean", "sd", "time_s", "ok", "inf", "fail"
    );
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
    for r in &out.summary.rows {
        s.push_str(&format!(
            "{:<12} {:>7} {:>12} {:>12} {:>10.4} {:>5} {:>5} {:>5}\n",
            r.estimator,
            r.n,
            fmt(r.mean),
            fmt(r.sd),
            r.median_time_s,
            r.ok,
            r.infinite_kl,
            r.failed
        ));
    }
    s
}
