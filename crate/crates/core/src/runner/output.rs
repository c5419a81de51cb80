//! CSV and JSON writers for experiment results.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::{ExperimentConfig, ExperimentResult, RunError, ScanResult};

pub const CURVES_HEADER: &str = "scenario,agent,replication,seed,t,instant_regret,cum_regret";
pub const SUMMARY_HEADER: &str = "scenario,agent,t,mean_cum_regret,stderr_cum_regret";
pub const SCAN_HEADER: &str = "scenario,agent,axis,axis_value,replication,final_regret";

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| RunError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One row per `(agent, replication, t)` with `t` starting at 1.
pub fn curves_csv(result: &ExperimentResult) -> String {
    let mut out = String::with_capacity(64 * result.traces.len() * result.config.horizon + 64);
    out.push_str(CURVES_HEADER);
    out.push('\n');
    for trace in &result.traces {
        for (t, (inst, cum)) in trace.instant.iter().zip(&trace.cumulative).enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                result.scenario,
                trace.agent,
                trace.replication,
                trace.seed,
                t + 1,
                inst,
                cum
            );
        }
    }
    out
}

pub fn summary_csv(result: &ExperimentResult) -> String {
    let mut out = String::new();
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for curve in &result.curves {
        for (t, (m, se)) in curve.mean.iter().zip(&curve.stderr).enumerate() {
            let _ = writeln!(out, "{},{},{},{},{}", result.scenario, curve.agent, t + 1, m, se);
        }
    }
    out
}

pub fn scan_csv(scan: &ScanResult) -> String {
    let mut out = String::new();
    out.push_str(SCAN_HEADER);
    out.push('\n');
    for row in &scan.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            scan.scenario,
            row.agent,
            scan.axis.name(),
            row.axis_value,
            row.replication,
            row.final_regret
        );
    }
    out
}

pub fn write_curves_csv(result: &ExperimentResult, path: &Path) -> Result<(), RunError> {
    write_file(path, &curves_csv(result))
}

pub fn write_summary_csv(result: &ExperimentResult, path: &Path) -> Result<(), RunError> {
    write_file(path, &summary_csv(result))
}

pub fn write_scan_csv(scan: &ScanResult, path: &Path) -> Result<(), RunError> {
    write_file(path, &scan_csv(scan))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedRecord {
    pub agent: String,
    pub replication: usize,
    pub seed: u64,
    pub env_seed: u64,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub scenario: String,
    pub version: &'static str,
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis_values: Option<Vec<usize>>,
    pub seeds: Vec<SeedRecord>,
    pub wall_time_secs: f64,
}

impl Manifest {
    pub fn for_experiment(result: &ExperimentResult, wall_time_secs: f64) -> Self {
        Self {
            scenario: result.scenario.clone(),
            version: env!("CARGO_PKG_VERSION"),
            config: result.config.clone(),
            axis: None,
            axis_values: None,
            seeds: result.seed_records(),
            wall_time_secs,
        }
    }

    pub fn for_scan(scan: &ScanResult, wall_time_secs: f64) -> Self {
        Self {
            scenario: scan.scenario.clone(),
            version: env!("CARGO_PKG_VERSION"),
            config: scan.config.clone(),
            axis: Some(scan.axis.name().to_string()),
            axis_values: Some(scan.values.clone()),
            seeds: scan
                .rows
                .iter()
                .map(|r| SeedRecord {
                    agent: r.agent.to_string(),
                    replication: r.replication,
                    seed: r.seed,
                    env_seed: super::ReplicationSeeds::new(
                        scan.config.base_seed,
                        &format!("{}/{}={}", scan.scenario, scan.axis.name(), r.axis_value),
                        r.agent.name(),
                        r.replication,
                    )
                    .env,
                })
                .collect(),
            wall_time_secs,
        }
    }
}

pub fn write_manifest(manifest: &Manifest, path: &Path) -> Result<(), RunError> {
    let json =
        serde_json::to_string_pretty(manifest).map_err(|e| RunError::Config(format!("manifest serialization: {e}")))?;
    write_file(path, &json)
}
