//! CSV tables and JSON records written by each command.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use zoo_opt::verification::BoundCheckReport;

use crate::config::ExperimentConfig;
use crate::CliError;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table built in memory and written in one go.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub const CHECK_HEADER: &[&str] =
    &["claim", "params", "empirical", "stderr", "bound", "slack_k", "abs_slack", "margin", "pass"];

pub fn check_table(reports: &[BoundCheckReport]) -> Table {
    let mut t = Table::new(CHECK_HEADER);
    for r in reports {
        t.push(vec![
            r.claim.clone(),
            r.params_string(),
            fmt_f64(r.empirical),
            fmt_f64(r.stderr),
            fmt_f64(r.bound),
            fmt_f64(r.slack_k),
            fmt_f64(r.abs_slack),
            fmt_f64(r.margin),
            r.pass.to_string(),
        ]);
    }
    t
}

/// JSON record accompanying every CSV table.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRecord {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub pass: bool,
    pub summary: Value,
}

impl ExperimentRecord {
    pub fn new(config: &ExperimentConfig, seed: u64, pass: bool, summary: Value) -> Self {
        Self {
            command: config.command.name().to_string(),
            config_hash: config.hash(),
            seed,
            config: config.clone(),
            pass,
            summary,
        }
    }
}

/// Writes `<stem>.csv` and `<stem>.json` under `dir`, returning both paths.
pub fn write_outputs(dir: &Path, stem: &str, table: &Table, record: &ExperimentRecord) -> Result<(PathBuf, PathBuf), CliError> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    fs::write(&csv, table.render())?;
    let mut body = serde_json::to_string_pretty(record).map_err(|e| CliError::Config(e.to_string()))?;
    body.push('\n');
    fs::write(&json, body)?;
    Ok((csv, json))
}
