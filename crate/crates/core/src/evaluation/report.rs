//! Report tables and run manifests.
//!
//! A report table has one line per (entry, metric) with the columns
//! `model,q,nof,variant,metric,mean,std,n_evs,iterations,seed`. `variant`
//! distinguishes rows that share (model, q, nof) within one sweep, e.g. the
//! training size or the pipeline arm; plain runs use `all`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::metrics::{Metrics, METRIC_NAMES};
use super::profiling::MetricsReport;
use crate::classifiers::ModelKind;
use crate::data_model::persist::{create, read_lines, ArtifactHeader};
use crate::error::{Error, Result};

pub const REPORT_HEADER: &str = "model,q,nof,variant,metric,mean,std,n_evs,iterations,seed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub model: ModelKind,
    pub q: f64,
    pub nof: usize,
    pub variant: String,
    pub mean: Metrics,
    pub std: Metrics,
    pub n_evs: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl ReportEntry {
    pub fn from_report(report: &MetricsReport, variant: impl Into<String>) -> Self {
        ReportEntry {
            model: report.config.model,
            q: report.config.q,
            nof: report.nof,
            variant: variant.into(),
            mean: report.mean,
            std: report.std,
            n_evs: report.n_evs(),
            iterations: report.config.iterations,
            seed: report.config.seed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub entries: Vec<ReportEntry>,
}

impl ReportTable {
    pub fn push(&mut self, entry: ReportEntry) {
        self.entries.push(entry);
    }

    pub fn extend(&mut self, other: ReportTable) {
        self.entries.extend(other.entries);
    }

    /// First entry matching (q, variant).
    pub fn find(&self, q: f64, variant: &str) -> Option<&ReportEntry> {
        self.entries
            .iter()
            .find(|e| e.q == q && e.variant == variant)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(REPORT_HEADER);
        s.push('\n');
        for e in &self.entries {
            for (name, (mean, std)) in METRIC_NAMES
                .iter()
                .zip(e.mean.as_array().into_iter().zip(e.std.as_array()))
            {
                s.push_str(&format!(
                    "{},{},{},{},{},{:.6},{:.6},{},{},{}\n",
                    e.model, e.q, e.nof, e.variant, name, mean, std, e.n_evs, e.iterations, e.seed
                ));
            }
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = create(path)?;
        out.write_all(self.to_csv().as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }
}

pub const DETAILS_FORMAT: &str = "evprofile.report";
pub const DETAILS_VERSION: u32 = 1;

/// Full per-EV reports as a header line plus one JSON document.
pub fn persist_details(reports: &[MetricsReport], path: &Path) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(
        out,
        "{}",
        ArtifactHeader::new(DETAILS_FORMAT, DETAILS_VERSION).to_line()
    )
    .map_err(io)?;
    serde_json::to_writer(&mut out, reports)?;
    writeln!(out).map_err(io)?;
    out.flush().map_err(io)
}

pub fn load_details(path: &Path) -> Result<Vec<MetricsReport>> {
    let lines = read_lines(path)?;
    let first = lines.first().ok_or_else(|| Error::Malformed {
        path: path.to_path_buf(),
        line: 1,
        reason: "empty report".into(),
    })?;
    ArtifactHeader::parse_checked(path, first, DETAILS_FORMAT, DETAILS_VERSION)?;
    serde_json::from_str(&lines[1..].join("\n")).map_err(|e| Error::Malformed {
        path: path.to_path_buf(),
        line: 2,
        reason: e.to_string(),
    })
}

/// Recursively sorts object keys so equal configs serialize identically.
pub fn canonical_json(value: &Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            let mut out = serde_json::Map::new();
            for k in keys {
                out.insert(k.clone(), canonical_json(&map[k]));
            }
            Value::Object(out)
        }
        Value::Array(items) => Value::Array(items.iter().map(canonical_json).collect()),
        other => other.clone(),
    }
}

/// SHA-256 of the canonical JSON form, hex encoded.
pub fn config_hash(config: &Value) -> String {
    let text = serde_json::to_string(&canonical_json(config)).expect("json value serializes");
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config_hash: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub started_at: String,
    pub finished_at: Option<String>,
    pub wall_clock_s: Option<f64>,
    pub status: RunStatus,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config: Value,
        seed: Option<u64>,
        inputs: Vec<String>,
        outputs: Vec<String>,
    ) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_hash: config_hash(&config),
            config: canonical_json(&config),
            seed,
            inputs,
            outputs,
            started_at: chrono::Utc::now().to_rfc3339(),
            finished_at: None,
            wall_clock_s: None,
            status: RunStatus::Running,
        }
    }

    pub fn finish(&mut self, status: RunStatus, wall_clock_s: f64) {
        self.status = status;
        self.finished_at = Some(chrono::Utc::now().to_rfc3339());
        self.wall_clock_s = Some(wall_clock_s);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = create(path)?;
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }
}
