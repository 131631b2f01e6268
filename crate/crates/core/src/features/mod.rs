//! Feature vectors over (current tail, Delta series), the legacy set, and
//! chi-squared top-k selection.

pub mod catalog;
pub mod legacy;
pub mod selection;

use std::io::Write;
use std::path::Path;
use std::sync::LazyLock;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use catalog::{series_features, SERIES_FEATURE_NAMES, SERIES_LEN};
pub use legacy::LEGACY_LEN;
pub use selection::{apply_selection, fit_selection, SelectionModel};

use crate::data_model::persist::{create, read_lines, ArtifactHeader};
use crate::error::{Error, Result};
use crate::extraction::{DeltaSeries, Tail, TailParams, TailRecord};

pub const CATALOG_LEN: usize = 2 * SERIES_LEN;
pub const FEATURES_FORMAT: &str = "evprofile.features";
pub const FEATURES_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CatalogMode {
    #[serde(rename = "modern-128")]
    Modern,
    #[serde(rename = "legacy-18")]
    Legacy,
}

impl CatalogMode {
    pub fn names(self) -> &'static [String] {
        match self {
            CatalogMode::Modern => &MODERN_NAMES,
            CatalogMode::Legacy => &LEGACY_NAMES,
        }
    }
}

static MODERN_NAMES: LazyLock<Vec<String>> = LazyLock::new(|| {
    ["tail", "delta"]
        .iter()
        .flat_map(|prefix| {
            SERIES_FEATURE_NAMES
                .iter()
                .map(move |f| format!("{prefix}__{f}"))
        })
        .collect()
});

static LEGACY_NAMES: LazyLock<Vec<String>> = LazyLock::new(legacy::legacy_names);

/// Values with non-finite entries replaced by 0, plus the replaced indices.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureValues {
    pub values: Vec<f64>,
    pub nonfinite: Vec<usize>,
}

impl FeatureValues {
    fn sanitize(mut values: Vec<f64>) -> Self {
        let mut nonfinite = Vec::new();
        for (i, v) in values.iter_mut().enumerate() {
            if !v.is_finite() {
                *v = 0.0;
                nonfinite.push(i);
            }
        }
        FeatureValues { values, nonfinite }
    }
}

/// Catalog over the current tail and the Delta series (pilot tail unused).
pub fn featurize(tail: &Tail, delta: &DeltaSeries, params: &TailParams) -> Result<FeatureValues> {
    if tail.s < params.min_tail_len || tail.current_values.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "tail of {} samples is shorter than min_tail_len {}",
            tail.s, params.min_tail_len
        )));
    }
    if delta.values.is_empty() {
        return Err(Error::Empty("delta series"));
    }
    let mut values = Vec::with_capacity(CATALOG_LEN);
    values.extend(series_features(&tail.current_values));
    values.extend(series_features(&delta.values));
    Ok(FeatureValues::sanitize(values))
}

/// Legacy 18-vector from both tails plus energy and duration.
pub fn featurize_legacy(
    tail: &Tail,
    kwh: f64,
    duration_s: f64,
    params: &TailParams,
) -> Result<FeatureValues> {
    if tail.s < params.min_tail_len {
        return Err(Error::InvalidParameter(format!(
            "tail of {} samples is shorter than min_tail_len {}",
            tail.s, params.min_tail_len
        )));
    }
    Ok(FeatureValues::sanitize(legacy::legacy_values(
        &tail.current_values,
        &tail.pilot_values,
        kwh,
        duration_s,
    )))
}

/// One session's features; names live on the owning [`FeatureTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub ev_id: String,
    pub session_id: String,
    pub connection_time: DateTime<Utc>,
    pub values: Vec<f64>,
    pub nonfinite: Vec<usize>,
}

/// Feature vectors of a fleet in fleet order (EV id, then chronological).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub mode: CatalogMode,
    pub names: Vec<String>,
    pub rows: Vec<FeatureVector>,
}

impl FeatureTable {
    pub fn from_tails(
        records: &[TailRecord],
        mode: CatalogMode,
        params: &TailParams,
    ) -> Result<Self> {
        let rows = crate::par::map(records, |r| {
            let fv = match mode {
                CatalogMode::Modern => featurize(&r.extract.tail, &r.extract.delta, params),
                CatalogMode::Legacy => {
                    featurize_legacy(&r.extract.tail, r.kwh, r.duration_s, params)
                }
            }?;
            Ok(FeatureVector {
                ev_id: r.ev_id.clone(),
                session_id: r.session_id.clone(),
                connection_time: r.connection_time,
                values: fv.values,
                nonfinite: fv.nonfinite,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let mut table = FeatureTable {
            mode,
            names: mode.names().to_vec(),
            rows,
        };
        table.sort();
        Ok(table)
    }

    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            a.ev_id
                .cmp(&b.ev_id)
                .then(a.connection_time.cmp(&b.connection_time))
                .then_with(|| a.session_id.cmp(&b.session_id))
        });
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    /// Distinct EV ids in order.
    pub fn ev_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.rows.iter().map(|r| r.ev_id.as_str()).collect();
        ids.dedup();
        ids
    }

    /// Row indices grouped by EV, chronological within each group.
    pub fn groups(&self) -> Vec<(String, Vec<usize>)> {
        let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            match groups.last_mut() {
                Some((ev, idx)) if *ev == r.ev_id => idx.push(i),
                _ => groups.push((r.ev_id.clone(), vec![i])),
            }
        }
        groups
    }

    /// Comma-separated export: a `#`-prefixed JSON header line, then a
    /// header row `ev_id,session_id,connection_time,nonfinite,<names...>`.
    /// `nonfinite` lists replaced column indices joined by `;`.
    pub fn persist(&self, path: &Path) -> Result<()> {
        let mut out = create(path)?;
        let io = |e| Error::io(path, e);
        let header =
            ArtifactHeader::new(FEATURES_FORMAT, FEATURES_VERSION).with("catalog", self.mode);
        writeln!(out, "#{}", header.to_line()).map_err(io)?;
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Malformed {
            path: path.to_path_buf(),
            line: 0,
            reason: e.to_string(),
        };
        let mut head = vec!["ev_id", "session_id", "connection_time", "nonfinite"];
        head.extend(self.names.iter().map(String::as_str));
        w.write_record(&head).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec = vec![
                r.ev_id.clone(),
                r.session_id.clone(),
                r.connection_time.to_rfc3339(),
                r.nonfinite
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
            ];
            rec.extend(r.values.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let lines = read_lines(path)?;
        let first = lines.first().map(String::as_str).unwrap_or("");
        let header = ArtifactHeader::parse_checked(
            path,
            first.strip_prefix('#').unwrap_or(first),
            FEATURES_FORMAT,
            FEATURES_VERSION,
        )?;
        let malformed = |line: usize, reason: String| Error::Malformed {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let mode: CatalogMode = header
            .meta
            .get("catalog")
            .and_then(|v| serde_json::from_value(v.clone()).ok())
            .ok_or_else(|| malformed(1, "missing catalog".into()))?;
        let body = lines[1..].join("\n");
        let mut reader = csv::Reader::from_reader(body.as_bytes());
        let head = reader
            .headers()
            .map_err(|e| malformed(2, e.to_string()))?
            .clone();
        let names: Vec<String> = head.iter().skip(4).map(str::to_string).collect();
        if names.as_slice() != mode.names() {
            return Err(Error::FeatureNameMismatch);
        }
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let line = i + 3;
            let rec = rec.map_err(|e| malformed(line, e.to_string()))?;
            if rec.len() != 4 + names.len() {
                return Err(malformed(line, "wrong column count".into()));
            }
            let connection_time = DateTime::parse_from_rfc3339(&rec[2])
                .map_err(|e| malformed(line, e.to_string()))?
                .with_timezone(&Utc);
            let nonfinite = if rec[3].is_empty() {
                Vec::new()
            } else {
                rec[3]
                    .split(';')
                    .map(|s| s.parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| malformed(line, e.to_string()))?
            };
            let values = rec
                .iter()
                .skip(4)
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| malformed(line, e.to_string()))?;
            rows.push(FeatureVector {
                ev_id: rec[0].to_string(),
                session_id: rec[1].to_string(),
                connection_time,
                values,
                nonfinite,
            });
        }
        Ok(FeatureTable { mode, names, rows })
    }
}

/// Rows with binary labels: `true` marks the target EV.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub names: Vec<String>,
    pub target_ev: String,
    pub rows: Vec<FeatureVector>,
    pub labels: Vec<bool>,
}

pub const DATASET_FORMAT: &str = "evprofile.dataset";
pub const DATASET_VERSION: u32 = 1;

impl LabeledDataset {
    pub fn new(
        names: Vec<String>,
        target_ev: impl Into<String>,
        rows: Vec<FeatureVector>,
        labels: Vec<bool>,
    ) -> Result<Self> {
        let target_ev = target_ev.into();
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                got: labels.len(),
            });
        }
        for (r, &l) in rows.iter().zip(&labels) {
            if r.values.len() != names.len() {
                return Err(Error::DimensionMismatch {
                    expected: names.len(),
                    got: r.values.len(),
                });
            }
            if l != (r.ev_id == target_ev) {
                return Err(Error::InvalidParameter(format!(
                    "row {} labelled {l} but target is {target_ev}",
                    r.session_id
                )));
            }
        }
        Ok(LabeledDataset {
            names,
            target_ev,
            rows,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_positive(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn has_both_classes(&self) -> bool {
        let p = self.n_positive();
        p > 0 && p < self.len()
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.values.clone()).collect()
    }

    /// CSV with a `label` column in front of the feature-table layout.
    pub fn persist(&self, path: &Path) -> Result<()> {
        let mut out = create(path)?;
        let io = |e| Error::io(path, e);
        let header =
            ArtifactHeader::new(DATASET_FORMAT, DATASET_VERSION).with("target_ev", &self.target_ev);
        writeln!(out, "#{}", header.to_line()).map_err(io)?;
        write!(out, "label,ev_id,session_id,connection_time,nonfinite").map_err(io)?;
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.names).expect("in-memory csv");
        let names_row = String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8");
        write!(out, ",{names_row}").map_err(io)?;
        let mut w = csv::Writer::from_writer(out);
        for (r, &l) in self.rows.iter().zip(&self.labels) {
            let mut rec = vec![
                if l { "1".to_string() } else { "0".to_string() },
                r.ev_id.clone(),
                r.session_id.clone(),
                r.connection_time.to_rfc3339(),
                r.nonfinite
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
            ];
            rec.extend(r.values.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(|e| Error::Malformed {
                path: path.to_path_buf(),
                line: 0,
                reason: e.to_string(),
            })?;
        }
        w.flush().map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let lines = read_lines(path)?;
        let first = lines.first().map(String::as_str).unwrap_or("");
        let header = ArtifactHeader::parse_checked(
            path,
            first.strip_prefix('#').unwrap_or(first),
            DATASET_FORMAT,
            DATASET_VERSION,
        )?;
        let malformed = |line: usize, reason: String| Error::Malformed {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let target_ev = header
            .meta_str("target_ev")
            .ok_or_else(|| malformed(1, "missing target_ev".into()))?
            .to_string();
        let body = lines[1..].join("\n");
        let mut reader = csv::Reader::from_reader(body.as_bytes());
        let head = reader
            .headers()
            .map_err(|e| malformed(2, e.to_string()))?
            .clone();
        let names: Vec<String> = head.iter().skip(5).map(str::to_string).collect();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let line = i + 3;
            let rec = rec.map_err(|e| malformed(line, e.to_string()))?;
            let parse_err = |e: &dyn std::fmt::Display| malformed(line, e.to_string());
            labels.push(&rec[0] == "1");
            let nonfinite = if rec[4].is_empty() {
                Vec::new()
            } else {
                rec[4]
                    .split(';')
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| parse_err(&e))?
            };
            rows.push(FeatureVector {
                ev_id: rec[1].to_string(),
                session_id: rec[2].to_string(),
                connection_time: DateTime::parse_from_rfc3339(&rec[3])
                    .map_err(|e| parse_err(&e))?
                    .with_timezone(&Utc),
                values: rec
                    .iter()
                    .skip(5)
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| parse_err(&e))?,
                nonfinite,
            });
        }
        LabeledDataset::new(names, target_ev, rows, labels)
    }
}
