//! Canonical session records and tolerant ingestion.
//!
//! A canonical file holds one JSON record per line:
//!
//! ```text
//! {"session_id": "...", "ev_id": "...",
//!  "connection_time": "2020-01-01T08:00:00Z", "disconnection_time": "...",
//!  "kwh": 7.2, "t": [...], "current_a": [...], "pilot_a": [...]}
//! ```
//!
//! `t` holds seconds since connection. A record may carry a separate
//! `t_pilot` array when the pilot was sampled on its own grid; the two
//! series are then intersected on timestamp. An optional first line is the
//! versioned artifact header.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::persist::{
    header_fleet_meta, read_lines, ArtifactHeader, SESSIONS_FORMAT, SESSIONS_VERSION,
};
use super::series::TimeSeries;
use super::session::{ChargingSession, Fleet, Provenance};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalRecord {
    pub session_id: String,
    pub ev_id: String,
    pub connection_time: DateTime<Utc>,
    pub disconnection_time: DateTime<Utc>,
    pub kwh: f64,
    pub t: Vec<f64>,
    pub current_a: Vec<f64>,
    pub pilot_a: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_pilot: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period_s: Option<f64>,
}

impl CanonicalRecord {
    pub fn from_session(s: &ChargingSession) -> Self {
        CanonicalRecord {
            session_id: s.session_id().to_string(),
            ev_id: s.ev_id().to_string(),
            connection_time: s.connection_time(),
            disconnection_time: s.disconnection_time(),
            kwh: s.kwh_delivered(),
            t: s.current().times().to_vec(),
            current_a: s.current().values().to_vec(),
            pilot_a: s.pilot().values().to_vec(),
            t_pilot: None,
            period_s: s.current().nominal_period(),
        }
    }

    pub fn into_session(self) -> std::result::Result<ChargingSession, SkipReason> {
        RawRecord {
            session_id: Some(self.session_id),
            ev_id: Some(self.ev_id),
            connection_time: Some(self.connection_time.to_rfc3339()),
            disconnection_time: Some(self.disconnection_time.to_rfc3339()),
            kwh: Some(self.kwh),
            t: Some(self.t),
            current_a: Some(self.current_a),
            pilot_a: Some(self.pilot_a),
            t_pilot: self.t_pilot,
            period_s: self.period_s,
        }
        .validate()
    }
}

/// Why a record was skipped during ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    MalformedRecord,
    MissingSessionId,
    MissingEvId,
    MissingTime,
    BadTimestamp,
    BadTimeOrder,
    MissingKwh,
    BadKwh,
    MissingSamples,
    LengthMismatch,
    InvalidSeries,
    NoSharedTimestamps,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::MalformedRecord => "malformed_record",
            SkipReason::MissingSessionId => "missing_session_id",
            SkipReason::MissingEvId => "missing_ev_id",
            SkipReason::MissingTime => "missing_time",
            SkipReason::BadTimestamp => "bad_timestamp",
            SkipReason::BadTimeOrder => "bad_time_order",
            SkipReason::MissingKwh => "missing_kwh",
            SkipReason::BadKwh => "bad_kwh",
            SkipReason::MissingSamples => "missing_samples",
            SkipReason::LengthMismatch => "length_mismatch",
            SkipReason::InvalidSeries => "invalid_series",
            SkipReason::NoSharedTimestamps => "no_shared_timestamps",
        }
    }
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedRecord {
    /// 1-based line (canonical files) or item index (ACN documents).
    pub line: usize,
    pub session_id: Option<String>,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub skipped: Vec<SkippedRecord>,
}

impl IngestReport {
    pub fn n_skipped(&self) -> usize {
        self.skipped.len()
    }

    pub fn counts(&self) -> BTreeMap<SkipReason, usize> {
        let mut counts = BTreeMap::new();
        for s in &self.skipped {
            *counts.entry(s.reason).or_insert(0) += 1;
        }
        counts
    }

    pub(crate) fn skip(&mut self, line: usize, session_id: Option<String>, reason: SkipReason) {
        self.skipped.push(SkippedRecord {
            line,
            session_id,
            reason,
        });
    }

    pub fn merge(&mut self, other: IngestReport) {
        self.accepted += other.accepted;
        self.skipped.extend(other.skipped);
    }
}

/// Loosely typed record: every field optional so that missing fields map to
/// reason codes instead of parse failures.
#[derive(Debug, Default, Deserialize)]
pub(crate) struct RawRecord {
    session_id: Option<String>,
    ev_id: Option<String>,
    connection_time: Option<String>,
    disconnection_time: Option<String>,
    kwh: Option<f64>,
    t: Option<Vec<f64>>,
    current_a: Option<Vec<f64>>,
    pilot_a: Option<Vec<f64>>,
    t_pilot: Option<Vec<f64>>,
    period_s: Option<f64>,
}

impl RawRecord {
    fn validate(self) -> std::result::Result<ChargingSession, SkipReason> {
        let session_id = self
            .session_id
            .filter(|s| !s.is_empty())
            .ok_or(SkipReason::MissingSessionId)?;
        let ev_id = self
            .ev_id
            .filter(|s| !s.is_empty())
            .ok_or(SkipReason::MissingEvId)?;
        let parse_time = |s: Option<String>| -> std::result::Result<DateTime<Utc>, SkipReason> {
            let s = s.ok_or(SkipReason::MissingTime)?;
            DateTime::parse_from_rfc3339(&s)
                .map(|t| t.with_timezone(&Utc))
                .map_err(|_| SkipReason::BadTimestamp)
        };
        let connection = parse_time(self.connection_time)?;
        let disconnection = parse_time(self.disconnection_time)?;
        if connection >= disconnection {
            return Err(SkipReason::BadTimeOrder);
        }
        let kwh = self.kwh.ok_or(SkipReason::MissingKwh)?;
        if !(kwh.is_finite() && kwh >= 0.0) {
            return Err(SkipReason::BadKwh);
        }
        let (t, current, pilot) = match (self.t, self.current_a, self.pilot_a) {
            (Some(t), Some(c), Some(p)) => (t, c, p),
            _ => return Err(SkipReason::MissingSamples),
        };
        let t_pilot = self.t_pilot.unwrap_or_else(|| t.clone());
        if t.len() != current.len() || t_pilot.len() != pilot.len() {
            return Err(SkipReason::LengthMismatch);
        }
        let current =
            TimeSeries::new(t, current, self.period_s).map_err(|_| SkipReason::InvalidSeries)?;
        let pilot = TimeSeries::new(t_pilot, pilot, self.period_s)
            .map_err(|_| SkipReason::InvalidSeries)?;
        ChargingSession::aligned(
            session_id,
            ev_id,
            connection,
            disconnection,
            kwh,
            &current,
            &pilot,
        )
        .map_err(|_| SkipReason::NoSharedTimestamps)
    }
}

/// Parses record lines (no header). `first_line` is the 1-based number of
/// the first line, used in the report.
pub(crate) fn parse_canonical_lines<'a>(
    lines: impl Iterator<Item = &'a str>,
    first_line: usize,
) -> (Vec<ChargingSession>, IngestReport) {
    let mut report = IngestReport::default();
    let mut sessions = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = first_line + i;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(_) => {
                report.skip(line_no, None, SkipReason::MalformedRecord);
                continue;
            }
        };
        let sid = raw.session_id.clone();
        match raw.validate() {
            Ok(s) => {
                report.accepted += 1;
                sessions.push(s);
            }
            Err(reason) => report.skip(line_no, sid, reason),
        }
    }
    (sessions, report)
}

/// Reads a canonical session file. Invalid records are skipped and listed
/// in the report; only an unreadable file or a header with the wrong
/// version is fatal.
pub fn ingest_canonical(path: &Path) -> Result<(Fleet, IngestReport)> {
    let lines = read_lines(path)?;
    let mut provenance = Provenance::Real;
    let mut cutoff = None;
    let mut skip = 0;
    if let Some(first) = lines.first() {
        if is_header_line(first) {
            let header =
                ArtifactHeader::parse_checked(path, first, SESSIONS_FORMAT, SESSIONS_VERSION)?;
            (provenance, cutoff) = header_fleet_meta(&header);
            skip = 1;
        }
    }
    let (sessions, report) =
        parse_canonical_lines(lines.iter().skip(skip).map(String::as_str), skip + 1);
    Ok((Fleet::new(provenance, cutoff, sessions), report))
}

fn is_header_line(line: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(line)
        .ok()
        .and_then(|v| v.get("format").cloned())
        .is_some()
}

/// Converts canonical records into a fleet, skipping invalid ones.
pub fn records_to_fleet(
    records: Vec<CanonicalRecord>,
    provenance: Provenance,
) -> (Fleet, IngestReport) {
    let mut report = IngestReport::default();
    let mut sessions = Vec::new();
    for (i, rec) in records.into_iter().enumerate() {
        let sid = rec.session_id.clone();
        match rec.into_session() {
            Ok(s) => {
                report.accepted += 1;
                sessions.push(s);
            }
            Err(reason) => report.skip(i + 1, Some(sid), reason),
        }
    }
    (Fleet::new(provenance, None, sessions), report)
}
