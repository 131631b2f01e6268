//! The tails artifact: per-session extraction results plus the session
//! metadata needed downstream (chronology, energy, duration).

use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::tail::{extract_session, SessionExtract, TailParams};
use crate::data_model::persist::{create, read_lines, ArtifactHeader};
use crate::data_model::{ChargingSession, Fleet};
use crate::error::{Error, Result};

pub const TAILS_FORMAT: &str = "evprofile.tails";
pub const TAILS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRecord {
    pub session_id: String,
    pub ev_id: String,
    pub connection_time: DateTime<Utc>,
    pub kwh: f64,
    pub duration_s: f64,
    #[serde(flatten)]
    pub extract: SessionExtract,
}

impl TailRecord {
    pub fn new(session: &ChargingSession, extract: SessionExtract) -> Self {
        TailRecord {
            session_id: session.session_id().to_string(),
            ev_id: session.ev_id().to_string(),
            connection_time: session.connection_time(),
            kwh: session.kwh_delivered(),
            duration_s: session.duration_seconds(),
            extract,
        }
    }
}

/// Extracts every session of the fleet; sessions without a usable tail are
/// counted, not returned. Output follows fleet order.
pub fn extract_fleet(fleet: &Fleet, params: &TailParams) -> (Vec<TailRecord>, usize) {
    let sessions: Vec<&ChargingSession> = fleet.sessions().collect();
    let results = crate::par::map(&sessions, |s| {
        extract_session(s, params).map(|e| TailRecord::new(s, e))
    });
    let total = results.len();
    let records: Vec<TailRecord> = results.into_iter().flatten().collect();
    let missing = total - records.len();
    (records, missing)
}

pub fn persist_tails(records: &[TailRecord], params: &TailParams, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    let header = ArtifactHeader::new(TAILS_FORMAT, TAILS_VERSION).with("params", params);
    writeln!(out, "{}", header.to_line()).map_err(io)?;
    for r in records {
        writeln!(out, "{}", serde_json::to_string(r)?).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn load_tails(path: &Path) -> Result<(Vec<TailRecord>, TailParams)> {
    let lines = read_lines(path)?;
    let first = lines.first().map(String::as_str).unwrap_or("");
    let header = ArtifactHeader::parse_checked(path, first, TAILS_FORMAT, TAILS_VERSION)?;
    let params = header
        .meta
        .get("params")
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .unwrap_or_default();
    let mut records = Vec::with_capacity(lines.len().saturating_sub(1));
    for (i, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(line).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        records.push(r);
    }
    Ok((records, params))
}
