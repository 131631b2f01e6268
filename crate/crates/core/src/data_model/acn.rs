//! Adapter for ACN-Data session documents.
//!
//! Accepts the API response shape (`{"_items": [...]}`), a bare array of
//! session documents, or one document per line. Fields used:
//!
//! | ACN field                       | canonical          |
//! |---------------------------------|--------------------|
//! | `sessionID`                     | `session_id`       |
//! | `userID` (null = anonymous)     | `ev_id`            |
//! | `connectionTime`                | `connection_time`  |
//! | `disconnectTime`                | `disconnection_time` |
//! | `kWhDelivered`                  | `kwh`              |
//! | `chargingCurrent.{timestamps,current}` | `t`, `current_a` |
//! | `pilotSignal.{timestamps,pilot}`       | `pilot_a` (intersected on time) |
//!
//! Times may be RFC 2822 strings (the API's `"Wed, 25 Apr 2018 11:08:04 GMT"`),
//! RFC 3339 strings, or Unix seconds.

use std::path::Path;

use chrono::{DateTime, TimeZone, Utc};
use serde_json::Value;

use super::ingest::{CanonicalRecord, IngestReport, SkipReason};
use super::persist::read_lines;
use super::series::intersect_on_time;
use crate::error::{Error, Result};

pub fn parse_acn_time(v: &Value) -> Option<DateTime<Utc>> {
    match v {
        Value::String(s) => DateTime::parse_from_rfc2822(s)
            .or_else(|_| DateTime::parse_from_rfc3339(s))
            .ok()
            .map(|t| t.with_timezone(&Utc)),
        Value::Number(n) => {
            let secs = n.as_f64()?;
            let whole = secs.floor();
            let nanos = ((secs - whole) * 1e9).round() as u32;
            Utc.timestamp_opt(whole as i64, nanos.min(999_999_999))
                .single()
        }
        _ => None,
    }
}

/// Splits a response document into its session documents.
pub fn session_documents(doc: &Value) -> Vec<&Value> {
    match doc {
        Value::Array(items) => items.iter().collect(),
        Value::Object(map) => match map.get("_items") {
            Some(Value::Array(items)) => items.iter().collect(),
            _ => vec![doc],
        },
        _ => Vec::new(),
    }
}

fn id_string(v: Option<&Value>) -> Option<String> {
    match v? {
        Value::String(s) if !s.is_empty() => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn sample_series(
    obj: Option<&Value>,
    value_key: &str,
    origin: DateTime<Utc>,
) -> std::result::Result<(Vec<f64>, Vec<f64>), SkipReason> {
    let obj = obj.ok_or(SkipReason::MissingSamples)?;
    let stamps = obj
        .get("timestamps")
        .and_then(Value::as_array)
        .ok_or(SkipReason::MissingSamples)?;
    let values = obj
        .get(value_key)
        .and_then(Value::as_array)
        .ok_or(SkipReason::MissingSamples)?;
    if stamps.len() != values.len() {
        return Err(SkipReason::LengthMismatch);
    }
    let mut t = Vec::with_capacity(stamps.len());
    for s in stamps {
        let at = parse_acn_time(s).ok_or(SkipReason::BadTimestamp)?;
        t.push((at - origin).num_milliseconds() as f64 / 1000.0);
    }
    let v = values
        .iter()
        .map(|x| x.as_f64().ok_or(SkipReason::InvalidSeries))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((t, v))
}

fn adapt_one(doc: &Value) -> std::result::Result<CanonicalRecord, SkipReason> {
    let session_id = id_string(doc.get("sessionID")).ok_or(SkipReason::MissingSessionId)?;
    let ev_id = id_string(doc.get("userID")).ok_or(SkipReason::MissingEvId)?;
    let connection = doc.get("connectionTime").ok_or(SkipReason::MissingTime)?;
    let disconnection = doc.get("disconnectTime").ok_or(SkipReason::MissingTime)?;
    let connection_time = parse_acn_time(connection).ok_or(SkipReason::BadTimestamp)?;
    let disconnection_time = parse_acn_time(disconnection).ok_or(SkipReason::BadTimestamp)?;
    let kwh = doc
        .get("kWhDelivered")
        .ok_or(SkipReason::MissingKwh)?
        .as_f64()
        .ok_or(SkipReason::BadKwh)?;
    let (ct, cv) = sample_series(doc.get("chargingCurrent"), "current", connection_time)?;
    let (pt, pv) = sample_series(doc.get("pilotSignal"), "pilot", connection_time)?;
    let (t, current_a, pilot_a) = intersect_on_time(&ct, &cv, &pt, &pv);
    if t.is_empty() {
        return Err(SkipReason::NoSharedTimestamps);
    }
    Ok(CanonicalRecord {
        session_id,
        ev_id,
        connection_time,
        disconnection_time,
        kwh,
        t,
        current_a,
        pilot_a,
        t_pilot: None,
        period_s: None,
    })
}

/// Maps session documents to canonical records. Anonymous sessions and
/// documents without sample arrays are skipped with a reason code.
/// Records are not validated beyond the mapping; conversion to sessions
/// applies the session invariants.
pub fn adapt_acn_payload(doc: &Value) -> (Vec<CanonicalRecord>, IngestReport) {
    let mut report = IngestReport::default();
    let mut records = Vec::new();
    for (i, item) in session_documents(doc).into_iter().enumerate() {
        match adapt_one(item) {
            Ok(r) => {
                report.accepted += 1;
                records.push(r);
            }
            Err(reason) => report.skip(i + 1, id_string(item.get("sessionID")), reason),
        }
    }
    (records, report)
}

/// Reads an ACN document from disk: a single JSON document, or one JSON
/// document per line.
pub fn read_acn_file(path: &Path) -> Result<(Vec<CanonicalRecord>, IngestReport)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if let Ok(doc) = serde_json::from_str::<Value>(&text) {
        return Ok(adapt_acn_payload(&doc));
    }
    let mut records = Vec::new();
    let mut report = IngestReport::default();
    for (i, line) in read_lines(path)?.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Value>(line) {
            Ok(doc) => {
                let (r, mut rep) = adapt_acn_payload(&doc);
                for s in &mut rep.skipped {
                    s.line = i + 1;
                }
                records.extend(r);
                report.merge(rep);
            }
            Err(_) => report.skip(i + 1, None, SkipReason::MalformedRecord),
        }
    }
    Ok((records, report))
}
