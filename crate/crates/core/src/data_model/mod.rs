//! Canonical session representation, ingestion, eligibility filtering and
//! artifact persistence.

pub mod acn;
pub mod ingest;
pub mod persist;
pub mod series;
pub mod session;

pub use acn::{adapt_acn_payload, read_acn_file};
pub use ingest::{ingest_canonical, records_to_fleet, CanonicalRecord, IngestReport, SkipReason};
pub use persist::{load_fleet, persist_fleet, ArtifactHeader};
pub use series::TimeSeries;
pub use session::{ChargingSession, Fleet, Provenance};

use crate::extraction::{extract_tail, TailParams};

/// Sessions a retained EV must contain a detectable tail in.
pub const DEFAULT_MIN_TAILED_SESSIONS: usize = 8;

/// Drops sessions without a detectable tail, then EVs left with fewer than
/// `min_tailed_sessions` sessions. Idempotent.
pub fn filter_eligible(fleet: Fleet, min_tailed_sessions: usize, params: &TailParams) -> Fleet {
    let tailed = fleet.retain(|s| extract_tail(s, params).is_some());
    let keep: std::collections::BTreeSet<String> = tailed
        .groups()
        .filter(|(_, sessions)| sessions.len() >= min_tailed_sessions)
        .map(|(ev, _)| ev.to_string())
        .collect();
    tailed.retain(|s| keep.contains(s.ev_id()))
}
