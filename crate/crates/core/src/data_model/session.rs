use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::series::{intersect_on_time, TimeSeries};
use crate::error::{Error, Result};

/// One charging event with paired current and pilot series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargingSession {
    session_id: String,
    ev_id: String,
    connection_time: DateTime<Utc>,
    disconnection_time: DateTime<Utc>,
    kwh_delivered: f64,
    current: TimeSeries,
    pilot: TimeSeries,
}

impl ChargingSession {
    /// Builds a session whose current and pilot already share timestamps.
    pub fn new(
        session_id: impl Into<String>,
        ev_id: impl Into<String>,
        connection_time: DateTime<Utc>,
        disconnection_time: DateTime<Utc>,
        kwh_delivered: f64,
        current: TimeSeries,
        pilot: TimeSeries,
    ) -> Result<Self> {
        let session_id = session_id.into();
        let ev_id = ev_id.into();
        let invalid = |reason: &str| Error::InvalidSession {
            session_id: session_id.clone(),
            reason: reason.to_string(),
        };
        if ev_id.is_empty() {
            return Err(invalid("empty ev_id"));
        }
        if connection_time >= disconnection_time {
            return Err(invalid("connection_time not before disconnection_time"));
        }
        if !(kwh_delivered.is_finite() && kwh_delivered >= 0.0) {
            return Err(invalid("kwh_delivered must be finite and non-negative"));
        }
        if current.times() != pilot.times() {
            return Err(invalid("current and pilot timestamps differ"));
        }
        Ok(ChargingSession {
            session_id,
            ev_id,
            connection_time,
            disconnection_time,
            kwh_delivered,
            current,
            pilot,
        })
    }

    /// Builds a session from independently sampled current and pilot series,
    /// keeping only the timestamps present in both.
    #[allow(clippy::too_many_arguments)]
    pub fn aligned(
        session_id: impl Into<String>,
        ev_id: impl Into<String>,
        connection_time: DateTime<Utc>,
        disconnection_time: DateTime<Utc>,
        kwh_delivered: f64,
        current: &TimeSeries,
        pilot: &TimeSeries,
    ) -> Result<Self> {
        let session_id = session_id.into();
        let (times, c, p) = intersect_on_time(
            current.times(),
            current.values(),
            pilot.times(),
            pilot.values(),
        );
        if times.is_empty() {
            return Err(Error::InvalidSession {
                session_id,
                reason: "current and pilot share no timestamps".into(),
            });
        }
        let period = current.nominal_period().or(pilot.nominal_period());
        let current = TimeSeries::new(times.clone(), c, period)?;
        let pilot = TimeSeries::new(times, p, period)?;
        Self::new(
            session_id,
            ev_id,
            connection_time,
            disconnection_time,
            kwh_delivered,
            current,
            pilot,
        )
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn ev_id(&self) -> &str {
        &self.ev_id
    }

    pub fn connection_time(&self) -> DateTime<Utc> {
        self.connection_time
    }

    pub fn disconnection_time(&self) -> DateTime<Utc> {
        self.disconnection_time
    }

    pub fn kwh_delivered(&self) -> f64 {
        self.kwh_delivered
    }

    pub fn current(&self) -> &TimeSeries {
        &self.current
    }

    pub fn pilot(&self) -> &TimeSeries {
        &self.pilot
    }

    pub fn duration_seconds(&self) -> f64 {
        (self.disconnection_time - self.connection_time).num_milliseconds() as f64 / 1000.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Real,
    Synthetic,
}

/// Sessions grouped by EV. Each group is kept in chronological order
/// (connection time, then session id).
#[derive(Debug, Clone, PartialEq)]
pub struct Fleet {
    provenance: Provenance,
    cutoff: Option<DateTime<Utc>>,
    groups: BTreeMap<String, Vec<ChargingSession>>,
}

impl Fleet {
    pub fn new(
        provenance: Provenance,
        cutoff: Option<DateTime<Utc>>,
        sessions: impl IntoIterator<Item = ChargingSession>,
    ) -> Self {
        let mut groups: BTreeMap<String, Vec<ChargingSession>> = BTreeMap::new();
        for s in sessions {
            groups.entry(s.ev_id.clone()).or_default().push(s);
        }
        for group in groups.values_mut() {
            group.sort_by(|a, b| {
                a.connection_time
                    .cmp(&b.connection_time)
                    .then_with(|| a.session_id.cmp(&b.session_id))
            });
        }
        Fleet {
            provenance,
            cutoff,
            groups,
        }
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn cutoff(&self) -> Option<DateTime<Utc>> {
        self.cutoff
    }

    pub fn n_evs(&self) -> usize {
        self.groups.len()
    }

    pub fn n_sessions(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn ev_ids(&self) -> impl Iterator<Item = &str> {
        self.groups.keys().map(String::as_str)
    }

    pub fn sessions_of(&self, ev_id: &str) -> &[ChargingSession] {
        self.groups.get(ev_id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn groups(&self) -> impl Iterator<Item = (&str, &[ChargingSession])> {
        self.groups.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// All sessions, EV by EV in id order, chronological within an EV.
    pub fn sessions(&self) -> impl Iterator<Item = &ChargingSession> {
        self.groups.values().flatten()
    }

    pub fn into_sessions(self) -> impl Iterator<Item = ChargingSession> {
        self.groups.into_values().flatten()
    }

    /// Drops sessions connected after `cutoff` (and EVs left without any).
    pub fn with_cutoff(self, cutoff: DateTime<Utc>) -> Fleet {
        let provenance = self.provenance;
        let kept: Vec<_> = self
            .into_sessions()
            .filter(|s| s.connection_time <= cutoff)
            .collect();
        Fleet::new(provenance, Some(cutoff), kept)
    }

    /// Keeps only the sessions accepted by `keep`; empty groups are removed.
    pub fn retain(self, mut keep: impl FnMut(&ChargingSession) -> bool) -> Fleet {
        let Fleet {
            provenance,
            cutoff,
            groups,
        } = self;
        let groups = groups
            .into_iter()
            .filter_map(|(ev, sessions)| {
                let kept: Vec<_> = sessions.into_iter().filter(|s| keep(s)).collect();
                (!kept.is_empty()).then_some((ev, kept))
            })
            .collect();
        Fleet {
            provenance,
            cutoff,
            groups,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::uniform(v.to_vec(), 1.0).unwrap()
    }

    fn t0() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2020, 1, 1, 8, 0, 0).unwrap()
    }

    #[test]
    fn session_invariants() {
        let later = t0() + chrono::Duration::hours(1);
        assert!(ChargingSession::new("s", "", t0(), later, 1.0, ts(&[1.0]), ts(&[1.0])).is_err());
        assert!(ChargingSession::new("s", "ev", later, t0(), 1.0, ts(&[1.0]), ts(&[1.0])).is_err());
        assert!(
            ChargingSession::new("s", "ev", t0(), later, -1.0, ts(&[1.0]), ts(&[1.0])).is_err()
        );
        assert!(
            ChargingSession::new("s", "ev", t0(), later, 1.0, ts(&[1.0, 2.0]), ts(&[1.0])).is_err()
        );
        let s = ChargingSession::new("s", "ev", t0(), later, 1.0, ts(&[1.0]), ts(&[2.0])).unwrap();
        assert_eq!(s.duration_seconds(), 3600.0);
    }

    #[test]
    fn aligned_intersects_timestamps() {
        // 5-point toy: pilot misses t=1 and has t=2.5 instead of t=3.
        let current = TimeSeries::new(
            vec![0.0, 1.0, 2.0, 3.0, 4.0],
            vec![10.0, 11.0, 12.0, 13.0, 14.0],
            None,
        )
        .unwrap();
        let pilot = TimeSeries::new(
            vec![0.0, 2.0, 2.5, 4.0, 5.0],
            vec![32.0, 32.0, 30.0, 30.0, 30.0],
            None,
        )
        .unwrap();
        let later = t0() + chrono::Duration::hours(1);
        let s = ChargingSession::aligned("s", "ev", t0(), later, 1.0, &current, &pilot).unwrap();
        assert_eq!(s.current().times(), &[0.0, 2.0, 4.0]);
        assert_eq!(s.current().values(), &[10.0, 12.0, 14.0]);
        assert_eq!(s.pilot().values(), &[32.0, 32.0, 30.0]);
    }

    #[test]
    fn fleet_groups_chronologically() {
        let mk = |id: &str, ev: &str, h: i64| {
            let c = t0() + chrono::Duration::hours(h);
            ChargingSession::new(
                id,
                ev,
                c,
                c + chrono::Duration::hours(1),
                1.0,
                ts(&[1.0]),
                ts(&[1.0]),
            )
            .unwrap()
        };
        let fleet = Fleet::new(
            Provenance::Real,
            None,
            vec![mk("b", "ev1", 5), mk("a", "ev1", 1), mk("c", "ev2", 0)],
        );
        assert_eq!(fleet.n_evs(), 2);
        let ids: Vec<_> = fleet
            .sessions_of("ev1")
            .iter()
            .map(|s| s.session_id())
            .collect();
        assert_eq!(ids, ["a", "b"]);
        let cut = fleet.with_cutoff(t0() + chrono::Duration::hours(2));
        assert_eq!(cut.n_sessions(), 2);
    }
}
