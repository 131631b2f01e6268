//! Synthetic CC/CV charging sessions with known ground truth.
//!
//! Constant-current phase: `c = min(pilot, i_max) - d + ripple + noise`
//! (plus rare spikes), clamped at 0, while the state of charge integrates
//! the delivered energy. At `soc_switch` the current decays as
//! `c_sw * exp(-k / tau)` until the noise-free value drops below the cutoff,
//! after which it is exactly zero until disconnection.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Duration, Utc};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data_model::persist::{create, ArtifactHeader};
use crate::data_model::{ChargingSession, Fleet, Provenance, TimeSeries};
use crate::error::{Error, Result};
use crate::{par, seed};

/// Line voltage used to turn current into energy.
pub const VOLTAGE: f64 = 240.0;
/// Noise-free current at which the decay ends.
pub const CUTOFF_A: f64 = 0.2;
pub const DEFAULT_PERIOD_S: f64 = 15.0;

/// Physical parameters of one EV. Durations are in samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EVSignature {
    pub i_max: f64,
    pub soc_switch: f64,
    pub tau: f64,
    pub d: f64,
    pub ripple_amp: f64,
    pub ripple_period: f64,
    pub noise_sigma: f64,
    pub capacity_kwh: f64,
}

/// Centre of the signature distribution.
pub const NOMINAL: EVSignature = EVSignature {
    i_max: 24.0,
    soc_switch: 0.7,
    tau: 60.0,
    d: 1.0,
    ripple_amp: 0.8,
    ripple_period: 80.0,
    noise_sigma: 0.1,
    capacity_kwh: 60.0,
};

/// Half-width of each parameter's range at spread 1.
pub const DEVIATION: EVSignature = EVSignature {
    i_max: 8.0,
    soc_switch: 0.1,
    tau: 40.0,
    d: 1.0,
    ripple_amp: 0.4,
    ripple_period: 30.0,
    noise_sigma: 0.05,
    capacity_kwh: 25.0,
};

/// Minimum pairwise [`EVSignature::distance`] enforced at spread 1 (it
/// scales linearly with the spread).
pub const MIN_PAIRWISE_DISTANCE: f64 = 0.5;

impl EVSignature {
    fn as_array(&self) -> [f64; 8] {
        [
            self.i_max,
            self.soc_switch,
            self.tau,
            self.d,
            self.ripple_amp,
            self.ripple_period,
            self.noise_sigma,
            self.capacity_kwh,
        ]
    }

    fn from_array(a: [f64; 8]) -> Self {
        EVSignature {
            i_max: a[0],
            soc_switch: a[1],
            tau: a[2],
            d: a[3],
            ripple_amp: a[4],
            ripple_period: a[5],
            noise_sigma: a[6],
            capacity_kwh: a[7],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.as_array().iter().all(|v| v.is_finite())
            && self.i_max > 0.0
            && (0.6..=0.8).contains(&self.soc_switch)
            && self.tau > 0.0
            && self.d >= 0.0
            && self.ripple_amp >= 0.0
            && self.ripple_period > 0.0
            && self.noise_sigma >= 0.0
            && self.capacity_kwh > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid signature {self:?}"
            )))
        }
    }

    /// Euclidean distance with each parameter divided by its deviation.
    pub fn distance(&self, other: &EVSignature) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .zip(DEVIATION.as_array())
            .map(|((a, b), s)| ((a - b) / s).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `NOMINAL + spread * DEVIATION * u` with `u` uniform in [-1, 1]^8,
    /// clamped to physical limits.
    pub fn draw(spread: f64, rng: &mut ChaCha8Rng) -> Self {
        let lo = [6.0, 0.6, 15.0, 0.0, 0.0, 20.0, 0.0, 20.0];
        let hi = [80.0, 0.8, 400.0, 10.0, 5.0, 400.0, 1.0, 200.0];
        let mut a = [0.0; 8];
        for (j, (c, s)) in NOMINAL
            .as_array()
            .into_iter()
            .zip(DEVIATION.as_array())
            .enumerate()
        {
            let u: f64 = rng.gen_range(-1.0..=1.0);
            a[j] = (c + spread * s * u).clamp(lo[j], hi[j]);
        }
        EVSignature::from_array(a)
    }
}

/// One pilot level starting at sample `from`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotLevel {
    pub from: usize,
    pub amps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    /// Piecewise-constant pilot; change points strictly increasing, the
    /// first at sample 0.
    pub levels: Vec<PilotLevel>,
    /// Chance of one idle gap (pilot and current 0) in the CC phase.
    pub idle_gap_prob: f64,
    pub idle_gap_len: (usize, usize),
    /// Per-sample chance of a current spike in the CC phase.
    pub spike_prob: f64,
    pub spike_magnitude: f64,
    /// Zero samples after full charge before disconnection.
    pub zero_tail_len: usize,
    /// Forced disconnection, possibly before the tail.
    pub max_samples: Option<usize>,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        ScheduleSpec::constant(32.0)
    }
}

impl ScheduleSpec {
    /// Constant pilot, no disturbances.
    pub fn constant(amps: f64) -> Self {
        ScheduleSpec {
            levels: vec![PilotLevel { from: 0, amps }],
            idle_gap_prob: 0.0,
            idle_gap_len: (20, 60),
            spike_prob: 0.0,
            spike_magnitude: 0.0,
            zero_tail_len: 60,
            max_samples: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("schedule: {m}")));
        match self.levels.first() {
            Some(l) if l.from == 0 => {}
            _ => return bad("first pilot level must start at sample 0"),
        }
        if self.levels.windows(2).any(|w| w[1].from <= w[0].from) {
            return bad("change points must increase");
        }
        if self
            .levels
            .iter()
            .any(|l| !(l.amps >= 0.0 && l.amps.is_finite()))
        {
            return bad("pilot levels must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.idle_gap_prob) || !(0.0..=1.0).contains(&self.spike_prob) {
            return bad("probabilities must be in [0, 1]");
        }
        if self.idle_gap_len.0 > self.idle_gap_len.1 {
            return bad("idle gap range is reversed");
        }
        Ok(())
    }

    pub fn pilot_at(&self, t: usize) -> f64 {
        self.levels
            .iter()
            .take_while(|l| l.from <= t)
            .last()
            .map_or(0.0, |l| l.amps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMeta {
    pub session_id: String,
    pub ev_id: String,
    pub connection_time: DateTime<Utc>,
}

impl Default for SessionMeta {
    fn default() -> Self {
        SessionMeta {
            session_id: "synthetic-0".into(),
            ev_id: "synthetic".into(),
            connection_time: DateTime::from_timestamp(1_577_836_800, 0).expect("valid epoch"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub session_id: String,
    pub ev_id: String,
    /// First CV-phase sample.
    pub cv_onset: Option<usize>,
    /// First sample of the steady-zero segment.
    pub zero_onset: Option<usize>,
    pub d: f64,
    /// Mean of `pilot - (min(pilot, i_max) - d)` over active CC samples:
    /// the value the Delta series should average to.
    pub effective_offset: Option<f64>,
    pub has_tail: bool,
    /// State of charge after each sample.
    #[serde(skip)]
    pub soc: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SyntheticSession {
    pub session: ChargingSession,
    pub truth: GroundTruth,
}

/// Generates one session. Sessions cut by `max_samples` before the zero
/// segment carry no tail (`has_tail = false`).
pub fn generate_session(
    sig: &EVSignature,
    sched: &ScheduleSpec,
    soc0: f64,
    period: f64,
    seed: u64,
    meta: &SessionMeta,
) -> Result<SyntheticSession> {
    sig.validate()?;
    sched.validate()?;
    if !(0.0..1.0).contains(&soc0) {
        return Err(Error::InvalidParameter(format!(
            "soc0 {soc0} outside [0, 1)"
        )));
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidParameter("period must be > 0".into()));
    }
    let mut rng = seed::rng(seed, &[]);
    let noise = Normal::new(0.0, sig.noise_sigma).expect("sigma >= 0");
    let phase: f64 = rng.gen_range(0.0..sig.ripple_period);
    let gap = if rng.gen_bool(sched.idle_gap_prob) {
        let start = rng.gen_range(30..=300);
        Some((
            start,
            start + rng.gen_range(sched.idle_gap_len.0..=sched.idle_gap_len.1),
        ))
    } else {
        None
    };
    let cap = sched.max_samples.unwrap_or(usize::MAX);
    let joules_per_soc = sig.capacity_kwh * 3.6e6;

    let mut current = Vec::new();
    let mut pilot = Vec::new();
    let mut soc_trace = Vec::new();
    let mut soc = soc0;
    let mut offsets = Vec::new();
    let mut c_sw = None;

    // constant current
    while current.len() < cap {
        let t = current.len();
        let in_gap = gap.is_some_and(|(a, b)| (a..b).contains(&t));
        let p = if in_gap { 0.0 } else { sched.pilot_at(t) };
        let level = p.min(sig.i_max) - sig.d;
        let c = if in_gap {
            0.0
        } else {
            let ripple = sig.ripple_amp * (2.0 * PI * (t as f64 + phase) / sig.ripple_period).sin();
            let spike = if rng.gen_bool(sched.spike_prob) {
                sched.spike_magnitude
            } else {
                0.0
            };
            offsets.push(p - level);
            (level + ripple + noise.sample(&mut rng) + spike).max(0.0)
        };
        soc = (soc + c * VOLTAGE * period / joules_per_soc).min(1.0);
        current.push(c);
        pilot.push(p);
        soc_trace.push(soc);
        if soc >= sig.soc_switch {
            c_sw = Some(level.max(CUTOFF_A));
            break;
        }
        if t > 200_000 {
            return Err(Error::InvalidParameter(
                "session never reaches soc_switch".into(),
            ));
        }
    }

    // constant voltage
    let cv_onset = c_sw.map(|_| current.len());
    let mut zero_onset = None;
    if let Some(c_sw) = c_sw {
        let mut k = 0.0;
        while current.len() < cap {
            let clean = c_sw * (-k / sig.tau).exp();
            if clean < CUTOFF_A {
                zero_onset = Some(current.len());
                break;
            }
            let c = (clean + noise.sample(&mut rng)).max(0.0);
            soc = (soc + c * VOLTAGE * period / joules_per_soc).min(1.0);
            current.push(c);
            pilot.push(sched.pilot_at(current.len() - 1));
            soc_trace.push(soc);
            k += 1.0;
        }
    }
    if zero_onset.is_some() {
        for _ in 0..sched.zero_tail_len {
            if current.len() >= cap {
                break;
            }
            current.push(0.0);
            pilot.push(sched.pilot_at(current.len() - 1));
            soc_trace.push(soc);
        }
    }
    if current.len() < 2 {
        return Err(Error::InvalidParameter(
            "session shorter than two samples".into(),
        ));
    }
    let has_tail = zero_onset.is_some_and(|z| current.len() - z >= sched.zero_tail_len.min(1));
    if !has_tail {
        log::debug!("{}: disconnected before full charge", meta.session_id);
    }

    let kwh = current.iter().sum::<f64>() * VOLTAGE * period / 3.6e6;
    let n = current.len();
    let disconnection =
        meta.connection_time + Duration::milliseconds((n as f64 * period * 1000.0) as i64);
    let session = ChargingSession::new(
        meta.session_id.clone(),
        meta.ev_id.clone(),
        meta.connection_time,
        disconnection,
        kwh,
        TimeSeries::uniform(current, period)?,
        TimeSeries::uniform(pilot, period)?,
    )?;
    let effective_offset =
        (!offsets.is_empty()).then(|| offsets.iter().sum::<f64>() / offsets.len() as f64);
    Ok(SyntheticSession {
        session,
        truth: GroundTruth {
            session_id: meta.session_id.clone(),
            ev_id: meta.ev_id.clone(),
            cv_onset,
            zero_onset,
            d: sig.d,
            effective_offset,
            has_tail,
            soc: soc_trace,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetSpec {
    pub n_evs: usize,
    pub sessions_per_ev: usize,
    /// Scales every signature deviation; 0 makes all EVs identical.
    pub spread: f64,
    pub seed: u64,
    pub period: f64,
    pub pilot_amps: f64,
    /// Chance a session gets one pilot curtailment.
    pub curtail_prob: f64,
    pub idle_gap_prob: f64,
    pub spike_prob: f64,
    pub spike_magnitude: f64,
    /// Chance a session is cut before the tail.
    pub early_departure_prob: f64,
    /// Relative per-session jitter of tau.
    pub tau_jitter: f64,
    pub soc0_range: (f64, f64),
}

impl Default for FleetSpec {
    fn default() -> Self {
        FleetSpec {
            n_evs: 20,
            sessions_per_ev: 30,
            spread: 1.0,
            seed: 0,
            period: DEFAULT_PERIOD_S,
            pilot_amps: 32.0,
            curtail_prob: 0.2,
            idle_gap_prob: 0.1,
            spike_prob: 0.002,
            spike_magnitude: 6.0,
            early_departure_prob: 0.0,
            tau_jitter: 0.05,
            soc0_range: (0.1, 0.45),
        }
    }
}

impl FleetSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("fleet spec: {m}")));
        if self.n_evs == 0 || self.sessions_per_ev == 0 {
            return bad("need at least one EV and one session");
        }
        if !(self.spread >= 0.0 && self.spread.is_finite()) {
            return bad("spread must be >= 0");
        }
        for p in [
            self.curtail_prob,
            self.idle_gap_prob,
            self.spike_prob,
            self.early_departure_prob,
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad("probabilities must be in [0, 1]");
            }
        }
        let (a, b) = self.soc0_range;
        if !(0.0 <= a && a <= b && b < 0.6) {
            return bad("soc0 range must lie in [0, 0.6)");
        }
        if !(self.tau_jitter >= 0.0 && self.tau_jitter < 0.5) {
            return bad("tau jitter must be in [0, 0.5)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticFleet {
    pub fleet: Fleet,
    pub signatures: Vec<(String, EVSignature)>,
    pub truth: Vec<GroundTruth>,
}

/// Draws signatures so that no two lie closer than
/// `MIN_PAIRWISE_DISTANCE * spread` (redrawing up to 1000 times).
pub fn draw_signatures(n: usize, spread: f64, master_seed: u64) -> Vec<EVSignature> {
    let mut rng = seed::rng(master_seed, &[seed::tag::SIGNATURE]);
    let floor = MIN_PAIRWISE_DISTANCE * spread;
    let mut out: Vec<EVSignature> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut sig = EVSignature::draw(spread, &mut rng);
        for _ in 0..1000 {
            if out.iter().all(|o| o.distance(&sig) >= floor) {
                break;
            }
            sig = EVSignature::draw(spread, &mut rng);
        }
        out.push(sig);
    }
    out
}

/// Per-session schedule, soc0 and tau drawn from the fleet spec.
fn session_plan(
    spec: &FleetSpec,
    sig: &EVSignature,
    rng: &mut ChaCha8Rng,
) -> (EVSignature, ScheduleSpec, f64) {
    let mut sched = ScheduleSpec::constant(spec.pilot_amps);
    sched.idle_gap_prob = spec.idle_gap_prob;
    sched.spike_prob = spec.spike_prob;
    sched.spike_magnitude = spec.spike_magnitude;
    sched.zero_tail_len = rng.gen_range(40..=200);
    if rng.gen_bool(spec.curtail_prob) {
        let from = rng.gen_range(30..=300);
        let until = from + rng.gen_range(40..=150);
        sched.levels.push(PilotLevel {
            from,
            amps: rng.gen_range(16.0..=26.0f64).min(spec.pilot_amps),
        });
        sched.levels.push(PilotLevel {
            from: until,
            amps: spec.pilot_amps,
        });
    }
    if rng.gen_bool(spec.early_departure_prob) {
        sched.max_samples = Some(rng.gen_range(100..=600));
    }
    let soc0 = rng.gen_range(spec.soc0_range.0..=spec.soc0_range.1);
    let mut s = *sig;
    if spec.tau_jitter > 0.0 {
        s.tau *= 1.0 + rng.gen_range(-spec.tau_jitter..=spec.tau_jitter);
    }
    (s, sched, soc0)
}

/// `n_evs` EVs with `sessions_per_ev` sessions each, one session per day
/// from 2020-01-01 (connection hour varies per session).
pub fn generate_fleet(spec: &FleetSpec) -> Result<SyntheticFleet> {
    spec.validate()?;
    let signatures = draw_signatures(spec.n_evs, spec.spread, spec.seed);
    let origin = DateTime::from_timestamp(1_577_836_800, 0).expect("valid epoch");
    let jobs: Vec<(usize, usize)> = (0..spec.n_evs)
        .flat_map(|e| (0..spec.sessions_per_ev).map(move |s| (e, s)))
        .collect();
    let generated = par::map(&jobs, |&(e, s)| {
        let mut rng = seed::rng(spec.seed, &[seed::tag::SESSION, e as u64, s as u64]);
        let (sig, sched, soc0) = session_plan(spec, &signatures[e], &mut rng);
        let minutes = rng.gen_range(0..12 * 60);
        let meta = SessionMeta {
            session_id: format!("ev{e:03}-s{s:04}"),
            ev_id: format!("ev{e:03}"),
            connection_time: origin
                + Duration::days(s as i64)
                + Duration::minutes(6 * 60 + minutes),
        };
        generate_session(&sig, &sched, soc0, spec.period, rng.gen(), &meta)
    });
    let mut sessions = Vec::with_capacity(jobs.len());
    let mut truth = Vec::with_capacity(jobs.len());
    for g in generated {
        let g = g?;
        sessions.push(g.session);
        truth.push(g.truth);
    }
    Ok(SyntheticFleet {
        fleet: Fleet::new(Provenance::Synthetic, None, sessions),
        signatures: signatures
            .into_iter()
            .enumerate()
            .map(|(e, s)| (format!("ev{e:03}"), s))
            .collect(),
        truth,
    })
}

pub const TRUTH_FORMAT: &str = "evprofile.truth";
pub const TRUTH_VERSION: u32 = 1;

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum TruthLine<'a> {
    Signature {
        ev_id: &'a str,
        signature: &'a EVSignature,
    },
    Session(&'a GroundTruth),
}

/// Ground-truth side table: a header, one line per EV signature, then one
/// line per session.
pub fn persist_truth(fleet: &SyntheticFleet, spec: &FleetSpec, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    let header = ArtifactHeader::new(TRUTH_FORMAT, TRUTH_VERSION).with("spec", spec);
    writeln!(out, "{}", header.to_line()).map_err(io)?;
    for (ev_id, signature) in &fleet.signatures {
        let line = serde_json::to_string(&TruthLine::Signature { ev_id, signature })?;
        writeln!(out, "{line}").map_err(io)?;
    }
    for t in &fleet.truth {
        writeln!(out, "{}", serde_json::to_string(&TruthLine::Session(t))?).map_err(io)?;
    }
    out.flush().map_err(io)
}

#[cfg(test)]
mod tests;
