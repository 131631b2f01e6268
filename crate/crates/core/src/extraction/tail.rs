use serde::{Deserialize, Serialize};

use super::filter::{moving_average, moving_median_prefix};
use crate::data_model::ChargingSession;
use crate::error::{Error, Result};

/// Parameters of the backward tail walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailParams {
    /// Moving-average (and moving-median) window, in samples.
    pub n_avg: usize,
    /// Largest forward rise `y[t] - y[t-1]` still counted as tail.
    pub epsilon: f64,
    /// Consecutive rising samples that end the walk.
    pub t_max: usize,
    /// Filtered current below this is "steady zero".
    pub zero_threshold: f64,
    /// Shorter tails are discarded.
    pub min_tail_len: usize,
}

impl Default for TailParams {
    fn default() -> Self {
        TailParams::with_window(25)
    }
}

impl TailParams {
    /// Defaults with the given window; `min_tail_len` follows the window.
    pub fn with_window(n_avg: usize) -> Self {
        TailParams {
            n_avg,
            epsilon: 0.01,
            t_max: 10,
            zero_threshold: 0.1,
            min_tail_len: n_avg,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.n_avg < 1 {
            return bad("n_avg must be >= 1");
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be > 0");
        }
        if self.t_max < 1 {
            return bad("t_max must be >= 1");
        }
        if !(self.zero_threshold >= 0.0 && self.zero_threshold.is_finite()) {
            return bad("zero threshold must be >= 0");
        }
        if self.min_tail_len < 1 {
            return bad("min_tail_len must be >= 1");
        }
        Ok(())
    }
}

/// Filtered current and pilot over `[t_start - s, t_start]` (s + 1 samples).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    pub current_values: Vec<f64>,
    pub pilot_values: Vec<f64>,
    pub t_start: usize,
    pub s: usize,
}

impl Tail {
    /// First sample index of the tail.
    pub fn begin(&self) -> usize {
        self.t_start - self.s
    }
}

/// `p[t] - median(c around t)` over the constant-current phase `[0, begin)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSeries {
    pub values: Vec<f64>,
    pub n_avg: usize,
}

/// First index of the final run of values below `zero_threshold`, if that
/// run reaches the end of the series.
pub fn find_t_start(filtered_current: &[f64], zero_threshold: f64) -> Option<usize> {
    let below = |v: &f64| *v < zero_threshold;
    if !filtered_current.last().is_some_and(below) {
        return None;
    }
    let run = filtered_current
        .iter()
        .rev()
        .take_while(|v| below(v))
        .count();
    Some(filtered_current.len() - run)
}

/// Length `s` of the backward walk from `t_start`.
///
/// Each step compares `y[t] - y[t-1]` against `epsilon`: a rise above it
/// bumps the consecutive-rise counter, anything else resets the counter and
/// extends the tail. The walk stops once the counter reaches `t_max` or
/// `t` reaches 1.
pub fn tail_length(filtered_current: &[f64], t_start: usize, epsilon: f64, t_max: usize) -> usize {
    let mut rising = 0;
    let mut s = 0;
    for t in (1..=t_start).rev() {
        if filtered_current[t] - filtered_current[t - 1] > epsilon {
            rising += 1;
        } else {
            rising = 0;
            s += 1;
        }
        if rising == t_max {
            break;
        }
    }
    s
}

/// Locates the constant-voltage tail of a session, if it has one.
pub fn extract_tail(session: &ChargingSession, params: &TailParams) -> Option<Tail> {
    extract_tail_from(session.current().values(), session.pilot().values(), params)
}

/// [`extract_tail`] over raw value arrays.
pub fn extract_tail_from(current: &[f64], pilot: &[f64], params: &TailParams) -> Option<Tail> {
    let c = moving_average(current, params.n_avg).ok()?;
    let p = moving_average(pilot, params.n_avg).ok()?;
    tail_from_filtered(&c, &p, params)
}

/// [`extract_tail_from`] on series that are already moving-averaged.
pub fn tail_from_filtered(c: &[f64], p: &[f64], params: &TailParams) -> Option<Tail> {
    let t_start = find_t_start(c, params.zero_threshold)?;
    let s = tail_length(c, t_start, params.epsilon, params.t_max);
    if s < params.min_tail_len {
        return None;
    }
    let range = t_start - s..=t_start;
    Some(Tail {
        current_values: c[range.clone()].to_vec(),
        pilot_values: p[range].to_vec(),
        t_start,
        s,
    })
}

/// Delta series of a session whose tail begins at `tail_begin`.
pub fn compute_delta(
    session: &ChargingSession,
    tail_begin: usize,
    n_avg: usize,
) -> Result<DeltaSeries> {
    compute_delta_from(
        session.current().values(),
        session.pilot().values(),
        tail_begin,
        n_avg,
    )
}

pub fn compute_delta_from(
    current: &[f64],
    pilot: &[f64],
    tail_begin: usize,
    n_avg: usize,
) -> Result<DeltaSeries> {
    if tail_begin == 0 {
        return Err(Error::NoConstantCurrentPhase);
    }
    if tail_begin > current.len() || current.len() != pilot.len() {
        return Err(Error::InvalidParameter(format!(
            "tail begin {tail_begin} outside series of length {}",
            current.len()
        )));
    }
    let medians = moving_median_prefix(current, tail_begin, n_avg);
    let values = pilot[..tail_begin]
        .iter()
        .zip(&medians)
        .map(|(p, m)| p - m)
        .collect();
    Ok(DeltaSeries { values, n_avg })
}

/// Tail and Delta series of one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionExtract {
    pub tail: Tail,
    pub delta: DeltaSeries,
}

/// Tail plus Delta, or `None` when the session has no tail or no
/// constant-current phase before it.
pub fn extract_session(session: &ChargingSession, params: &TailParams) -> Option<SessionExtract> {
    let tail = extract_tail(session, params)?;
    let delta = compute_delta(session, tail.begin(), params.n_avg).ok()?;
    Some(SessionExtract { tail, delta })
}
