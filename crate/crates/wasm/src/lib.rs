//! Bindings for the static demo page: simulate one charging session,
//! locate its tail and Delta series, and compute the feature catalog.
//!
//! Every export returns a JSON string; failures come back as
//! `{"error": "..."}` so the page needs no exception plumbing.

use evprofile::extraction::filter::moving_median_prefix;
use evprofile::extraction::tail::{compute_delta_from, tail_from_filtered};
use evprofile::extraction::{moving_average, TailParams};
use evprofile::features::{featurize, CatalogMode};
use evprofile::synth::{generate_session, EVSignature, ScheduleSpec, SessionMeta, NOMINAL};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct Simulated {
    pub current: Vec<f64>,
    pub pilot: Vec<f64>,
    pub cv_onset: Option<usize>,
    pub zero_onset: Option<usize>,
    pub effective_offset: Option<f64>,
}

/// One session of an EV whose signature is the nominal one with the given
/// overrides.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    i_max: f64,
    soc_switch: f64,
    tau: f64,
    d: f64,
    ripple_amp: f64,
    noise_sigma: f64,
    pilot_amps: f64,
    soc0: f64,
    seed: u64,
) -> evprofile::Result<Simulated> {
    let sig = EVSignature {
        i_max,
        soc_switch,
        tau,
        d,
        ripple_amp,
        noise_sigma,
        ..NOMINAL
    };
    let s = generate_session(
        &sig,
        &ScheduleSpec::constant(pilot_amps),
        soc0,
        evprofile::synth::DEFAULT_PERIOD_S,
        seed,
        &SessionMeta::default(),
    )?;
    Ok(Simulated {
        current: s.session.current().values().to_vec(),
        pilot: s.session.pilot().values().to_vec(),
        cv_onset: s.truth.cv_onset,
        zero_onset: s.truth.zero_onset,
        effective_offset: s.truth.effective_offset,
    })
}

#[derive(Debug, Serialize)]
pub struct Extracted {
    pub filtered_current: Vec<f64>,
    pub filtered_pilot: Vec<f64>,
    /// Tail onset at steady zero and walk length; absent without a tail.
    pub t_start: Option<usize>,
    pub s: Option<usize>,
    pub begin: Option<usize>,
    /// Moving median of the raw current over `[0, begin)`.
    pub median: Vec<f64>,
    pub delta: Vec<f64>,
    pub delta_mean: Option<f64>,
}

pub fn extract(
    current: &[f64],
    pilot: &[f64],
    params: &TailParams,
) -> evprofile::Result<Extracted> {
    params.validate()?;
    if current.len() != pilot.len() {
        return Err(evprofile::Error::DimensionMismatch {
            expected: current.len(),
            got: pilot.len(),
        });
    }
    let c = moving_average(current, params.n_avg)?;
    let p = moving_average(pilot, params.n_avg)?;
    let mut out = Extracted {
        filtered_current: c.clone(),
        filtered_pilot: p.clone(),
        t_start: None,
        s: None,
        begin: None,
        median: Vec::new(),
        delta: Vec::new(),
        delta_mean: None,
    };
    if let Some(tail) = tail_from_filtered(&c, &p, params) {
        out.t_start = Some(tail.t_start);
        out.s = Some(tail.s);
        out.begin = Some(tail.begin());
        if tail.begin() > 0 {
            out.median = moving_median_prefix(current, tail.begin(), params.n_avg);
            out.delta = compute_delta_from(current, pilot, tail.begin(), params.n_avg)?.values;
            out.delta_mean = Some(out.delta.iter().sum::<f64>() / out.delta.len() as f64);
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct Feature {
    pub name: String,
    pub value: f64,
}

/// The 128-entry catalog for a session, or an error when it has no usable
/// tail and constant-current phase.
pub fn features(
    current: &[f64],
    pilot: &[f64],
    params: &TailParams,
) -> evprofile::Result<Vec<Feature>> {
    let c = moving_average(current, params.n_avg)?;
    let p = moving_average(pilot, params.n_avg)?;
    let tail = tail_from_filtered(&c, &p, params)
        .ok_or_else(|| evprofile::Error::InvalidParameter("session has no tail".into()))?;
    let delta = compute_delta_from(current, pilot, tail.begin(), params.n_avg)?;
    let values = featurize(&tail, &delta, params)?;
    Ok(CatalogMode::Modern
        .names()
        .iter()
        .zip(values.values)
        .map(|(name, value)| Feature {
            name: name.clone(),
            value,
        })
        .collect())
}

fn to_json<T: Serialize>(r: evprofile::Result<T>) -> String {
    let v = match r {
        Ok(v) => serde_json::to_value(v),
        Err(e) => Ok(serde_json::json!({ "error": e.to_string() })),
    };
    v.map_or_else(|e| format!("{{\"error\":\"{e}\"}}"), |v| v.to_string())
}

fn params(n_avg: usize, epsilon: f64, t_max: usize, zeta: f64) -> TailParams {
    TailParams {
        n_avg,
        epsilon,
        t_max,
        zero_threshold: zeta,
        min_tail_len: n_avg.max(1),
    }
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate_session(
    i_max: f64,
    soc_switch: f64,
    tau: f64,
    d: f64,
    ripple_amp: f64,
    noise_sigma: f64,
    pilot_amps: f64,
    soc0: f64,
    seed: u32,
) -> String {
    to_json(simulate(
        i_max,
        soc_switch,
        tau,
        d,
        ripple_amp,
        noise_sigma,
        pilot_amps,
        soc0,
        seed as u64,
    ))
}

#[wasm_bindgen]
pub fn extract_session(
    current: &[f64],
    pilot: &[f64],
    n_avg: usize,
    epsilon: f64,
    t_max: usize,
    zeta: f64,
) -> String {
    to_json(extract(
        current,
        pilot,
        &params(n_avg, epsilon, t_max, zeta),
    ))
}

#[wasm_bindgen]
pub fn session_features(
    current: &[f64],
    pilot: &[f64],
    n_avg: usize,
    epsilon: f64,
    t_max: usize,
    zeta: f64,
) -> String {
    to_json(features(
        current,
        pilot,
        &params(n_avg, epsilon, t_max, zeta),
    ))
}
