use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sampled current or pilot signal.
///
/// Timestamps are seconds since the session's connection time. Samples are
/// processed by index downstream; `nominal_period` is informational only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    nominal_period: Option<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, nominal_period: Option<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidSeries("series has no samples".into()));
        }
        if times.len() != values.len() {
            return Err(Error::InvalidSeries(format!(
                "{} timestamps but {} values",
                times.len(),
                values.len()
            )));
        }
        if let Some(i) = times.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidSeries(format!("non-finite timestamp at {i}")));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSeries(format!(
                "timestamps not strictly increasing at {}",
                i + 1
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!("non-finite value at {i}")));
        }
        if let Some(i) = values.iter().position(|&v| v < 0.0) {
            return Err(Error::InvalidSeries(format!("negative value at {i}")));
        }
        if let Some(p) = nominal_period {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidSeries(format!("bad nominal period {p}")));
            }
        }
        Ok(TimeSeries {
            times,
            values,
            nominal_period,
        })
    }

    /// Evenly spaced series starting at t = 0.
    pub fn uniform(values: Vec<f64>, period: f64) -> Result<Self> {
        let times = (0..values.len()).map(|i| i as f64 * period).collect();
        Self::new(times, values, Some(period))
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nominal_period(&self) -> Option<f64> {
        self.nominal_period
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false for a constructed series; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Keeps only the samples whose timestamps appear in both inputs.
///
/// Returns `(times, a_values, b_values)`; order and strict monotonicity of
/// the inputs carry over to the output.
pub fn intersect_on_time(
    a_times: &[f64],
    a_values: &[f64],
    b_times: &[f64],
    b_values: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (mut i, mut j) = (0, 0);
    let mut times = Vec::new();
    let mut av = Vec::new();
    let mut bv = Vec::new();
    while i < a_times.len() && j < b_times.len() {
        let (ta, tb) = (a_times[i], b_times[j]);
        if ta == tb {
            times.push(ta);
            av.push(a_values[i]);
            bv.push(b_values[j]);
            i += 1;
            j += 1;
        } else if ta < tb {
            i += 1;
        } else {
            j += 1;
        }
    }
    (times, av, bv)
}
