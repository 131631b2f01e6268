use crate::error::{Error, Result};

/// Causal moving average: `y[t]` is the mean of the `n_avg` samples ending
/// at `t`. Near the head the window is truncated to the samples available.
///
/// Each window is summed afresh rather than kept as a running sum, so a
/// constant stretch filters to exactly that constant (a running sum drifts
/// by a few ulps, which later turns undefined statistics into noise).
pub fn moving_average(values: &[f64], n_avg: usize) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Empty("moving_average input"));
    }
    if n_avg == 0 {
        return Err(Error::InvalidParameter("n_avg must be at least 1".into()));
    }
    Ok((0..values.len())
        .map(|t| {
            let window = &values[(t + 1).saturating_sub(n_avg)..=t];
            window.iter().sum::<f64>() / window.len() as f64
        })
        .collect())
}

/// Bounds `[lo, hi]` (inclusive) of the median window centred on `t`:
/// `[t - floor(n/2), t + ceil(n/2)]` clipped to the array.
pub fn median_window(len: usize, t: usize, n_avg: usize) -> (usize, usize) {
    let lo = t.saturating_sub(n_avg / 2);
    let hi = (t + n_avg.div_ceil(2)).min(len - 1);
    (lo, hi)
}

/// Median of `values[lo..=hi]` for the window around `t`. Even-sized
/// windows average the two middle values.
pub fn moving_median(values: &[f64], t: usize, n_avg: usize) -> f64 {
    let (lo, hi) = median_window(values.len(), t, n_avg);
    let mut buf = values[lo..=hi].to_vec();
    median_in_place(&mut buf)
}

/// Moving median at every index in `0..end`.
pub fn moving_median_prefix(values: &[f64], end: usize, n_avg: usize) -> Vec<f64> {
    let mut buf = Vec::with_capacity(n_avg + 1);
    (0..end)
        .map(|t| {
            let (lo, hi) = median_window(values.len(), t, n_avg);
            buf.clear();
            buf.extend_from_slice(&values[lo..=hi]);
            median_in_place(&mut buf)
        })
        .collect()
}

pub(crate) fn median_in_place(buf: &mut [f64]) -> f64 {
    let n = buf.len();
    debug_assert!(n > 0);
    buf.sort_unstable_by(f64::total_cmp);
    if n % 2 == 1 {
        buf[n / 2]
    } else {
        0.5 * (buf[n / 2 - 1] + buf[n / 2])
    }
}
