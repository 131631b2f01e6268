//! The per-series feature catalog.
//!
//! 64 statistics per series, applied to the current tail and to the Delta
//! series (128 in total). Undefined values (e.g. autocorrelation of a
//! constant series) are returned as NaN here; [`super::featurize`] maps
//! them to 0 and flags them.

use std::f64::consts::PI;

pub const SERIES_LEN: usize = 64;

pub const SERIES_FEATURE_NAMES: [&str; SERIES_LEN] = [
    "mean",
    "median",
    "std",
    "variance",
    "min",
    "max",
    "range",
    "sum",
    "rms",
    "abs_energy",
    "mean_abs_change",
    "mean_change",
    "trend_slope",
    "trend_intercept",
    "trend_r",
    "autocorr_lag1",
    "autocorr_lag2",
    "autocorr_lag3",
    "autocorr_lag4",
    "autocorr_lag5",
    "quantile_0.05",
    "quantile_0.1",
    "quantile_0.25",
    "quantile_0.75",
    "quantile_0.9",
    "quantile_0.95",
    "skewness",
    "kurtosis",
    "count_above_mean",
    "count_below_mean",
    "longest_run_above_mean",
    "longest_run_below_mean",
    "n_local_maxima",
    "n_local_minima",
    "n_mean_crossings",
    "first",
    "last",
    "length",
    "argmax",
    "argmin",
    "mean_first_decile",
    "mean_last_decile",
    "hist_entropy_10",
    "fft_abs_1",
    "fft_abs_2",
    "fft_abs_3",
    "fft_abs_4",
    "fft_abs_5",
    "fft_abs_6",
    "fft_abs_7",
    "fft_abs_8",
    "fft_abs_9",
    "fft_abs_10",
    "sum_abs_second_diff",
    "median_abs_deviation",
    "mean_abs_deviation",
    "coeff_variation",
    "ratio_beyond_1_sigma",
    "ratio_beyond_2_sigma",
    "cid_ce",
    "mean_second_derivative_central",
    "index_mass_median",
    "longest_increasing_run",
    "longest_decreasing_run",
];

const QUANTILES: [f64; 6] = [0.05, 0.1, 0.25, 0.75, 0.9, 0.95];

/// Linear-interpolated quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn longest_run(x: &[f64], pred: impl Fn(f64) -> bool) -> usize {
    let (mut best, mut cur) = (0, 0);
    for &v in x {
        if pred(v) {
            cur += 1;
            best = best.max(cur);
        } else {
            cur = 0;
        }
    }
    best
}

fn longest_step_run(x: &[f64], pred: impl Fn(f64, f64) -> bool) -> usize {
    let (mut best, mut cur) = (0, 0);
    for w in x.windows(2) {
        if pred(w[0], w[1]) {
            cur += 1;
            best = best.max(cur);
        } else {
            cur = 0;
        }
    }
    best
}

fn autocorrelation(x: &[f64], mu: f64, var: f64, lag: usize) -> f64 {
    let n = x.len();
    if n <= lag || var == 0.0 {
        return f64::NAN;
    }
    let acc: f64 = (0..n - lag).map(|t| (x[t] - mu) * (x[t + lag] - mu)).sum();
    acc / ((n - lag) as f64 * var)
}

fn dft_magnitude(x: &[f64], k: usize) -> f64 {
    let n = x.len();
    if k > n / 2 {
        return 0.0;
    }
    let w = -2.0 * PI * k as f64 / n as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for (t, &v) in x.iter().enumerate() {
        let a = w * t as f64;
        re += v * a.cos();
        im += v * a.sin();
    }
    re.hypot(im)
}

fn histogram_entropy(x: &[f64], min: f64, max: f64) -> f64 {
    const BINS: usize = 10;
    if max == min {
        return 0.0;
    }
    let mut counts = [0usize; BINS];
    let width = max - min;
    for &v in x {
        let b = (((v - min) / width) * BINS as f64).floor() as usize;
        counts[b.min(BINS - 1)] += 1;
    }
    let n = x.len() as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Evaluates the catalog on a non-empty series.
pub fn series_features(x: &[f64]) -> [f64; SERIES_LEN] {
    assert!(!x.is_empty(), "catalog needs at least one sample");
    let n = x.len();
    let nf = n as f64;
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);

    let sum: f64 = x.iter().sum();
    let mu = sum / nf;
    let dev: Vec<f64> = x.iter().map(|v| v - mu).collect();
    let m2 = dev.iter().map(|d| d * d).sum::<f64>() / nf;
    let m3 = dev.iter().map(|d| d * d * d).sum::<f64>() / nf;
    let m4 = dev.iter().map(|d| d * d * d * d).sum::<f64>() / nf;
    let std = m2.sqrt();
    let min = sorted[0];
    let max = sorted[n - 1];
    let median = quantile_sorted(&sorted, 0.5);
    let abs_energy: f64 = x.iter().map(|v| v * v).sum();

    let diffs: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let second: Vec<f64> = x.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();

    let (mean_abs_change, mean_change) = if n < 2 {
        (f64::NAN, f64::NAN)
    } else {
        (
            diffs.iter().map(|d| d.abs()).sum::<f64>() / (n - 1) as f64,
            (x[n - 1] - x[0]) / (n - 1) as f64,
        )
    };

    let (slope, intercept, r) = if n < 2 {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        let ibar = (nf - 1.0) / 2.0;
        let sxx: f64 = (0..n).map(|i| (i as f64 - ibar).powi(2)).sum();
        let sxy: f64 = (0..n).map(|i| (i as f64 - ibar) * dev[i]).sum();
        let syy = m2 * nf;
        let slope = sxy / sxx;
        let r = if syy == 0.0 {
            f64::NAN
        } else {
            sxy / (sxx * syy).sqrt()
        };
        (slope, mu - slope * ibar, r)
    };

    let skewness = if n < 3 || m2 == 0.0 {
        f64::NAN
    } else {
        m3 / m2.powf(1.5) * (nf * (nf - 1.0)).sqrt() / (nf - 2.0)
    };
    let kurtosis = if n < 4 || m2 == 0.0 {
        f64::NAN
    } else {
        let g2 = m4 / (m2 * m2) - 3.0;
        ((nf + 1.0) * g2 + 6.0) * (nf - 1.0) / ((nf - 2.0) * (nf - 3.0))
    };

    let interior = |pred: fn(f64, f64, f64) -> bool| {
        x.windows(3).filter(|w| pred(w[0], w[1], w[2])).count() as f64
    };
    let crossings = dev
        .windows(2)
        .filter(|w| (w[0] > 0.0 && w[1] < 0.0) || (w[0] < 0.0 && w[1] > 0.0))
        .count() as f64;

    let argmax = x
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > x[best] { i } else { best });
    let argmin = x
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v < x[best] { i } else { best });
    let decile = n.div_ceil(10);

    let mut abs_dev_median: Vec<f64> = x.iter().map(|v| (v - median).abs()).collect();
    abs_dev_median.sort_by(f64::total_cmp);

    let abs_total: f64 = x.iter().map(|v| v.abs()).sum();
    let index_mass_median = if abs_total == 0.0 {
        f64::NAN
    } else {
        let mut acc = 0.0;
        let mut idx = n;
        for (i, v) in x.iter().enumerate() {
            acc += v.abs();
            if acc / abs_total >= 0.5 {
                idx = i + 1;
                break;
            }
        }
        idx as f64 / nf
    };

    let mut out = [0.0; SERIES_LEN];
    out[0] = mu;
    out[1] = median;
    out[2] = std;
    out[3] = m2;
    out[4] = min;
    out[5] = max;
    out[6] = max - min;
    out[7] = sum;
    out[8] = (abs_energy / nf).sqrt();
    out[9] = abs_energy;
    out[10] = mean_abs_change;
    out[11] = mean_change;
    out[12] = slope;
    out[13] = intercept;
    out[14] = r;
    for lag in 1..=5 {
        out[14 + lag] = autocorrelation(x, mu, m2, lag);
    }
    for (i, q) in QUANTILES.iter().enumerate() {
        out[20 + i] = quantile_sorted(&sorted, *q);
    }
    out[26] = skewness;
    out[27] = kurtosis;
    out[28] = x.iter().filter(|&&v| v > mu).count() as f64;
    out[29] = x.iter().filter(|&&v| v < mu).count() as f64;
    out[30] = longest_run(x, |v| v > mu) as f64;
    out[31] = longest_run(x, |v| v < mu) as f64;
    out[32] = interior(|a, b, c| b > a && b > c);
    out[33] = interior(|a, b, c| b < a && b < c);
    out[34] = crossings;
    out[35] = x[0];
    out[36] = x[n - 1];
    out[37] = nf;
    out[38] = argmax as f64;
    out[39] = argmin as f64;
    out[40] = mean(&x[..decile]);
    out[41] = mean(&x[n - decile..]);
    out[42] = histogram_entropy(x, min, max);
    for k in 1..=10 {
        out[42 + k] = dft_magnitude(x, k);
    }
    out[53] = second.iter().map(|d| d.abs()).sum();
    out[54] = quantile_sorted(&abs_dev_median, 0.5);
    out[55] = x.iter().map(|v| (v - mu).abs()).sum::<f64>() / nf;
    out[56] = if mu == 0.0 { f64::NAN } else { std / mu };
    out[57] = x.iter().filter(|&&v| (v - mu).abs() > std).count() as f64 / nf;
    out[58] = x.iter().filter(|&&v| (v - mu).abs() > 2.0 * std).count() as f64 / nf;
    out[59] = diffs.iter().map(|d| d * d).sum::<f64>().sqrt();
    out[60] = if n < 3 {
        f64::NAN
    } else {
        second.iter().map(|d| d / 2.0).sum::<f64>() / (n - 2) as f64
    };
    out[61] = index_mass_median;
    out[62] = longest_step_run(x, |a, b| b > a) as f64;
    out[63] = longest_step_run(x, |a, b| b < a) as f64;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn get(f: &[f64; SERIES_LEN], name: &str) -> f64 {
        f[SERIES_FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .unwrap()]
    }

    #[test]
    fn names_are_unique() {
        let set: std::collections::BTreeSet<_> = SERIES_FEATURE_NAMES.iter().collect();
        assert_eq!(set.len(), SERIES_LEN);
    }

    #[test]
    fn constant_series() {
        let f = series_features(&[3.5; 30]);
        for name in [
            "mean",
            "median",
            "min",
            "max",
            "first",
            "last",
            "quantile_0.05",
        ] {
            assert_eq!(get(&f, name), 3.5, "{name}");
        }
        assert_eq!(get(&f, "std"), 0.0);
        assert_eq!(get(&f, "trend_slope"), 0.0);
        assert_eq!(get(&f, "hist_entropy_10"), 0.0);
        for lag in 1..=5 {
            assert!(get(&f, &format!("autocorr_lag{lag}")).is_nan());
        }
        assert!(get(&f, "skewness").is_nan());
        assert!(get(&f, "trend_r").is_nan());
    }

    #[test]
    fn ramp_arithmetic() {
        let f = series_features(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(get(&f, "trend_slope"), 1.0);
        assert_eq!(get(&f, "trend_intercept"), 1.0);
        assert_eq!(get(&f, "mean_abs_change"), 1.0);
        assert_eq!(get(&f, "abs_energy"), 30.0);
        assert_eq!(get(&f, "median"), 2.5);
        assert_eq!(get(&f, "longest_increasing_run"), 3.0);
        assert!((get(&f, "trend_r") - 1.0).abs() < 1e-12);
        // n = 4: only k <= 2 has an rfft coefficient
        assert_eq!(get(&f, "fft_abs_3"), 0.0);
        assert!((get(&f, "fft_abs_2") - 2.0).abs() < 1e-12);
    }
}
