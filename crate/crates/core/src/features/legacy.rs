//! The 18-entry legacy feature set: eight statistics for each of the
//! current and pilot tails, then energy delivered and session duration.

use std::collections::BTreeMap;

use super::catalog::{series_features, SERIES_FEATURE_NAMES};

pub const LEGACY_LEN: usize = 18;

const PER_TAIL: [&str; 8] = [
    "mean",
    "mode",
    "median",
    "max",
    "std",
    "autocorr_lag1",
    "length",
    "trend_slope",
];

pub fn legacy_names() -> Vec<String> {
    let mut names = Vec::with_capacity(LEGACY_LEN);
    for series in ["current_tail", "pilot_tail"] {
        names.extend(PER_TAIL.iter().map(|f| format!("{series}__{f}")));
    }
    names.push("kwh_delivered".into());
    names.push("duration_s".into());
    names
}

/// Mode of the values rounded to 0.1 A; ties go to the smallest value.
pub fn rounded_mode(x: &[f64]) -> f64 {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for v in x {
        *counts.entry((v * 10.0).round() as i64).or_insert(0) += 1;
    }
    let mut best = (i64::MIN, 0);
    for (&key, &count) in &counts {
        if count > best.1 {
            best = (key, count);
        }
    }
    best.0 as f64 / 10.0
}

fn tail_stats(x: &[f64]) -> [f64; 8] {
    let f = series_features(x);
    let pick = |name: &str| {
        f[SERIES_FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .unwrap()]
    };
    [
        pick("mean"),
        rounded_mode(x),
        pick("median"),
        pick("max"),
        pick("std"),
        pick("autocorr_lag1"),
        pick("length"),
        pick("trend_slope"),
    ]
}

/// Raw legacy values (NaN where undefined).
pub fn legacy_values(tail_c: &[f64], tail_p: &[f64], kwh: f64, duration_s: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(LEGACY_LEN);
    v.extend(tail_stats(tail_c));
    v.extend(tail_stats(tail_p));
    v.push(kwh);
    v.push(duration_s);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_rounds_to_tenths() {
        assert_eq!(rounded_mode(&[2.0, 2.0, 2.0]), 2.0);
        assert_eq!(rounded_mode(&[1.04, 0.96, 3.0]), 1.0);
        assert_eq!(rounded_mode(&[5.0, 4.0]), 4.0);
    }

    #[test]
    fn layout() {
        let v = legacy_values(&[2.0, 2.0, 2.0], &[2.0, 2.0, 2.0], 7.2, 3600.0);
        assert_eq!(v.len(), LEGACY_LEN);
        assert_eq!(legacy_names().len(), LEGACY_LEN);
        assert_eq!(v[1], 2.0);
        assert_eq!(v[9], 2.0);
        assert_eq!(&v[16..], &[7.2, 3600.0]);
    }
}
