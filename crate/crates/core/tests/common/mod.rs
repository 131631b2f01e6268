//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use evprofile::data_model::{filter_eligible, Fleet, DEFAULT_MIN_TAILED_SESSIONS};
use evprofile::extraction::{extract_fleet, TailParams};
use evprofile::features::{CatalogMode, FeatureTable};
use evprofile::synth::{generate_fleet, FleetSpec};

/// `y(t) = (1/w) * sum(c[t-w+1..=t])` with `w = min(n, t + 1)`, summed
/// afresh at every index.
pub fn brute_moving_average(c: &[f64], n: usize) -> Vec<f64> {
    (0..c.len())
        .map(|t| {
            let lo = (t + 1).saturating_sub(n);
            let w = &c[lo..=t];
            w.iter().sum::<f64>() / w.len() as f64
        })
        .collect()
}

/// Sort-based median of `c[t - n/2 ..= t + ceil(n/2)]`, clipped.
pub fn brute_moving_median(c: &[f64], t: usize, n: usize) -> f64 {
    let lo = t as i64 - (n / 2) as i64;
    let hi = t as i64 + n.div_ceil(2) as i64;
    let mut w: Vec<f64> = (lo.max(0)..=hi.min(c.len() as i64 - 1))
        .map(|i| c[i as usize])
        .collect();
    w.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = w.len();
    if m % 2 == 1 {
        w[m / 2]
    } else {
        (w[m / 2 - 1] + w[m / 2]) / 2.0
    }
}

/// Forward scan: the last position after which every value stays below
/// zeta.
pub fn literal_t_start(ct: &[f64], zeta: f64) -> Option<usize> {
    let mut start = None;
    for (i, &v) in ct.iter().enumerate() {
        if v < zeta {
            if start.is_none() {
                start = Some(i);
            }
        } else {
            start = None;
        }
    }
    start
}

/// The tail walk written out step by step, independent of the library:
/// `n = 0, s = 0; for t = t_start down to 1 { if c(t) - c(t-1) > eps
/// { n += 1 } else { n = 0; s += 1 }; if n == T_max { exit } }`.
/// Returns `(t_start, s)`.
pub fn literal_tail_walk(
    c: &[f64],
    n_avg: usize,
    eps: f64,
    t_max: usize,
    zeta: f64,
) -> Option<(usize, usize)> {
    let ct = brute_moving_average(c, n_avg);
    let t_start = literal_t_start(&ct, zeta)?;
    let mut n = 0;
    let mut s = 0;
    let mut t = t_start;
    while t >= 1 {
        if ct[t] - ct[t - 1] > eps {
            n += 1;
        } else {
            n = 0;
            s += 1;
        }
        if n == t_max {
            break;
        }
        t -= 1;
    }
    Some((t_start, s))
}

/// Synthetic fleet, eligibility filter, extraction and features.
pub fn synthetic_table(spec: &FleetSpec, mode: CatalogMode) -> (Fleet, FeatureTable) {
    let params = TailParams::default();
    let fleet = generate_fleet(spec).expect("fleet generates").fleet;
    let fleet = filter_eligible(fleet, DEFAULT_MIN_TAILED_SESSIONS, &params);
    let (tails, _) = extract_fleet(&fleet, &params);
    let table = FeatureTable::from_tails(&tails, mode, &params).expect("features");
    (fleet, table)
}

/// Exact fraction for metric oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Option<Ratio> {
        (den != 0).then_some(Ratio { num, den })
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}
