//! Library results against independent, deliberately naive oracles.

mod common;

use evprofile::classifiers::{
    self, knn, HyperParamGrid, HyperParams, KnnMetric, KnnWeights, ModelKind,
};
use evprofile::extraction::filter::moving_average as ma;
use evprofile::extraction::filter::{moving_average, moving_median};
use evprofile::extraction::{extract_session, extract_tail, find_t_start, TailParams};
use evprofile::features::selection::{chi2_scores, fit_selection_rows};
use evprofile::features::{series_features, SERIES_FEATURE_NAMES};
use evprofile::synth::{generate_fleet, FleetSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{brute_moving_average, brute_moving_median, literal_tail_walk};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn moving_average_matches_windowed_mean_on_long_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x: Vec<f64> = (0..1000).map(|_| rng.gen_range(0.0..32.0)).collect();
    let fast = moving_average(&x, 25).unwrap();
    for (a, b) in fast.iter().zip(brute_moving_average(&x, 25)) {
        assert!(close(*a, b));
    }
}

#[test]
fn moving_median_matches_sort_oracle_at_random_indices() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x: Vec<f64> = (0..500).map(|_| rng.gen_range(-5.0..5.0)).collect();
    for _ in 0..100 {
        let t = rng.gen_range(0..x.len());
        let n = rng.gen_range(1..50);
        assert_eq!(moving_median(&x, t, n), brute_moving_median(&x, t, n));
    }
}

#[test]
fn tail_walk_matches_literal_algorithm_on_constructed_series() {
    let params = TailParams {
        n_avg: 3,
        epsilon: 0.01,
        t_max: 4,
        zero_threshold: 0.1,
        min_tail_len: 1,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        // random walk that ends in a run of zeros most of the time
        let len = rng.gen_range(5..120);
        let mut x: Vec<f64> = Vec::with_capacity(len);
        let mut v: f64 = rng.gen_range(0.0..20.0);
        for _ in 0..len {
            v = (v + rng.gen_range(-2.0..1.5)).max(0.0);
            x.push(v);
        }
        if rng.gen_bool(0.8) {
            x.extend(std::iter::repeat_n(0.0, rng.gen_range(1..10)));
        }
        let oracle = literal_tail_walk(
            &x,
            params.n_avg,
            params.epsilon,
            params.t_max,
            params.zero_threshold,
        )
        .filter(|&(_, s)| s >= params.min_tail_len);
        let got =
            evprofile::extraction::extract_tail_from(&x, &x, &params).map(|t| (t.t_start, t.s));
        assert_eq!(got, oracle, "series {x:?}");
    }
}

#[test]
fn t_start_tracks_generator_zero_onset() {
    let params = TailParams::default();
    let spec = FleetSpec {
        n_evs: 20,
        sessions_per_ev: 10,
        seed: 11,
        ..FleetSpec::default()
    };
    let fleet = generate_fleet(&spec).unwrap();
    let mut hits = 0;
    let mut tailed = 0;
    for (s, truth) in fleet.fleet.sessions().zip(&fleet.truth) {
        assert_eq!(s.session_id(), truth.session_id);
        let Some(tail) = extract_tail(s, &params) else {
            continue;
        };
        tailed += 1;
        let zero = truth.zero_onset.expect("tailed sessions reach zero");
        hits += (tail.t_start.abs_diff(zero) <= params.n_avg) as usize;
        // same check on the bare filtered series
        let c = ma(s.current().values(), params.n_avg).unwrap();
        assert_eq!(find_t_start(&c, params.zero_threshold), Some(tail.t_start));
    }
    assert!(tailed >= 190, "{tailed}");
    assert!(hits as f64 >= 0.95 * tailed as f64, "{hits}/{tailed}");
}

#[test]
fn delta_is_pilot_minus_brute_median() {
    let spec = FleetSpec {
        n_evs: 2,
        sessions_per_ev: 3,
        seed: 5,
        ..FleetSpec::default()
    };
    let params = TailParams::default();
    for s in generate_fleet(&spec).unwrap().fleet.sessions() {
        let x = extract_session(s, &params).unwrap();
        let (c, p) = (s.current().values(), s.pilot().values());
        assert_eq!(x.delta.values.len(), x.tail.begin());
        for (t, z) in x.delta.values.iter().enumerate() {
            assert_eq!(*z, p[t] - brute_moving_median(c, t, params.n_avg));
        }
    }
}

/// Second, textbook implementation of part of the catalog.
fn naive_features(x: &[f64]) -> Vec<(&'static str, f64)> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| v * v).sum::<f64>() / n - mean * mean;
    let std = var.max(0.0).sqrt();
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let quant = |q: f64| {
        let pos = q * (n - 1.0);
        let i = pos as usize;
        if i + 1 < s.len() {
            s[i] * (1.0 - (pos - i as f64)) + s[i + 1] * (pos - i as f64)
        } else {
            s[i]
        }
    };
    let (mut si, mut sx, mut sii, mut six) = (0.0, 0.0, 0.0, 0.0);
    for (i, v) in x.iter().enumerate() {
        let i = i as f64;
        si += i;
        sx += v;
        sii += i * i;
        six += i * v;
    }
    let slope = (n * six - si * sx) / (n * sii - si * si);
    let intercept = (sx - slope * si) / n;
    let acf1 = {
        let num: f64 = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
        num / ((n - 1.0) * var)
    };
    let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let skew = m3 / var.powf(1.5) * (n * (n - 1.0)).sqrt() / (n - 2.0);
    let fft = |k: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (t, v) in x.iter().enumerate() {
            let ang = 2.0 * std::f64::consts::PI * k * t as f64 / n;
            re += v * ang.cos();
            im -= v * ang.sin();
        }
        (re * re + im * im).sqrt()
    };
    let mut crossings = 0.0;
    for w in x.windows(2) {
        if (w[0] - mean) * (w[1] - mean) < 0.0 {
            crossings += 1.0;
        }
    }
    let mut maxima = 0.0;
    for w in x.windows(3) {
        if w[1] > w[0] && w[1] > w[2] {
            maxima += 1.0;
        }
    }
    let cid = x
        .windows(2)
        .map(|w| (w[1] - w[0]).powi(2))
        .sum::<f64>()
        .sqrt();
    vec![
        ("mean", mean),
        ("std", std),
        ("variance", var),
        ("median", quant(0.5)),
        ("quantile_0.1", quant(0.1)),
        ("quantile_0.95", quant(0.95)),
        ("range", s[s.len() - 1] - s[0]),
        ("abs_energy", x.iter().map(|v| v * v).sum()),
        ("trend_slope", slope),
        ("trend_intercept", intercept),
        ("autocorr_lag1", acf1),
        ("skewness", skew),
        ("fft_abs_1", fft(1.0)),
        ("fft_abs_3", fft(3.0)),
        ("n_mean_crossings", crossings),
        ("n_local_maxima", maxima),
        ("cid_ce", cid),
        (
            "count_above_mean",
            x.iter().filter(|&&v| v > mean).count() as f64,
        ),
        ("mean_change", (x[x.len() - 1] - x[0]) / (n - 1.0)),
        ("length", n),
    ]
}

#[test]
fn catalog_agrees_with_naive_implementation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let len = rng.gen_range(8..300);
        let x: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..30.0)).collect();
        let f = series_features(&x);
        for (name, want) in naive_features(&x) {
            let i = SERIES_FEATURE_NAMES
                .iter()
                .position(|n| *n == name)
                .unwrap();
            assert!(
                (f[i] - want).abs() <= 1e-7 * (1.0 + want.abs()),
                "{name}: {} vs {want}",
                f[i]
            );
        }
    }
}

#[test]
fn chi2_hand_computed_six_rows() {
    // columns: perfect separator, class-balanced, alternating, constant
    let rows: Vec<Vec<f64>> = vec![
        vec![1.0, 0.0, 2.0, 7.0],
        vec![1.0, 0.5, 4.0, 7.0],
        vec![1.0, 1.0, 2.0, 7.0],
        vec![0.0, 0.0, 4.0, 7.0],
        vec![0.0, 0.5, 2.0, 7.0],
        vec![0.0, 1.0, 4.0, 7.0],
    ];
    let labels = [true, true, true, false, false, false];
    let names: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let m = fit_selection_rows(&names, &refs, &labels, 2).unwrap();
    // a: observed (3, 0) vs expected (1.5, 1.5) -> 2 * 1.5^2 / 1.5 = 3
    // b: observed (1.5, 1.5) -> 0
    // c scaled to 0/1: observed (1, 2) vs (1.5, 1.5) -> 2 * 0.25 / 1.5 = 1/3
    let want = [3.0, 0.0, 1.0 / 3.0, 0.0];
    for (g, w) in m.scores.iter().zip(want) {
        assert!((g - w).abs() < 1e-12, "{:?}", m.scores);
    }
    assert_eq!(m.selected, vec![0, 2]);

    // unequal priors 1/3, 2/3: observed (2, 0) vs (2/3, 4/3) -> 8/3 + 4/3 = 4
    let s = chi2_scores(
        &[
            vec![1.0],
            vec![1.0],
            vec![0.0],
            vec![0.0],
            vec![0.0],
            vec![0.0],
        ],
        &[true, true, false, false, false, false],
    );
    assert!((s[0] - 4.0).abs() < 1e-12);
}

#[test]
fn knn_matches_brute_force_vote() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x: Vec<Vec<f64>> = (0..60)
        .map(|_| (0..4).map(|_| rng.gen_range(0.0..1.0)).collect())
        .collect();
    let y: Vec<bool> = (0..60).map(|_| rng.gen_bool(0.4)).collect();
    let queries: Vec<Vec<f64>> = (0..30)
        .map(|_| (0..4).map(|_| rng.gen_range(0.0..1.0)).collect())
        .collect();
    let grid = HyperParamGrid::standard(ModelKind::Knn);
    let fast = knn::grid_predictions(&x, &y, &queries, &grid.points);
    for (p, preds) in grid.points.iter().zip(&fast) {
        let HyperParams::Knn {
            n_neighbors,
            weights,
            metric,
        } = *p
        else {
            unreachable!()
        };
        for (q, &got) in queries.iter().zip(preds) {
            let mut d: Vec<(f64, usize)> = x
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let dist = match metric {
                        KnnMetric::Euclidean => r
                            .iter()
                            .zip(q)
                            .map(|(a, b)| (a - b).powi(2))
                            .sum::<f64>()
                            .sqrt(),
                        KnnMetric::Manhattan => {
                            r.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
                        }
                    };
                    (dist, i)
                })
                .collect();
            d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let (mut pos, mut neg) = (0.0, 0.0);
            for &(dist, i) in &d[..n_neighbors] {
                let w = match weights {
                    KnnWeights::Uniform => 1.0,
                    KnnWeights::Distance => 1.0 / dist,
                };
                if y[i] {
                    pos += w
                } else {
                    neg += w
                }
            }
            assert_eq!(got, pos > neg);
            let single = knn::KnnModel::fit(&x, &y, n_neighbors, weights, metric);
            assert_eq!(single.predict_one(q), got);
        }
    }
}

#[test]
fn every_model_fits_a_separable_toy_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..24 {
        let pos = i % 2 == 0;
        let c = if pos { 0.85 } else { 0.15 };
        x.push(vec![
            c + rng.gen_range(-0.1..0.1),
            c + rng.gen_range(-0.1..0.1),
        ]);
        y.push(pos);
    }
    for kind in ModelKind::ALL {
        let mut grid = HyperParamGrid::standard(kind);
        // keep the ensembles quick
        grid.points.retain(|p| match p {
            HyperParams::Rf { n_estimators, .. } | HyperParams::Ada { n_estimators } => {
                *n_estimators <= 100
            }
            _ => true,
        });
        let model = classifiers::fit(&grid, &x, &y, 3, 1).unwrap();
        assert!(grid.points.contains(&model.params));
        let acc = model
            .predict(&x)
            .unwrap()
            .iter()
            .zip(&y)
            .filter(|(a, b)| a == b)
            .count();
        assert_eq!(acc, y.len(), "{kind} with {}", model.params);
    }
}
