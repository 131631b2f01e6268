//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the console
//! under `cargo test`. Criteria 1-9 are required; criterion 10 needs the
//! public session dataset (point `EVPROFILE_ACN_DATA` at a JSON/JSONL dump)
//! and is informational only.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use evprofile::classifiers::ModelKind;
use evprofile::data_model::DEFAULT_MIN_TAILED_SESSIONS;
use evprofile::data_model::{filter_eligible, read_acn_file, records_to_fleet, Provenance};
use evprofile::evaluation::{
    compare_legacy, compute_metrics, run_profiling, sweep_nof, sweep_train_size, ExperimentConfig,
    TrainSizeSpec,
};
use evprofile::extraction::filter::{moving_average, moving_median};
use evprofile::extraction::{extract_fleet, extract_session, extract_tail, TailParams};
use evprofile::features::{CatalogMode, FeatureTable};
use evprofile::synth::{
    generate_session, EVSignature, FleetSpec, ScheduleSpec, SessionMeta, NOMINAL,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{
    brute_moving_average, brute_moving_median, literal_tail_walk, synthetic_table, Ratio,
};

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn criterion_1() -> Outcome {
    let params = TailParams::default();
    let spec = FleetSpec {
        n_evs: 20,
        sessions_per_ev: 10,
        seed: SEED,
        early_departure_prob: 0.1,
        ..FleetSpec::default()
    };
    let fleet = evprofile::synth::generate_fleet(&spec).unwrap().fleet;
    let mut agree = 0;
    let mut tailed = 0;
    let mut total = 0;
    for s in fleet.sessions() {
        total += 1;
        let c = s.current().values();
        let oracle = literal_tail_walk(
            c,
            params.n_avg,
            params.epsilon,
            params.t_max,
            params.zero_threshold,
        )
        .filter(|&(_, len)| len >= params.min_tail_len);
        let got = extract_tail(s, &params);
        let same = match (&got, oracle) {
            (None, None) => true,
            (Some(tail), Some((t_start, len))) => {
                tailed += 1;
                let ct = brute_moving_average(c, params.n_avg);
                tail.t_start == t_start
                    && tail.s == len
                    && tail
                        .current_values
                        .iter()
                        .zip(&ct[t_start - len..=t_start])
                        .all(|(a, b)| (a - b).abs() <= 1e-9 * b.abs().max(1.0))
            }
            _ => false,
        };
        agree += same as usize;
    }
    outcome(
        agree == total && total == 200,
        format!("{agree}/{total} sessions agree with the literal walk ({tailed} with tails)"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    let mut median_mismatch = 0;
    for _ in 0..100 {
        let len = rng.gen_range(1..400);
        let n = rng.gen_range(1..40);
        let x: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..40.0)).collect();
        let fast = moving_average(&x, n).unwrap();
        for (a, b) in fast.iter().zip(brute_moving_average(&x, n)) {
            worst = worst.max((a - b).abs() / b.abs().max(1e-300));
        }
        for t in 0..len {
            if moving_median(&x, t, n) != brute_moving_median(&x, t, n) {
                median_mismatch += 1;
            }
        }
    }
    outcome(
        worst <= 1e-9 && median_mismatch == 0,
        format!("max relative MA error {worst:.2e}, median mismatches {median_mismatch}"),
    )
}

fn criterion_3() -> Outcome {
    let close = |a: f64, r: Option<Ratio>| a == r.map_or(0.0, Ratio::value);
    let mut checked = 0;
    let mut bad = 0;
    for tp in 0..=5u64 {
        for tn in 0..=5u64 {
            for fp in 0..=5u64 {
                for fn_ in 0..=5u64 {
                    let m = compute_metrics(tp as usize, tn as usize, fp as usize, fn_ as usize);
                    if tp + tn + fp + fn_ == 0 {
                        bad += m.is_ok() as usize;
                        continue;
                    }
                    let m = m.unwrap();
                    checked += 1;
                    let p = Ratio::new(tp, tp + fp);
                    let r = Ratio::new(tp, tp + fn_);
                    let spec = Ratio::new(tn, tn + fp);
                    // F1 = 2PR/(P+R) = 2tp/(2tp+fp+fn) as an exact fraction.
                    let f1 = if tp == 0 {
                        None
                    } else {
                        Ratio::new(2 * tp, 2 * tp + fp + fn_)
                    };
                    let f1_ok = (m.f1 - f1.map_or(0.0, Ratio::value)).abs() <= 1e-12;
                    // G^2 = spec * R exactly: compare cross-multiplied.
                    let g2 = match (spec, r) {
                        (Some(a), Some(b)) => a.value() * b.value(),
                        _ => 0.0,
                    };
                    let g_ok = (m.g_mean * m.g_mean - g2).abs() <= 1e-12;
                    let ok = close(m.precision, p)
                        && close(m.recall, r)
                        && close(m.specificity, spec)
                        && f1_ok
                        && g_ok;
                    bad += !ok as usize;
                }
            }
        }
    }
    outcome(
        bad == 0 && checked == 1295,
        format!("{checked} count tuples checked, {bad} mismatches"),
    )
}

fn criterion_4() -> Outcome {
    let params = TailParams::default();
    let mut worst: f64 = 0.0;
    let mut missing = 0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ seed);
        let sig = EVSignature {
            i_max: 40.0,
            d: rng.gen_range(0.2..3.0),
            noise_sigma: rng.gen_range(0.0..=0.1),
            ripple_amp: rng.gen_range(0.4..1.2),
            ripple_period: rng.gen_range(50.0..110.0),
            tau: rng.gen_range(20.0..100.0),
            ..NOMINAL
        };
        let g = generate_session(
            &sig,
            &ScheduleSpec::constant(32.0),
            0.2,
            15.0,
            seed,
            &SessionMeta::default(),
        )
        .unwrap();
        match extract_session(&g.session, &params) {
            Some(x) => {
                let mean = x.delta.values.iter().sum::<f64>() / x.delta.values.len() as f64;
                worst = worst.max((mean - sig.d).abs());
            }
            None => missing += 1,
        }
    }
    outcome(
        missing == 0 && worst <= 0.05,
        format!("max |mean(delta) - d| = {worst:.4} A over 50 seeds ({missing} without tail)"),
    )
}

fn f1_of(config: &ExperimentConfig, table: &FeatureTable) -> f64 {
    run_profiling(config, table)
        .expect("profiling runs")
        .mean
        .f1
}

fn criterion_5(table: &FeatureTable) -> Outcome {
    let base = ExperimentConfig::new(ModelKind::Knn, SEED)
        .with_iterations(25)
        .with_nof(100);
    let evs = table.ev_ids().len();
    let q1 = f1_of(&base.clone().with_q(1.0), table);
    let q5 = f1_of(&base.with_q(5.0), table);
    outcome(
        evs == 20 && table.rows.len() == 600 && q1 >= 0.90 && q5 >= 0.75 && q5 <= q1 + 0.02,
        format!(
            "{evs} EVs x {} vectors; F1(Q=1) = {q1:.3}, F1(Q=5) = {q5:.3}",
            table.rows.len() / evs.max(1)
        ),
    )
}

fn criterion_6(table: &FeatureTable) -> Outcome {
    let base = ExperimentConfig::new(ModelKind::Knn, SEED).with_iterations(25);
    let mut pass = true;
    let mut detail = Vec::new();
    for q in [1.0, 5.0] {
        let nof = sweep_nof(&base, table, &[10, 25, 100], &[q]).unwrap();
        let f: Vec<f64> = nof.entries.iter().map(|e| e.mean.f1).collect();
        pass &= f.windows(2).all(|w| w[1] >= w[0] - 0.02);
        detail.push(format!(
            "NoF 10/25/100 @Q={q}: {:.3}/{:.3}/{:.3}",
            f[0], f[1], f[2]
        ));
    }
    // The training-size sweep needs 70 vectors per EV: same seed (hence
    // the same signatures), 70 sessions each.
    let spec = FleetSpec {
        sessions_per_ev: 70,
        seed: SEED,
        ..FleetSpec::default()
    };
    let (_, long) = synthetic_table(&spec, CatalogMode::Modern);
    let sizes = TrainSizeSpec {
        sizes: vec![7, 14, 28, 56],
        ..TrainSizeSpec::default()
    };
    for q in [1.0, 5.0] {
        let ts = sweep_train_size(&base, &long, &sizes, &[q]).unwrap();
        let f: Vec<f64> = ts.entries.iter().map(|e| e.mean.f1).collect();
        pass &= f.windows(2).all(|w| w[1] >= w[0] - 0.02);
        detail.push(format!(
            "size 7/14/28/56 @Q={q}: {:.3}/{:.3}/{:.3}/{:.3}",
            f[0], f[1], f[2], f[3]
        ));
    }
    outcome(pass, detail.join("; "))
}

fn criterion_7(modern: &FeatureTable, legacy: &FeatureTable) -> Outcome {
    let base = ExperimentConfig::new(ModelKind::Knn, SEED).with_iterations(25);
    let qs = [1.0, 3.0, 5.0];
    let table = compare_legacy(&base, modern, legacy, &qs).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for q in qs {
        let m = table.find(q, "arm=modern").unwrap().mean.f1;
        let l = table.find(q, "arm=legacy").unwrap().mean.f1;
        pass &= m >= l;
        detail.push(format!("Q={q}: modern {m:.3} vs legacy {l:.3}"));
    }
    outcome(pass, detail.join("; "))
}

fn criterion_8() -> Outcome {
    let spec = FleetSpec {
        spread: 0.0,
        seed: SEED,
        ..FleetSpec::default()
    };
    let (_, table) = synthetic_table(&spec, CatalogMode::Modern);
    let config = ExperimentConfig::new(ModelKind::Knn, SEED).with_iterations(25);
    let f1 = f1_of(&config, &table);
    // Prior-matched guessing at Q=1 predicts positive half the time and is
    // right half the time: P = R = 0.5, so F1 = 0.5.
    let baseline = 0.5;
    outcome(
        (f1 - baseline).abs() <= 0.10,
        format!("zero-spread F1(Q=1) = {f1:.3}, class-prior baseline {baseline}"),
    )
}

fn criterion_9() -> Outcome {
    let run = |dir: &std::path::Path| -> Vec<u8> {
        let spec = FleetSpec {
            n_evs: 6,
            sessions_per_ev: 15,
            seed: SEED,
            ..FleetSpec::default()
        };
        let (_, table) = synthetic_table(&spec, CatalogMode::Modern);
        let config = ExperimentConfig::new(ModelKind::Knn, SEED).with_iterations(5);
        let report = evprofile::evaluation::sweep_q(&config, &table, &[1.0, 2.0, 3.0]).unwrap();
        let path = dir.join("report.csv");
        report.write_csv(&path).unwrap();
        std::fs::read(path).unwrap()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (ra, rb) = (run(a.path()), run(b.path()));
    outcome(
        ra == rb && !ra.is_empty(),
        format!(
            "two runs wrote {} and {} bytes, identical: {}",
            ra.len(),
            rb.len(),
            ra == rb
        ),
    )
}

/// `None` when the dataset is not available.
fn criterion_10() -> Option<Outcome> {
    let path = PathBuf::from(std::env::var_os("EVPROFILE_ACN_DATA")?);
    let iterations = std::env::var("EVPROFILE_ACN_ITERATIONS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(25);
    let (records, report) = match read_acn_file(&path) {
        Ok(r) => r,
        Err(e) => {
            return Some(outcome(
                false,
                format!("cannot read {}: {e}", path.display()),
            ))
        }
    };
    let cutoff = "2021-06-18T00:00:00Z".parse().unwrap();
    let (fleet, more) = records_to_fleet(records, Provenance::Real);
    let params = TailParams::default();
    let fleet = filter_eligible(
        fleet.with_cutoff(cutoff),
        DEFAULT_MIN_TAILED_SESSIONS,
        &params,
    );
    let (tails, _) = extract_fleet(&fleet, &params);
    let table = FeatureTable::from_tails(&tails, CatalogMode::Modern, &params).unwrap();
    let evs = fleet.n_evs();
    let rf = ExperimentConfig::new(ModelKind::Rf, SEED).with_iterations(iterations);
    let rf1 = run_profiling(&rf.clone().with_q(1.0), &table).unwrap();
    let rf5 = run_profiling(&rf.with_q(5.0), &table).unwrap();
    let lr5 = run_profiling(
        &ExperimentConfig::new(ModelKind::Lr, SEED)
            .with_iterations(iterations)
            .with_q(5.0),
        &table,
    )
    .unwrap();
    let near = |v: f64, lo: f64, hi: f64| v >= lo - 0.05 && v <= hi + 0.05;
    let pass = evs == 137
        && near(rf1.mean.precision, 0.88, 0.88)
        && near(rf1.mean.recall, 0.86, 0.88)
        && near(rf5.mean.precision, 0.77, 0.77)
        && near(lr5.mean.recall, 0.71, 0.71);
    Some(outcome(
        pass,
        format!(
            "{evs} EVs ({} records skipped); RF Q=1 P {:.3} R {:.3}; RF Q=5 P {:.3}; LR Q=5 R {:.3}",
            report.n_skipped() + more.n_skipped(),
            rf1.mean.precision,
            rf1.mean.recall,
            rf5.mean.precision,
            lr5.mean.recall
        ),
    ))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn main() -> ExitCode {
    let mut failed = Vec::new();
    let mut report =
        |id: usize, name: &str, (o, dt): (Outcome, Duration), limit: Option<Duration>| {
            let over = limit.is_some_and(|l| dt > l);
            let pass = o.pass && !over;
            let mark = if pass { "PASS" } else { "FAIL" };
            let limit_note = limit.map_or(String::new(), |l| format!(", limit {:.0?}", l));
            println!(
                "criterion {id:>2} {mark} {name}: {} [{:.1?}{limit_note}]",
                o.detail, dt
            );
            if !pass {
                failed.push(id);
            }
        };

    report(
        1,
        "tail oracle equivalence",
        timed(criterion_1),
        Some(Duration::from_secs(30)),
    );
    report(2, "filter correctness", timed(criterion_2), None);
    report(3, "metric formulas", timed(criterion_3), None);
    report(4, "delta recovery", timed(criterion_4), None);

    let spec = FleetSpec {
        seed: SEED,
        ..FleetSpec::default()
    };
    let ((modern, legacy), dt) = timed(|| {
        let (_, m) = synthetic_table(&spec, CatalogMode::Modern);
        let (_, l) = synthetic_table(&spec, CatalogMode::Legacy);
        (m, l)
    });
    println!("   fixture: synthetic 20 x 30 fleet built in {dt:.1?}");
    let (o5, dt5) = timed(|| criterion_5(&modern));
    report(
        5,
        "end-to-end profiling",
        (o5, dt5 + dt),
        Some(Duration::from_secs(600)),
    );
    report(6, "trend replication", timed(|| criterion_6(&modern)), None);
    report(
        7,
        "legacy dominance",
        timed(|| criterion_7(&modern, &legacy)),
        None,
    );
    report(8, "indistinguishability control", timed(criterion_8), None);
    report(9, "determinism", timed(criterion_9), None);

    match timed(criterion_10) {
        (Some(o), dt) => {
            let mark = if o.pass { "PASS" } else { "FAIL" };
            println!("criterion 10 {mark} real-data reproduction (informational): {} [{dt:.1?}]", o.detail);
        }
        (None, _) => println!(
            "criterion 10 SKIP real-data reproduction (informational): set EVPROFILE_ACN_DATA to a session dump"
        ),
    }

    if failed.is_empty() {
        println!("acceptance: criteria 1-9 passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
