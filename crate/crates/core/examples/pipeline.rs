//! Synthetic fleet through extraction, features and kNN profiling.
//!
//! `cargo run --release -p evprofile --example pipeline -- [seed] [spread] [model] [iterations]`

use std::time::Instant;

use evprofile::classifiers::ModelKind;
use evprofile::data_model::{filter_eligible, DEFAULT_MIN_TAILED_SESSIONS};
use evprofile::evaluation::{run_profiling, ExperimentConfig};
use evprofile::extraction::{extract_fleet, TailParams};
use evprofile::features::{CatalogMode, FeatureTable};
use evprofile::synth::{generate_fleet, FleetSpec};

fn main() -> evprofile::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let spread = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let model: ModelKind = args.next().map_or(Ok(ModelKind::Knn), |s| s.parse())?;
    let iterations = args.next().and_then(|s| s.parse().ok()).unwrap_or(25);
    let t0 = Instant::now();
    let spec = FleetSpec {
        seed,
        spread,
        ..FleetSpec::default()
    };
    let params = TailParams::default();
    let synthetic = generate_fleet(&spec)?;
    let fleet = filter_eligible(synthetic.fleet, DEFAULT_MIN_TAILED_SESSIONS, &params);
    let (tails, missing) = extract_fleet(&fleet, &params);
    let table = FeatureTable::from_tails(&tails, CatalogMode::Modern, &params)?;
    println!(
        "{} EVs, {} vectors ({missing} without tail) in {:.1?}",
        fleet.n_evs(),
        table.rows.len(),
        t0.elapsed()
    );
    for q in [1.0, 5.0] {
        let t = Instant::now();
        let config = ExperimentConfig::new(model, seed)
            .with_q(q)
            .with_iterations(iterations);
        let report = run_profiling(&config, &table)?;
        println!(
            "q={q}: f1 {:.3} ± {:.3}, precision {:.3}, recall {:.3} ({} skipped) in {:.1?}",
            report.mean.f1,
            report.std.f1,
            report.mean.precision,
            report.mean.recall,
            report.skipped.len(),
            t.elapsed()
        );
    }
    Ok(())
}
