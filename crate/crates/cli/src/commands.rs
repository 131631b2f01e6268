use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use chrono::{DateTime, NaiveDate, Utc};
use evprofile::data_model::{
    filter_eligible, ingest_canonical, load_fleet, persist_fleet, read_acn_file, records_to_fleet,
    IngestReport, Provenance,
};
use evprofile::evaluation::report::persist_details;
use evprofile::evaluation::{
    compare_legacy, run_profiling, sweep_degradation, sweep_nof, sweep_q, sweep_train_size,
    DegradationSpec, ExperimentConfig, ReportEntry, ReportTable, RunManifest, RunStatus,
    TrainSizeSpec,
};
use evprofile::extraction::{extract_fleet, load_tails, persist_tails, TailRecord};
use evprofile::features::{CatalogMode, FeatureTable};
use evprofile::synth::{generate_fleet, persist_truth, FleetSpec};
use serde::Serialize;

use crate::args::*;

/// Directory for outputs whose `--out` is omitted.
pub const OUT_DIR_ENV: &str = "EVPROFILE_OUT_DIR";

fn out_path(given: &Option<PathBuf>, default_name: &str) -> PathBuf {
    given
        .clone()
        .unwrap_or_else(|| match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) => PathBuf::from(dir).join(default_name),
            None => PathBuf::from(default_name),
        })
}

/// `<path>.<suffix>` next to an output file.
fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn display(paths: &[&Path]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

/// Writes `<first output>.manifest.json` before `body` runs and again with
/// the outcome afterwards.
fn with_manifest(
    command: &str,
    config: &impl Serialize,
    seed: Option<u64>,
    inputs: &[&Path],
    outputs: &[&Path],
    body: impl FnOnce() -> Result<()>,
) -> Result<()> {
    let path = sidecar(outputs[0], "manifest.json");
    let config = serde_json::to_value(config)?;
    let mut manifest = RunManifest::new(command, config, seed, display(inputs), display(outputs));
    manifest.write(&path)?;
    let t0 = Instant::now();
    let result = body();
    let status = if result.is_ok() {
        RunStatus::Ok
    } else {
        RunStatus::Failed
    };
    manifest.finish(status, t0.elapsed().as_secs_f64());
    manifest.write(&path)?;
    result
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Synth(a) => synth(a),
        Command::Extract(a) => extract(a),
        Command::Featurize(a) => featurize(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Sweep(SweepCommand::Nof(a)) => sweep_nof_cmd(a),
        Command::Sweep(SweepCommand::TrainSize(a)) => sweep_train_size_cmd(a),
        Command::Sweep(SweepCommand::Q(a)) => sweep_q_cmd(a),
        Command::Sweep(SweepCommand::Degradation(a)) => sweep_degradation_cmd(a),
        Command::CompareLegacy(a) => compare_cmd(a),
    }
}

fn parse_cutoff(s: &str) -> Result<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    let day = NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .with_context(|| format!("cutoff {s:?} is neither RFC 3339 nor YYYY-MM-DD"))?;
    Ok(day.and_hms_opt(0, 0, 0).expect("midnight").and_utc())
}

fn ingest(a: IngestArgs) -> Result<()> {
    let out = out_path(&a.out, "fleet.jsonl");
    let report_path = sidecar(&out, "ingest.json");
    let input = a
        .acn
        .as_deref()
        .or(a.canonical.as_deref())
        .expect("clap requires a source");
    let cutoff = a.cutoff.as_deref().map(parse_cutoff).transpose()?;
    let params = a.tail.params();
    params.validate()?;
    with_manifest("ingest", &a, None, &[input], &[&out, &report_path], || {
        let (mut fleet, report): (_, IngestReport) = match &a.acn {
            Some(path) => {
                let (records, mut report) = read_acn_file(path)?;
                let (fleet, conversion) = records_to_fleet(records, Provenance::Real);
                // mapped records that then broke a session invariant are skips too
                report.accepted = conversion.accepted;
                report.skipped.extend(conversion.skipped);
                (fleet, report)
            }
            None => ingest_canonical(input)?,
        };
        if let Some(c) = cutoff {
            fleet = fleet.with_cutoff(c);
        }
        let before = (fleet.n_evs(), fleet.n_sessions());
        if !a.no_filter {
            fleet = filter_eligible(fleet, a.min_tailed, &params);
        }
        log::info!(
            "{} sessions accepted, {} skipped; {} of {} EVs ({} of {} sessions) kept",
            report.accepted,
            report.n_skipped(),
            fleet.n_evs(),
            before.0,
            fleet.n_sessions(),
            before.1
        );
        persist_fleet(&fleet, &out)?;
        let f = std::fs::File::create(&report_path)
            .with_context(|| format!("creating {}", report_path.display()))?;
        serde_json::to_writer_pretty(f, &report)?;
        Ok(())
    })
}

fn synth(a: SynthArgs) -> Result<()> {
    let out = out_path(&a.out, "fleet.jsonl");
    let truth = sidecar(&out, "truth.jsonl");
    let spec = FleetSpec {
        n_evs: a.evs,
        sessions_per_ev: a.sessions,
        spread: a.spread,
        seed: a.seed,
        period: a.period,
        early_departure_prob: a.early_departure,
        ..FleetSpec::default()
    };
    spec.validate()?;
    with_manifest("synth", &spec, Some(a.seed), &[], &[&out, &truth], || {
        let fleet = generate_fleet(&spec)?;
        persist_fleet(&fleet.fleet, &out)?;
        persist_truth(&fleet, &spec, &truth)?;
        log::info!(
            "{} sessions of {} EVs",
            fleet.fleet.n_sessions(),
            fleet.fleet.n_evs()
        );
        Ok(())
    })
}

fn write_tail_summary(records: &[TailRecord], path: &Path) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record([
        "session_id",
        "ev_id",
        "t_start",
        "s",
        "begin",
        "delta_len",
        "kwh",
    ])?;
    for r in records {
        let t = &r.extract.tail;
        w.write_record([
            r.session_id.clone(),
            r.ev_id.clone(),
            t.t_start.to_string(),
            t.s.to_string(),
            t.begin().to_string(),
            r.extract.delta.values.len().to_string(),
            r.kwh.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn extract(a: ExtractArgs) -> Result<()> {
    let out = out_path(&a.out, "tails.jsonl");
    let params = a.tail.params();
    params.validate()?;
    let mut outputs = vec![out.as_path()];
    outputs.extend(a.csv.as_deref());
    with_manifest("extract", &a, None, &[&a.fleet], &outputs, || {
        let fleet = load_fleet(&a.fleet)?;
        let (records, missing) = extract_fleet(&fleet, &params);
        log::info!("{} tails, {missing} sessions without one", records.len());
        persist_tails(&records, &params, &out)?;
        if let Some(csv) = &a.csv {
            write_tail_summary(&records, csv)?;
        }
        Ok(())
    })
}

fn featurize(a: FeaturizeArgs) -> Result<()> {
    let out = out_path(&a.out, "features.csv");
    with_manifest("featurize", &a, None, &[&a.tails], &[&out], || {
        let (records, params) = load_tails(&a.tails)?;
        let mode = if a.legacy {
            CatalogMode::Legacy
        } else {
            CatalogMode::Modern
        };
        let table = FeatureTable::from_tails(&records, mode, &params)?;
        let nonfinite = table
            .rows
            .iter()
            .filter(|r| !r.nonfinite.is_empty())
            .count();
        if nonfinite > 0 {
            log::warn!("{nonfinite} vectors had non-finite features (stored as 0)");
        }
        table.persist(&out)?;
        Ok(())
    })
}

fn config(run: &RunArgs, nof: usize) -> Result<ExperimentConfig> {
    let mut c = ExperimentConfig::new(run.model, run.seed).with_nof(nof);
    if let Some(it) = run.iterations {
        c = c.with_iterations(it);
    }
    c.train_fraction = run.train_fraction;
    c.folds = run.folds;
    c.validate()?;
    Ok(c)
}

fn check_qs(qs: &[f64]) -> Result<()> {
    if qs.is_empty() {
        bail!("--q needs at least one value");
    }
    if let Some(q) = qs.iter().find(|q| !(**q >= 1.0 && q.is_finite())) {
        bail!("q must be >= 1, got {q}");
    }
    Ok(())
}

fn load_table(path: &Path) -> Result<FeatureTable> {
    let table = FeatureTable::load(path)?;
    log::info!(
        "{} vectors of {} EVs, {} features",
        table.rows.len(),
        table.groups().len(),
        table.n_features()
    );
    Ok(table)
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let out = out_path(&a.run.out, "report.csv");
    check_qs(&a.q)?;
    let base = config(&a.run, a.nof)?;
    let mut outputs = vec![out.as_path()];
    outputs.extend(a.details.as_deref());
    with_manifest(
        "evaluate",
        &a,
        Some(a.run.seed),
        &[&a.features],
        &outputs,
        || {
            let table = load_table(&a.features)?;
            let mut rows = ReportTable::default();
            let mut reports = Vec::new();
            for &q in &a.q {
                let r = run_profiling(&base.clone().with_q(q), &table)?;
                log::info!("q={q}: f1 {:.3} over {} EVs", r.mean.f1, r.n_evs());
                rows.push(ReportEntry::from_report(&r, "all"));
                reports.push(r);
            }
            rows.write_csv(&out)?;
            if let Some(d) = &a.details {
                persist_details(&reports, d)?;
            }
            Ok(())
        },
    )
}

fn sweep_nof_cmd(a: SweepNofArgs) -> Result<()> {
    let out = out_path(&a.run.out, "sweep_nof.csv");
    check_qs(&a.q)?;
    let base = config(&a.run, 1)?;
    if a.nof_list.contains(&0) {
        bail!("nof values must be at least 1");
    }
    with_manifest(
        "sweep nof",
        &a,
        Some(a.run.seed),
        &[&a.features],
        &[&out],
        || {
            let table = load_table(&a.features)?;
            sweep_nof(&base, &table, &a.nof_list, &a.q)?.write_csv(&out)?;
            Ok(())
        },
    )
}

fn sweep_train_size_cmd(a: SweepTrainSizeArgs) -> Result<()> {
    let out = out_path(&a.run.out, "sweep_train_size.csv");
    check_qs(&a.q)?;
    let base = config(&a.run, a.nof)?;
    let spec = TrainSizeSpec {
        sizes: a.sizes.clone(),
        min_vectors: a.min_vectors,
        test_fraction: a.test_fraction,
    };
    with_manifest(
        "sweep train-size",
        &a,
        Some(a.run.seed),
        &[&a.features],
        &[&out],
        || {
            let table = load_table(&a.features)?;
            sweep_train_size(&base, &table, &spec, &a.q)?.write_csv(&out)?;
            Ok(())
        },
    )
}

fn sweep_q_cmd(a: SweepQArgs) -> Result<()> {
    let out = out_path(&a.run.out, "sweep_q.csv");
    check_qs(&a.q)?;
    let base = config(&a.run, a.nof)?;
    with_manifest(
        "sweep q",
        &a,
        Some(a.run.seed),
        &[&a.features],
        &[&out],
        || {
            let table = load_table(&a.features)?;
            sweep_q(&base, &table, &a.q)?.write_csv(&out)?;
            Ok(())
        },
    )
}

fn sweep_degradation_cmd(a: SweepDegradationArgs) -> Result<()> {
    let out = out_path(&a.run.out, "sweep_degradation.csv");
    check_qs(&a.q)?;
    let base = config(&a.run, a.nof)?;
    let spec = DegradationSpec {
        train_fractions: a.train_fractions.clone(),
        windows: a.windows,
        top_n: a.top_n,
        min_vectors: a.min_vectors,
    };
    with_manifest(
        "sweep degradation",
        &a,
        Some(a.run.seed),
        &[&a.features],
        &[&out],
        || {
            let table = load_table(&a.features)?;
            sweep_degradation(&base, &table, &spec, &a.q)?.write_csv(&out)?;
            Ok(())
        },
    )
}

fn compare_cmd(a: CompareArgs) -> Result<()> {
    let out = out_path(&a.run.out, "compare_legacy.csv");
    check_qs(&a.q)?;
    let base = config(&a.run, a.nof)?;
    let inputs = [a.features.as_path(), a.legacy_features.as_path()];
    with_manifest(
        "compare-legacy",
        &a,
        Some(a.run.seed),
        &inputs,
        &[&out],
        || {
            let modern = load_table(&a.features)?;
            let legacy = load_table(&a.legacy_features)?;
            compare_legacy(&base, &modern, &legacy, &a.q)?.write_csv(&out)?;
            Ok(())
        },
    )
}
