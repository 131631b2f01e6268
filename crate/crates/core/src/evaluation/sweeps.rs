//! Experiment sweeps over NoF, Q, training size and time, plus the
//! legacy-vs-modern comparison.

use serde::{Deserialize, Serialize};

use super::assemble::{negatives_for, sample_without_replacement};
use super::metrics::{Confusion, Metrics};
use super::profiling::{
    evaluate_once, run_grid, run_profiling, summarize, EvMetrics, ExperimentConfig, SelectionMode,
};
use super::report::{ReportEntry, ReportTable};
use crate::error::{Error, Result};
use crate::features::FeatureTable;
use crate::seed;

pub const NOF_LIST: [usize; 6] = [10, 25, 50, 100, 150, 200];
pub const Q_LIST: [f64; 5] = [1.0, 2.0, 3.0, 4.0, 5.0];
pub const TRAIN_SIZES: [usize; 8] = [7, 14, 21, 28, 35, 42, 49, 56];

/// One run per q.
pub fn sweep_q(config: &ExperimentConfig, table: &FeatureTable, qs: &[f64]) -> Result<ReportTable> {
    let mut out = ReportTable::default();
    for &q in qs {
        let r = run_profiling(&config.clone().with_q(q), table)?;
        out.push(ReportEntry::from_report(&r, "all"));
    }
    Ok(out)
}

/// One run per (q, NoF). NoF above the catalog size is clamped with a
/// warning and tagged `clamped_from=<requested>`.
pub fn sweep_nof(
    config: &ExperimentConfig,
    table: &FeatureTable,
    nofs: &[usize],
    qs: &[f64],
) -> Result<ReportTable> {
    let d = table.n_features();
    let mut out = ReportTable::default();
    for &q in qs {
        for &nof in nofs {
            let variant = if nof > d {
                log::warn!("nof {nof} exceeds the {d} available features; clamped");
                format!("clamped_from={nof}")
            } else {
                "all".to_string()
            };
            let r = run_profiling(&config.clone().with_q(q).with_nof(nof.min(d)), table)?;
            out.push(ReportEntry::from_report(&r, variant));
        }
    }
    Ok(out)
}

/// Chronological per-EV partition: a training prefix and the rest.
fn chrono_split(idx: &[usize], train_fraction: f64) -> (&[usize], &[usize]) {
    let k = ((train_fraction * idx.len() as f64).round() as usize).min(idx.len());
    idx.split_at(k)
}

fn pooled<'a>(parts: impl Iterator<Item = &'a [usize]>) -> Vec<usize> {
    let mut v: Vec<usize> = parts.flatten().copied().collect();
    v.sort_unstable();
    v
}

fn labeled(pos: &[usize], neg: &[usize]) -> (Vec<usize>, Vec<bool>) {
    let idx: Vec<usize> = pos.iter().chain(neg).copied().collect();
    let y = (0..idx.len()).map(|i| i < pos.len()).collect();
    (idx, y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSizeSpec {
    pub sizes: Vec<usize>,
    /// EVs with fewer vectors are excluded.
    pub min_vectors: usize,
    /// Chronologically last share of each EV held out for testing.
    pub test_fraction: f64,
}

impl Default for TrainSizeSpec {
    fn default() -> Self {
        TrainSizeSpec {
            sizes: TRAIN_SIZES.to_vec(),
            min_vectors: 70,
            test_fraction: 0.2,
        }
    }
}

/// F1 as a function of the number of training vectors per EV.
///
/// Only EVs with at least `min_vectors` vectors take part, as targets and
/// as the negative pool. Positives for size `s` are the target's `s`
/// earliest vectors; the test set is its last `test_fraction`. Negatives
/// are sampled from the other EVs' training portions and test portions
/// respectively, at ratio q.
pub fn sweep_train_size(
    config: &ExperimentConfig,
    table: &FeatureTable,
    spec: &TrainSizeSpec,
    qs: &[f64],
) -> Result<ReportTable> {
    config.validate()?;
    let groups: Vec<(String, Vec<usize>)> = table
        .groups()
        .into_iter()
        .filter(|(_, idx)| idx.len() >= spec.min_vectors)
        .collect();
    if groups.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "train-size sweep needs at least two EVs with {} vectors, found {}",
            spec.min_vectors,
            groups.len()
        )));
    }
    let parts: Vec<(&[usize], &[usize])> = groups
        .iter()
        .map(|(_, idx)| chrono_split(idx, 1.0 - spec.test_fraction))
        .collect();
    let evs: Vec<(String, usize)> = groups.iter().map(|(e, i)| (e.clone(), i.len())).collect();
    let mut out = ReportTable::default();
    for &q in qs {
        let cfg = config.clone().with_q(q);
        for &size in &spec.sizes {
            let outcomes = run_grid(evs.len(), cfg.iterations, |e, it| {
                let (train_part, test_part) = parts[e];
                if size > train_part.len() {
                    return Err(Error::InvalidParameter(format!(
                        "size {size} exceeds {} training vectors",
                        train_part.len()
                    )));
                }
                let others = || (0..parts.len()).filter(move |&o| o != e);
                let train_pool = pooled(others().map(|o| parts[o].0));
                let test_pool = pooled(others().map(|o| parts[o].1));
                let path = |k: u64| [seed::tag::ASSEMBLE, e as u64, it as u64, k];
                let mut rng = seed::rng(cfg.seed, &path(0));
                let test_neg = sample_without_replacement(
                    &test_pool,
                    negatives_for(test_part.len(), q),
                    &evs[e].0,
                    &mut rng,
                )?;
                let mut rng = seed::rng(cfg.seed, &path(1));
                let train_neg = sample_without_replacement(
                    &train_pool,
                    negatives_for(size, q),
                    &evs[e].0,
                    &mut rng,
                )?;
                let (tx, ty) = labeled(&train_part[..size], &train_neg);
                let test = labeled(test_part, &test_neg);
                let model_seed = seed::derive(cfg.seed, &[seed::tag::MODEL, e as u64, it as u64]);
                let conf = evaluate_once(table, (&tx, &ty), &[test], &cfg, model_seed)?;
                conf.iter().map(Confusion::metrics).collect()
            });
            let (per_ev, mean, std, _) = summarize(&evs, &outcomes, 0);
            out.push(entry(
                &cfg,
                table,
                format!("size={size}"),
                &per_ev,
                mean,
                std,
            ));
        }
    }
    Ok(out)
}

fn entry(
    cfg: &ExperimentConfig,
    table: &FeatureTable,
    variant: String,
    per_ev: &[EvMetrics],
    mean: Metrics,
    std: Metrics,
) -> ReportEntry {
    ReportEntry {
        model: cfg.model,
        q: cfg.q,
        nof: cfg.effective_nof(table.n_features()),
        variant,
        mean,
        std,
        n_evs: per_ev.len(),
        iterations: cfg.iterations,
        seed: cfg.seed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationSpec {
    pub train_fractions: Vec<f64>,
    pub windows: usize,
    /// EVs with the most vectors used as targets.
    pub top_n: usize,
    pub min_vectors: usize,
}

impl Default for DegradationSpec {
    fn default() -> Self {
        DegradationSpec {
            train_fractions: vec![0.3, 0.6],
            windows: 20,
            top_n: 10,
            min_vectors: 150,
        }
    }
}

/// Window `w` of `n` items split into `count` contiguous, disjoint windows.
pub fn window_bounds(n: usize, count: usize, w: usize) -> (usize, usize) {
    (w * n / count, (w + 1) * n / count)
}

/// F1 over consecutive test windows after a chronological training prefix.
///
/// Every EV in the table is split the same way (training prefix, then
/// `windows` equal windows of the remainder). A target's model is trained
/// on its prefix plus negatives from the other EVs' prefixes, then scored on
/// each window with negatives drawn from the same window index of the other
/// EVs. Rows `window=NN` report each window; `window=mean` averages the
/// windows per EV before aggregating.
pub fn sweep_degradation(
    config: &ExperimentConfig,
    table: &FeatureTable,
    spec: &DegradationSpec,
    qs: &[f64],
) -> Result<ReportTable> {
    config.validate()?;
    if spec.windows == 0 {
        return Err(Error::InvalidParameter("windows must be at least 1".into()));
    }
    let groups = table.groups();
    let mut ranked: Vec<usize> = (0..groups.len())
        .filter(|&g| groups[g].1.len() >= spec.min_vectors)
        .collect();
    ranked.sort_by(|&a, &b| groups[b].1.len().cmp(&groups[a].1.len()).then(a.cmp(&b)));
    ranked.truncate(spec.top_n);
    if ranked.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "degradation sweep needs EVs with at least {} vectors",
            spec.min_vectors
        )));
    }
    if ranked.len() < spec.top_n {
        log::warn!(
            "only {} EVs have {} vectors",
            ranked.len(),
            spec.min_vectors
        );
    }
    let evs: Vec<(String, usize)> = ranked
        .iter()
        .map(|&g| (groups[g].0.clone(), groups[g].1.len()))
        .collect();
    let mut out = ReportTable::default();
    for &frac in &spec.train_fractions {
        if !(frac > 0.0 && frac < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "train fraction {frac} outside (0, 1)"
            )));
        }
        let parts: Vec<(&[usize], Vec<&[usize]>)> = groups
            .iter()
            .map(|(_, idx)| {
                let (train, test) = chrono_split(idx, frac);
                let windows = (0..spec.windows)
                    .map(|w| {
                        let (a, b) = window_bounds(test.len(), spec.windows, w);
                        &test[a..b]
                    })
                    .collect();
                (train, windows)
            })
            .collect();
        for &q in qs {
            let cfg = config.clone().with_q(q);
            let outcomes = run_grid(evs.len(), cfg.iterations, |e, it| {
                let g = ranked[e];
                let others = || (0..parts.len()).filter(move |&o| o != g);
                let path = |k: u64| [seed::tag::ASSEMBLE, e as u64, it as u64, k];
                let (train_pos, windows) = &parts[g];
                let mut rng = seed::rng(cfg.seed, &path(0));
                let train_neg = sample_without_replacement(
                    &pooled(others().map(|o| parts[o].0)),
                    negatives_for(train_pos.len(), q),
                    &evs[e].0,
                    &mut rng,
                )?;
                let mut tests = Vec::with_capacity(spec.windows);
                for (w, pos) in windows.iter().enumerate() {
                    if pos.is_empty() {
                        return Err(Error::InvalidParameter(format!("test window {w} is empty")));
                    }
                    let mut rng = seed::rng(cfg.seed, &path(w as u64 + 1));
                    let neg = sample_without_replacement(
                        &pooled(others().map(|o| parts[o].1[w])),
                        negatives_for(pos.len(), q),
                        &evs[e].0,
                        &mut rng,
                    )?;
                    tests.push(labeled(pos, &neg));
                }
                let (tx, ty) = labeled(train_pos, &train_neg);
                let model_seed = seed::derive(cfg.seed, &[seed::tag::MODEL, e as u64, it as u64]);
                let conf = evaluate_once(table, (&tx, &ty), &tests, &cfg, model_seed)?;
                conf.iter().map(Confusion::metrics).collect()
            });
            for w in 0..spec.windows {
                let (per_ev, mean, std, _) = summarize(&evs, &outcomes, w);
                out.push(entry(
                    &cfg,
                    table,
                    format!("train={frac};window={w:02}"),
                    &per_ev,
                    mean,
                    std,
                ));
            }
            let per_ev_mean: Vec<Metrics> = outcomes
                .iter()
                .filter_map(|o| o.as_ref().ok())
                .map(|iters| {
                    Metrics::summarize(&iters.iter().flatten().copied().collect::<Vec<_>>()).0
                })
                .collect();
            let (mean, std) = Metrics::summarize(&per_ev_mean);
            let mut e = entry(
                &cfg,
                table,
                format!("train={frac};window=mean"),
                &[],
                mean,
                std,
            );
            e.n_evs = per_ev_mean.len();
            out.push(e);
        }
    }
    Ok(out)
}

/// Runs the modern pipeline (chi-squared selection on the modern table)
/// and the legacy one (scaling only on the legacy table) with the same
/// seeds. The tables must list the same sessions in the same order, which
/// makes every assembly and split identical across the two arms.
pub fn compare_legacy(
    config: &ExperimentConfig,
    modern: &FeatureTable,
    legacy: &FeatureTable,
    qs: &[f64],
) -> Result<ReportTable> {
    let aligned = modern.rows.len() == legacy.rows.len()
        && modern
            .rows
            .iter()
            .zip(&legacy.rows)
            .all(|(a, b)| a.session_id == b.session_id && a.ev_id == b.ev_id);
    if !aligned {
        return Err(Error::InvalidParameter(
            "modern and legacy tables do not list the same sessions".into(),
        ));
    }
    let mut legacy_cfg = config.clone();
    legacy_cfg.selection = SelectionMode::ScaleOnly;
    let mut out = ReportTable::default();
    for &q in qs {
        let m = run_profiling(&config.clone().with_q(q), modern)?;
        out.push(ReportEntry::from_report(&m, "arm=modern"));
        let l = run_profiling(&legacy_cfg.clone().with_q(q), legacy)?;
        out.push(ReportEntry::from_report(&l, "arm=legacy"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_partition_the_span() {
        for n in [0, 7, 20, 61, 100] {
            let mut covered = 0;
            for w in 0..20 {
                let (a, b) = window_bounds(n, 20, w);
                assert_eq!(a, covered);
                covered = b;
            }
            assert_eq!(covered, n);
        }
    }

    #[test]
    fn chrono_split_keeps_order() {
        let idx: Vec<usize> = (10..80).collect();
        let (train, test) = chrono_split(&idx, 0.8);
        assert_eq!(train.len(), 56);
        assert_eq!(test.first(), Some(&66));
    }

    #[test]
    fn default_lists() {
        assert_eq!(TRAIN_SIZES.len(), 8);
        assert_eq!(NOF_LIST.len() * Q_LIST.len(), 30);
    }
}
