//! Per-EV profiling: repeated assembly, split, selection, fit and scoring.

use serde::{Deserialize, Serialize};

use super::assemble::{assemble_indices, stratified_split};
use super::metrics::{Confusion, Metrics};
use crate::classifiers::{self, HyperParamGrid, ModelKind, DEFAULT_FOLDS};
use crate::error::{Error, Result};
use crate::features::selection::{fit_scaling_rows, fit_selection_rows};
use crate::features::FeatureTable;
use crate::{par, seed};

pub const DEFAULT_NOF: usize = 100;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SelectionMode {
    /// Min-max scaling then chi-squared top-k.
    ChiSquared { k: usize },
    /// Min-max scaling of every column.
    ScaleOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub grid: HyperParamGrid,
    pub q: f64,
    pub selection: SelectionMode,
    pub train_fraction: f64,
    pub iterations: usize,
    pub folds: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Standard grid, NoF 100, 80% training, per-model iteration count.
    pub fn new(model: ModelKind, seed: u64) -> Self {
        ExperimentConfig {
            model,
            grid: HyperParamGrid::standard(model),
            q: 1.0,
            selection: SelectionMode::ChiSquared { k: DEFAULT_NOF },
            train_fraction: DEFAULT_TRAIN_FRACTION,
            iterations: model.default_iterations(),
            folds: DEFAULT_FOLDS,
            seed,
        }
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = q;
        self
    }

    pub fn with_nof(mut self, k: usize) -> Self {
        self.selection = SelectionMode::ChiSquared { k };
        self
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.q >= 1.0 && self.q.is_finite()) {
            return bad(format!("q must be >= 1, got {}", self.q));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!(
                "train_fraction must be in (0, 1), got {}",
                self.train_fraction
            ));
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        if self.folds < 2 {
            return bad("folds must be at least 2".into());
        }
        if let SelectionMode::ChiSquared { k: 0 } = self.selection {
            return bad("nof must be at least 1".into());
        }
        if self.grid.kind != self.model {
            return bad(format!(
                "grid is for {}, model is {}",
                self.grid.kind, self.model
            ));
        }
        self.grid.validate()
    }

    /// Features fed to the model for a table of `d` columns.
    pub fn effective_nof(&self, d: usize) -> usize {
        match self.selection {
            SelectionMode::ChiSquared { k } => k.min(d),
            SelectionMode::ScaleOnly => d,
        }
    }
}

/// Fits selection on the training rows only, runs the grid search and
/// scores every test set.
pub(crate) fn evaluate_once(
    table: &FeatureTable,
    train: (&[usize], &[bool]),
    tests: &[(Vec<usize>, Vec<bool>)],
    config: &ExperimentConfig,
    model_seed: u64,
) -> Result<Vec<Confusion>> {
    let (train_idx, train_y) = train;
    let rows: Vec<&[f64]> = train_idx
        .iter()
        .map(|&i| table.rows[i].values.as_slice())
        .collect();
    let selection = match config.selection {
        SelectionMode::ChiSquared { k } => {
            fit_selection_rows(&table.names, &rows, train_y, k.min(table.n_features()))?
        }
        SelectionMode::ScaleOnly => fit_scaling_rows(&table.names, &rows),
    };
    let x: Vec<Vec<f64>> = rows.iter().map(|r| selection.transform_row(r)).collect();
    let model = classifiers::fit(&config.grid, &x, train_y, config.folds, model_seed)?;
    tests
        .iter()
        .map(|(idx, y)| {
            let pred = idx
                .iter()
                .map(|&i| model.predict_one(&selection.transform_row(&table.rows[i].values)))
                .collect::<Result<Vec<bool>>>()?;
            Ok(Confusion::from_predictions(y, &pred))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvMetrics {
    pub ev_id: String,
    pub n_vectors: usize,
    /// Mean over iterations.
    pub mean: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedEv {
    pub ev_id: String,
    pub code: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub config: ExperimentConfig,
    pub nof: usize,
    pub per_ev: Vec<EvMetrics>,
    /// Mean and population std over EVs of the per-EV means.
    pub mean: Metrics,
    pub std: Metrics,
    pub skipped: Vec<SkippedEv>,
}

impl MetricsReport {
    pub fn n_evs(&self) -> usize {
        self.per_ev.len()
    }
}

/// Per-EV outcome of repeated runs: one vector of metrics per iteration.
pub(crate) type EvOutcome = std::result::Result<Vec<Vec<Metrics>>, Error>;

/// Runs `job(ev_index, iteration)` for every pair in parallel and groups the
/// results by EV in order. A failing iteration skips its EV.
pub(crate) fn run_grid<F>(n_evs: usize, iterations: usize, job: F) -> Vec<EvOutcome>
where
    F: Fn(usize, usize) -> Result<Vec<Metrics>> + Sync + Send,
{
    let pairs: Vec<(usize, usize)> = (0..n_evs)
        .flat_map(|e| (0..iterations).map(move |it| (e, it)))
        .collect();
    let mut flat = par::map(&pairs, |&(e, it)| job(e, it)).into_iter();
    (0..n_evs)
        .map(|_| {
            // drain the whole chunk first: collecting straight into a Result
            // stops at the first error and would shift later EVs
            let chunk: Vec<_> = flat.by_ref().take(iterations).collect();
            chunk.into_iter().collect::<Result<Vec<_>>>()
        })
        .collect()
}

pub(crate) fn skip_entry(ev_id: &str, err: &Error) -> SkippedEv {
    log::warn!("skipping {ev_id}: {err}");
    SkippedEv {
        ev_id: ev_id.to_string(),
        code: err.code().to_string(),
        reason: err.to_string(),
    }
}

/// Reduces per-iteration metrics at test set `slot` to per-EV means and a
/// fleet summary.
pub(crate) fn summarize(
    evs: &[(String, usize)],
    outcomes: &[EvOutcome],
    slot: usize,
) -> (Vec<EvMetrics>, Metrics, Metrics, Vec<SkippedEv>) {
    let mut per_ev = Vec::new();
    let mut skipped = Vec::new();
    for ((ev, n), out) in evs.iter().zip(outcomes) {
        match out {
            Ok(iters) => {
                let at: Vec<Metrics> = iters.iter().map(|m| m[slot]).collect();
                per_ev.push(EvMetrics {
                    ev_id: ev.clone(),
                    n_vectors: *n,
                    mean: Metrics::summarize(&at).0,
                });
            }
            Err(e) => skipped.push(skip_entry(ev, e)),
        }
    }
    let means: Vec<Metrics> = per_ev.iter().map(|e| e.mean).collect();
    let (mean, std) = Metrics::summarize(&means);
    (per_ev, mean, std, skipped)
}

type Labeled = (Vec<usize>, Vec<bool>);

/// Training and test rows (table indices with labels) of one (EV,
/// iteration) pair. Depends only on the table's row order and the seed, so
/// two tables with aligned rows get identical splits.
pub fn profiling_split(
    config: &ExperimentConfig,
    table: &FeatureTable,
    ev_id: &str,
    ev_index: usize,
    iteration: usize,
) -> Result<(Labeled, Labeled)> {
    let path = |tag| [tag, ev_index as u64, iteration as u64];
    let mut rng = seed::rng(config.seed, &path(seed::tag::ASSEMBLE));
    let a = assemble_indices(table, ev_id, config.q, &mut rng)?;
    let (idx, labels) = a.indices_and_labels();
    let mut rng = seed::rng(config.seed, &path(seed::tag::SPLIT));
    let (tr, te) = stratified_split(&labels, config.train_fraction, &mut rng);
    let pick = |pos: &[usize]| -> Labeled {
        (
            pos.iter().map(|&p| idx[p]).collect(),
            pos.iter().map(|&p| labels[p]).collect(),
        )
    };
    Ok((pick(&tr), pick(&te)))
}

/// One binary classifier per EV, `iterations` random assemblies and splits
/// each, averaged per EV and then across EVs.
///
/// Seeds: assembly `[ASSEMBLE, ev, it]`, split `[SPLIT, ev, it]`, model
/// `[MODEL, ev, it]`, with `ev` the EV's position in the table.
pub fn run_profiling(config: &ExperimentConfig, table: &FeatureTable) -> Result<MetricsReport> {
    config.validate()?;
    if table.rows.is_empty() {
        return Err(Error::Empty("feature table"));
    }
    let groups = table.groups();
    let evs: Vec<(String, usize)> = groups
        .iter()
        .map(|(e, idx)| (e.clone(), idx.len()))
        .collect();
    let outcomes = run_grid(evs.len(), config.iterations, |e, it| {
        let ((train_idx, train_y), test) = profiling_split(config, table, &evs[e].0, e, it)?;
        let conf = evaluate_once(
            table,
            (&train_idx, &train_y),
            &[test],
            config,
            seed::derive(config.seed, &[seed::tag::MODEL, e as u64, it as u64]),
        )?;
        conf.iter().map(Confusion::metrics).collect()
    });
    let (per_ev, mean, std, skipped) = summarize(&evs, &outcomes, 0);
    Ok(MetricsReport {
        config: config.clone(),
        nof: config.effective_nof(table.n_features()),
        per_ev,
        mean,
        std,
        skipped,
    })
}
