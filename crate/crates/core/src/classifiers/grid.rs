//! Hyper-parameter grids and stratified grid-search cross-validation.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{
    fit_raw, knn, Criterion, FittedState, HyperParams, KnnMetric, KnnWeights, ModelKind,
    TrainedModel,
};
use crate::error::{Error, Result};
use crate::{par, seed};

pub const DEFAULT_FOLDS: usize = 3;

/// Grid points in enumeration order; the first point wins CV ties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParamGrid {
    pub kind: ModelKind,
    pub points: Vec<HyperParams>,
}

impl HyperParamGrid {
    /// The standard search grid for each model.
    pub fn standard(kind: ModelKind) -> Self {
        let mut points = Vec::new();
        match kind {
            ModelKind::Svm => {
                for c in [1.0, 10.0, 100.0, 1000.0] {
                    for gamma in [1e-4, 1e-3] {
                        points.push(HyperParams::Svm { c, gamma });
                    }
                }
            }
            ModelKind::Knn => {
                for n_neighbors in 1..=10 {
                    for weights in [KnnWeights::Uniform, KnnWeights::Distance] {
                        for metric in [KnnMetric::Euclidean, KnnMetric::Manhattan] {
                            points.push(HyperParams::Knn {
                                n_neighbors,
                                weights,
                                metric,
                            });
                        }
                    }
                }
            }
            ModelKind::Dt => {
                for criterion in [Criterion::Gini, Criterion::Entropy] {
                    for max_depth in [8, 10, 14, 30, 70, 110] {
                        points.push(HyperParams::Dt {
                            criterion,
                            max_depth,
                        });
                    }
                }
            }
            ModelKind::Lr => {
                for c in [0.01, 1.0, 100.0] {
                    points.push(HyperParams::Lr { c, max_iter: 5000 });
                }
            }
            ModelKind::Rf => {
                for n_estimators in [50, 200, 1000] {
                    for max_depth in [Some(10), Some(100), None] {
                        points.push(HyperParams::Rf {
                            n_estimators,
                            max_depth,
                        });
                    }
                }
            }
            ModelKind::Ada => {
                for n_estimators in [10, 100, 500, 1000, 5000] {
                    points.push(HyperParams::Ada { n_estimators });
                }
            }
        }
        HyperParamGrid { kind, points }
    }

    pub fn single(params: HyperParams) -> Self {
        HyperParamGrid {
            kind: params.kind(),
            points: vec![params],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::Empty("hyper-parameter grid"));
        }
        for p in &self.points {
            if p.kind() != self.kind {
                return Err(Error::InvalidParameter(format!(
                    "grid for {} contains {p}",
                    self.kind
                )));
            }
            p.validate()?;
        }
        Ok(())
    }
}

/// Assigns every row a fold in `0..k`. Each class is shuffled with `rng`
/// and dealt round-robin, so fold class counts differ by at most one.
pub fn stratified_folds(y: &[bool], k: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<usize> {
    let mut fold = vec![0; y.len()];
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        idx.shuffle(rng);
        for (p, i) in idx.into_iter().enumerate() {
            fold[i] = p % k;
        }
    }
    fold
}

fn f1(truth: &[bool], pred: &[bool]) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&t, &p) in truth.iter().zip(pred) {
        match (t, p) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            _ => {}
        }
    }
    if tp == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    }
}

fn check_inputs(x: &[Vec<f64>], y: &[bool]) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let d = x[0].len();
    for r in x {
        if r.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: r.len(),
            });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite training value".into()));
        }
    }
    if !y.iter().any(|&l| l) {
        return Err(Error::SingleClass("negatives"));
    }
    if y.iter().all(|&l| l) {
        return Err(Error::SingleClass("positives"));
    }
    Ok(d)
}

/// Grid search with stratified CV, then a refit of the winner on all rows.
///
/// When a class has fewer rows than `folds`, the fold count drops to that
/// class size (with a warning); below two folds the first grid point is
/// used without CV.
pub fn fit(
    grid: &HyperParamGrid,
    x: &[Vec<f64>],
    y: &[bool],
    folds: usize,
    master_seed: u64,
) -> Result<TrainedModel> {
    grid.validate()?;
    let d = check_inputs(x, y)?;
    if folds < 2 {
        return Err(Error::InvalidParameter("folds must be at least 2".into()));
    }
    let n_pos = y.iter().filter(|&&l| l).count();
    let k = folds.min(n_pos).min(y.len() - n_pos);
    if k < folds {
        log::warn!("grid search: reducing folds from {folds} to {k} (minority class has {k} rows)");
    }

    let scores = if grid.points.len() == 1 {
        vec![f64::NAN]
    } else if k < 2 {
        log::warn!("grid search: too few rows for CV, using the first grid point");
        vec![f64::NAN; grid.points.len()]
    } else {
        cv_scores(grid, x, y, k, master_seed)
    };
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    let params = grid.points[best];
    let model_seed = seed::derive(master_seed, &[seed::tag::MODEL]);
    let state = fit_raw(&params, x, y, model_seed);
    Ok(TrainedModel {
        kind: grid.kind,
        params,
        state,
        seed: master_seed,
        n_features: d,
        folds: if scores.iter().all(|s| s.is_nan()) {
            0
        } else {
            k
        },
        cv_scores: scores,
    })
}

fn cv_scores(
    grid: &HyperParamGrid,
    x: &[Vec<f64>],
    y: &[bool],
    k: usize,
    master_seed: u64,
) -> Vec<f64> {
    let mut rng = seed::rng(master_seed, &[seed::tag::FOLDS]);
    let assignment = stratified_folds(y, k, &mut rng);
    let splits: Vec<_> = (0..k)
        .map(|f| {
            let (mut tx, mut ty, mut vx, mut vy) = (vec![], vec![], vec![], vec![]);
            for i in 0..y.len() {
                if assignment[i] == f {
                    vx.push(x[i].clone());
                    vy.push(y[i]);
                } else {
                    tx.push(x[i].clone());
                    ty.push(y[i]);
                }
            }
            (tx, ty, vx, vy)
        })
        .collect();

    // per_fold[f][p] = F1 of grid point p on fold f
    let per_fold: Vec<Vec<f64>> = if grid.kind == ModelKind::Knn {
        par::map(&splits, |(tx, ty, vx, vy)| {
            knn::grid_predictions(tx, ty, vx, &grid.points)
                .iter()
                .map(|pred| f1(vy, pred))
                .collect()
        })
    } else {
        let jobs: Vec<(usize, usize)> = (0..k)
            .flat_map(|f| (0..grid.points.len()).map(move |p| (f, p)))
            .collect();
        let flat = par::map(&jobs, |&(f, p)| {
            let (tx, ty, vx, vy) = &splits[f];
            let fold_seed = seed::derive(master_seed, &[seed::tag::MODEL, f as u64 + 1]);
            let state: FittedState = fit_raw(&grid.points[p], tx, ty, fold_seed);
            let pred: Vec<bool> = vx.iter().map(|r| state.predict_one(r)).collect();
            f1(vy, &pred)
        });
        flat.chunks(grid.points.len())
            .map(<[f64]>::to_vec)
            .collect()
    };
    (0..grid.points.len())
        .map(|p| per_fold.iter().map(|s| s[p]).sum::<f64>() / k as f64)
        .collect()
}
