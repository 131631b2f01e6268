//! Binary classifiers and grid-search cross-validation.
//!
//! Every model predicts `true` for the target EV. Hyper-parameters are
//! chosen by stratified k-fold CV on positive-class F1, with ties resolved
//! to the earliest grid point; the winner is refit on the full training set.

pub mod boost;
pub mod forest;
pub mod grid;
pub mod knn;
pub mod logistic;
pub mod svm;
pub mod tree;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data_model::persist::{create, read_lines, ArtifactHeader};
use crate::error::{Error, Result};
use crate::seed;

pub use grid::{fit, stratified_folds, HyperParamGrid, DEFAULT_FOLDS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Svm,
    Knn,
    Dt,
    Lr,
    Rf,
    Ada,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Svm,
        ModelKind::Knn,
        ModelKind::Dt,
        ModelKind::Lr,
        ModelKind::Rf,
        ModelKind::Ada,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Svm => "svm",
            ModelKind::Knn => "knn",
            ModelKind::Dt => "dt",
            ModelKind::Lr => "lr",
            ModelKind::Rf => "rf",
            ModelKind::Ada => "ada",
        }
    }

    /// Iterations per EV used by default: ensembles are slower, so they get 25.
    pub fn default_iterations(self) -> usize {
        match self {
            ModelKind::Rf | ModelKind::Ada => 25,
            _ => 100,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KnnWeights {
    Uniform,
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KnnMetric {
    Euclidean,
    Manhattan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Gini,
    Entropy,
}

/// One grid point. SVM always uses the RBF kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum HyperParams {
    Svm {
        c: f64,
        gamma: f64,
    },
    Knn {
        n_neighbors: usize,
        weights: KnnWeights,
        metric: KnnMetric,
    },
    Dt {
        criterion: Criterion,
        max_depth: usize,
    },
    Lr {
        c: f64,
        max_iter: usize,
    },
    Rf {
        n_estimators: usize,
        max_depth: Option<usize>,
    },
    Ada {
        n_estimators: usize,
    },
}

impl HyperParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            HyperParams::Svm { .. } => ModelKind::Svm,
            HyperParams::Knn { .. } => ModelKind::Knn,
            HyperParams::Dt { .. } => ModelKind::Dt,
            HyperParams::Lr { .. } => ModelKind::Lr,
            HyperParams::Rf { .. } => ModelKind::Rf,
            HyperParams::Ada { .. } => ModelKind::Ada,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            HyperParams::Svm { c, gamma } => c > 0.0 && gamma > 0.0,
            HyperParams::Knn { n_neighbors, .. } => n_neighbors >= 1,
            HyperParams::Dt { max_depth, .. } => max_depth >= 1,
            HyperParams::Lr { c, max_iter } => c > 0.0 && max_iter >= 1,
            HyperParams::Rf {
                n_estimators,
                max_depth,
            } => n_estimators >= 1 && max_depth != Some(0),
            HyperParams::Ada { n_estimators } => n_estimators >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "bad hyper-parameters {self}"
            )))
        }
    }
}

impl fmt::Display for HyperParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HyperParams::Svm { c, gamma } => write!(f, "svm(kernel=rbf, c={c}, gamma={gamma})"),
            HyperParams::Knn {
                n_neighbors,
                weights,
                metric,
            } => write!(
                f,
                "knn(n_neighbors={n_neighbors}, weights={weights:?}, metric={metric:?})"
            ),
            HyperParams::Dt {
                criterion,
                max_depth,
            } => write!(f, "dt(criterion={criterion:?}, max_depth={max_depth})"),
            HyperParams::Lr { c, max_iter } => write!(f, "lr(c={c}, max_iter={max_iter})"),
            HyperParams::Rf {
                n_estimators,
                max_depth,
            } => match max_depth {
                Some(d) => write!(f, "rf(n_estimators={n_estimators}, max_depth={d})"),
                None => write!(f, "rf(n_estimators={n_estimators}, max_depth=none)"),
            },
            HyperParams::Ada { n_estimators } => write!(f, "ada(n_estimators={n_estimators})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "state", rename_all = "lowercase")]
pub enum FittedState {
    Svm(svm::SvmModel),
    Knn(knn::KnnModel),
    Dt(tree::DecisionTree),
    Lr(logistic::LogisticModel),
    Rf(forest::RandomForest),
    Ada(boost::AdaBoost),
}

impl FittedState {
    fn predict_one(&self, row: &[f64]) -> bool {
        match self {
            FittedState::Svm(m) => m.predict_one(row),
            FittedState::Knn(m) => m.predict_one(row),
            FittedState::Dt(m) => m.predict_one(row),
            FittedState::Lr(m) => m.predict_one(row),
            FittedState::Rf(m) => m.predict_one(row),
            FittedState::Ada(m) => m.predict_one(row),
        }
    }
}

/// Fits one grid point. `model_seed` drives the only randomized model (RF).
pub fn fit_raw(params: &HyperParams, x: &[Vec<f64>], y: &[bool], model_seed: u64) -> FittedState {
    match *params {
        HyperParams::Svm { c, gamma } => FittedState::Svm(svm::SvmModel::fit(x, y, c, gamma)),
        HyperParams::Knn {
            n_neighbors,
            weights,
            metric,
        } => FittedState::Knn(knn::KnnModel::fit(x, y, n_neighbors, weights, metric)),
        HyperParams::Dt {
            criterion,
            max_depth,
        } => FittedState::Dt(tree::DecisionTree::fit(x, y, criterion, Some(max_depth))),
        HyperParams::Lr { c, max_iter } => {
            FittedState::Lr(logistic::LogisticModel::fit(x, y, c, max_iter))
        }
        HyperParams::Rf {
            n_estimators,
            max_depth,
        } => {
            let mut rng = seed::rng(model_seed, &[]);
            FittedState::Rf(forest::RandomForest::fit(
                x,
                y,
                n_estimators,
                max_depth,
                &mut rng,
            ))
        }
        HyperParams::Ada { n_estimators } => {
            FittedState::Ada(boost::AdaBoost::fit(x, y, n_estimators))
        }
    }
}

pub const MODEL_FORMAT: &str = "evprofile.model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub params: HyperParams,
    pub state: FittedState,
    pub seed: u64,
    pub n_features: usize,
    /// Folds actually used by the grid search (0 when CV was skipped).
    pub folds: usize,
    /// Mean validation F1 per grid point, in grid order.
    pub cv_scores: Vec<f64>,
}

impl TrainedModel {
    pub fn predict_one(&self, row: &[f64]) -> Result<bool> {
        if row.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: row.len(),
            });
        }
        Ok(self.state.predict_one(row))
    }

    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<bool>> {
        rows.iter().map(|r| self.predict_one(r)).collect()
    }

    /// Header line followed by the model as one JSON document.
    pub fn save(&self, path: &Path) -> Result<()> {
        use std::io::Write;
        let mut out = create(path)?;
        let header = ArtifactHeader::new(MODEL_FORMAT, MODEL_VERSION).with("kind", self.kind);
        writeln!(out, "{}", header.to_line()).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(&mut out, self)?;
        writeln!(out).map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let lines = read_lines(path)?;
        let first = lines.first().ok_or_else(|| Error::Malformed {
            path: path.to_path_buf(),
            line: 1,
            reason: "empty model file".into(),
        })?;
        ArtifactHeader::parse_checked(path, first, MODEL_FORMAT, MODEL_VERSION)?;
        let body = lines[1..].join("\n");
        serde_json::from_str(&body).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: 2,
            reason: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_round_trip_through_strings() {
        for k in ModelKind::ALL {
            assert_eq!(k.as_str().parse::<ModelKind>().unwrap(), k);
        }
        assert!("xgb".parse::<ModelKind>().is_err());
        assert_eq!("RF".parse::<ModelKind>().unwrap(), ModelKind::Rf);
    }

    #[test]
    fn hyperparams_serialize_tagged() {
        let p = HyperParams::Rf {
            n_estimators: 50,
            max_depth: None,
        };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"model":"rf","n_estimators":50,"max_depth":null}"#);
        assert_eq!(serde_json::from_str::<HyperParams>(&s).unwrap(), p);
    }
}
