//! Min-max scaling and chi-squared top-k selection.
//!
//! Features are scaled to [0, 1] with the training extremes (the statistic
//! needs non-negative inputs). For each feature, observed per-class sums of
//! the scaled values are compared against `total * class_prior`:
//! `chi2 = sum_c (obs_c - exp_c)^2 / exp_c`. Constant features score 0 and
//! are never selected.

use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionModel {
    pub names: Vec<String>,
    /// Selected column indices, ascending.
    pub selected: Vec<usize>,
    pub scores: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

fn extremes(rows: &[&[f64]], d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    for r in rows {
        for j in 0..d {
            min[j] = min[j].min(r[j]);
            max[j] = max[j].max(r[j]);
        }
    }
    (min, max)
}

fn scale(v: f64, min: f64, max: f64) -> f64 {
    if max > min {
        ((v - min) / (max - min)).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Chi-squared score of each column of a non-negative matrix.
pub fn chi2_scores(rows: &[Vec<f64>], labels: &[bool]) -> Vec<f64> {
    let d = rows.first().map_or(0, Vec::len);
    let n = rows.len() as f64;
    let n_pos = labels.iter().filter(|&&l| l).count() as f64;
    let priors = [1.0 - n_pos / n, n_pos / n];
    let mut observed = vec![[0.0f64; 2]; d];
    for (r, &l) in rows.iter().zip(labels) {
        for (j, v) in r.iter().enumerate() {
            observed[j][l as usize] += v;
        }
    }
    observed
        .iter()
        .map(|obs| {
            let total = obs[0] + obs[1];
            (0..2)
                .map(|c| {
                    let exp = total * priors[c];
                    if exp > 0.0 {
                        (obs[c] - exp).powi(2) / exp
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect()
}

/// Fits scaling and selects the `k` highest-scoring columns.
pub fn fit_selection_rows(
    names: &[String],
    rows: &[&[f64]],
    labels: &[bool],
    k: usize,
) -> Result<SelectionModel> {
    let d = names.len();
    if rows.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: rows.len(),
            got: labels.len(),
        });
    }
    if let Some(r) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: r.len(),
        });
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    if n_pos == 0 {
        return Err(Error::SingleClass("negatives"));
    }
    if n_pos == labels.len() {
        return Err(Error::SingleClass("positives"));
    }
    if k == 0 || k > d {
        return Err(Error::InvalidParameter(format!("k = {k} outside 1..={d}")));
    }
    let (min, max) = extremes(rows, d);
    let scaled: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| (0..d).map(|j| scale(r[j], min[j], max[j])).collect())
        .collect();
    let mut scores = chi2_scores(&scaled, labels);
    for j in 0..d {
        if max[j] <= min[j] {
            scores[j] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..d).filter(|&j| max[j] > min[j]).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    if order.len() < k {
        log::debug!(
            "only {} non-constant features available for k = {k}",
            order.len()
        );
    }
    let mut selected: Vec<usize> = order.into_iter().take(k).collect();
    selected.sort_unstable();
    Ok(SelectionModel {
        names: names.to_vec(),
        selected,
        scores,
        min,
        max,
    })
}

pub fn fit_selection(train: &LabeledDataset, k: usize) -> Result<SelectionModel> {
    let rows: Vec<&[f64]> = train.rows.iter().map(|r| r.values.as_slice()).collect();
    fit_selection_rows(&train.names, &rows, &train.labels, k)
}

/// Scaling without selection: every column is kept.
pub fn fit_scaling_rows(names: &[String], rows: &[&[f64]]) -> SelectionModel {
    let d = names.len();
    let (min, max) = extremes(rows, d);
    SelectionModel {
        names: names.to_vec(),
        selected: (0..d).collect(),
        scores: vec![0.0; d],
        min,
        max,
    }
}

impl SelectionModel {
    pub fn k(&self) -> usize {
        self.selected.len()
    }

    /// Scales with the training extremes, clamps to [0, 1] and projects.
    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        self.selected
            .iter()
            .map(|&j| scale(row[j], self.min[j], self.max[j]))
            .collect()
    }
}

pub fn apply_selection(
    model: &SelectionModel,
    names: &[String],
    rows: &[&[f64]],
) -> Result<Vec<Vec<f64>>> {
    if names != model.names.as_slice() {
        return Err(Error::FeatureNameMismatch);
    }
    rows.iter()
        .map(|r| {
            if r.len() != names.len() {
                Err(Error::DimensionMismatch {
                    expected: names.len(),
                    got: r.len(),
                })
            } else {
                Ok(model.transform_row(r))
            }
        })
        .collect()
}
