//! Binary classification metrics from confusion counts.

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn from_predictions(truth: &[bool], pred: &[bool]) -> Self {
        let mut c = Confusion::default();
        for (&t, &p) in truth.iter().zip(pred) {
            match (t, p) {
                (true, true) => c.tp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn metrics(&self) -> Result<Metrics> {
        compute_metrics(self.tp, self.tn, self.fp, self.fn_)
    }
}

pub const METRIC_NAMES: [&str; 5] = ["precision", "recall", "specificity", "f1", "g_mean"];

/// JSON has no NaN; serde_json writes it as null.
fn nan_if_null<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(deserialize_with = "nan_if_null")]
    pub precision: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub recall: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub specificity: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub f1: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub g_mean: f64,
}

impl Metrics {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.precision,
            self.recall,
            self.specificity,
            self.f1,
            self.g_mean,
        ]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Metrics {
            precision: a[0],
            recall: a[1],
            specificity: a[2],
            f1: a[3],
            g_mean: a[4],
        }
    }

    /// Component-wise mean and population standard deviation.
    /// Mean and population std; NaN for an empty list.
    pub fn summarize(items: &[Metrics]) -> (Metrics, Metrics) {
        if items.is_empty() {
            let nan = Metrics::from_array([f64::NAN; 5]);
            return (nan, nan);
        }
        let n = items.len() as f64;
        let mut mean = [0.0; 5];
        for m in items {
            for (acc, v) in mean.iter_mut().zip(m.as_array()) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= n);
        let mut var = [0.0; 5];
        for m in items {
            for ((acc, v), mu) in var.iter_mut().zip(m.as_array()).zip(mean) {
                *acc += (v - mu) * (v - mu);
            }
        }
        let std = var.map(|v| (v / n).sqrt());
        (Metrics::from_array(mean), Metrics::from_array(std))
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall, specificity, F1 and G-Mean. Zero denominators give 0.
pub fn compute_metrics(tp: usize, tn: usize, fp: usize, fn_: usize) -> Result<Metrics> {
    if tp + tn + fp + fn_ == 0 {
        return Err(Error::Empty("confusion counts"));
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let specificity = ratio(tn, tn + fp);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(Metrics {
        precision,
        recall,
        specificity,
        f1,
        g_mean: (specificity * recall).sqrt(),
    })
}
