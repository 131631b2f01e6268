//! Discrete AdaBoost over depth-1 trees.

use serde::{Deserialize, Serialize};

use super::tree::{impurity, midpoint};
use super::Criterion;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub left: bool,
    pub right: bool,
}

impl Stump {
    pub fn predict_one(&self, row: &[f64]) -> bool {
        if row[self.feature] <= self.threshold {
            self.left
        } else {
            self.right
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub stumps: Vec<Stump>,
    pub alphas: Vec<f64>,
    /// Weighted training error of each accepted stump.
    pub errors: Vec<f64>,
}

/// Weighted gini stump. With no varying feature the stump is a constant
/// majority vote on feature 0.
fn fit_stump(x: &[Vec<f64>], y: &[bool], w: &[f64], orders: &[Vec<usize>]) -> Stump {
    let (pos, neg) = y.iter().zip(w).fold(
        (0.0, 0.0),
        |(p, n), (&l, &wi)| {
            if l {
                (p + wi, n)
            } else {
                (p, n + wi)
            }
        },
    );
    let total = pos + neg;
    let parent = impurity(Criterion::Gini, pos, neg);
    let mut best: Option<(f64, Stump)> = None;
    for (f, order) in orders.iter().enumerate() {
        let (mut lp, mut ln) = (0.0, 0.0);
        for k in 0..order.len().saturating_sub(1) {
            let i = order[k];
            if y[i] {
                lp += w[i];
            } else {
                ln += w[i];
            }
            let (a, b) = (x[i][f], x[order[k + 1]][f]);
            if a == b {
                continue;
            }
            let (rp, rn) = (pos - lp, neg - ln);
            let child = ((lp + ln) * impurity(Criterion::Gini, lp, ln)
                + (rp + rn) * impurity(Criterion::Gini, rp, rn))
                / total;
            let gain = parent - child;
            if best.as_ref().is_none_or(|(g, _)| gain > *g) {
                best = Some((
                    gain,
                    Stump {
                        feature: f,
                        threshold: midpoint(a, b),
                        left: lp > ln,
                        right: rp > rn,
                    },
                ));
            }
        }
    }
    best.map(|(_, s)| s).unwrap_or(Stump {
        feature: 0,
        threshold: f64::INFINITY,
        left: pos > neg,
        right: pos > neg,
    })
}

impl AdaBoost {
    pub fn fit(x: &[Vec<f64>], y: &[bool], n_estimators: usize) -> Self {
        let n = y.len();
        let d = x.first().map_or(0, Vec::len);
        let orders: Vec<Vec<usize>> = (0..d)
            .map(|f| {
                let mut o: Vec<usize> = (0..n).collect();
                o.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
                o
            })
            .collect();
        let mut w = vec![1.0 / n as f64; n];
        let mut model = AdaBoost {
            stumps: Vec::new(),
            alphas: Vec::new(),
            errors: Vec::new(),
        };
        for _ in 0..n_estimators {
            let stump = fit_stump(x, y, &w, &orders);
            let miss: Vec<bool> = x
                .iter()
                .zip(y)
                .map(|(r, &l)| stump.predict_one(r) != l)
                .collect();
            let err: f64 = w
                .iter()
                .zip(&miss)
                .filter(|(_, &m)| m)
                .map(|(wi, _)| wi)
                .sum();
            if err <= 0.0 {
                model.stumps.push(stump);
                model.alphas.push(1.0);
                model.errors.push(0.0);
                break;
            }
            if err >= 0.5 {
                if model.stumps.is_empty() {
                    model.stumps.push(stump);
                    model.alphas.push(1.0);
                    model.errors.push(err);
                }
                break;
            }
            let alpha = 0.5 * ((1.0 - err) / err).ln();
            model.stumps.push(stump);
            model.alphas.push(alpha);
            model.errors.push(err);
            for (wi, &m) in w.iter_mut().zip(&miss) {
                *wi *= if m { alpha.exp() } else { (-alpha).exp() };
            }
            let z: f64 = w.iter().sum();
            w.iter_mut().for_each(|wi| *wi /= z);
        }
        model
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        self.stumps
            .iter()
            .zip(&self.alphas)
            .map(|(s, a)| if s.predict_one(row) { *a } else { -*a })
            .sum()
    }

    pub fn predict_one(&self, row: &[f64]) -> bool {
        self.decision(row) > 0.0
    }
}
