//! L2-regularised logistic regression by full-batch gradient descent.
//!
//! Objective: mean log-loss + ||w||^2 / (2 c n), bias unpenalised. The step
//! is fixed at 1/L with L an upper bound on the gradient's Lipschitz
//! constant, which makes every iteration non-increasing in the objective.

use serde::{Deserialize, Serialize};

pub const TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    /// Objective value before the first step and after each step.
    #[serde(skip)]
    pub loss_trace: Vec<f64>,
}

fn log1pexp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn objective(x: &[Vec<f64>], y: &[bool], w: &[f64], b: f64, c: f64) -> f64 {
    let n = y.len() as f64;
    let data: f64 = x
        .iter()
        .zip(y)
        .map(|(r, &l)| {
            let z = dot(r, w) + b;
            if l {
                log1pexp(-z)
            } else {
                log1pexp(z)
            }
        })
        .sum();
    data / n + dot(w, w) / (2.0 * c * n)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

impl LogisticModel {
    pub fn fit(x: &[Vec<f64>], y: &[bool], c: f64, max_iter: usize) -> Self {
        let n = y.len();
        let d = x.first().map_or(0, Vec::len);
        let nf = n as f64;
        let max_sq = x.iter().map(|r| dot(r, r) + 1.0).fold(0.0, f64::max);
        let lipschitz = 0.25 * max_sq + 1.0 / (c * nf);
        let step = 1.0 / lipschitz;
        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut loss = objective(x, y, &w, b, c);
        let mut trace = vec![loss];
        let mut iterations = 0;
        let mut gw = vec![0.0; d];
        while iterations < max_iter {
            gw.iter_mut().for_each(|g| *g = 0.0);
            let mut gb = 0.0;
            for (r, &l) in x.iter().zip(y) {
                let resid = sigmoid(dot(r, &w) + b) - if l { 1.0 } else { 0.0 };
                for (g, v) in gw.iter_mut().zip(r) {
                    *g += resid * v;
                }
                gb += resid;
            }
            for (wi, g) in w.iter_mut().zip(&gw) {
                *wi -= step * (g / nf + *wi / (c * nf));
            }
            b -= step * gb / nf;
            iterations += 1;
            let next = objective(x, y, &w, b, c);
            trace.push(next);
            let done = (loss - next).abs() < TOLERANCE;
            loss = next;
            if done {
                break;
            }
        }
        LogisticModel {
            weights: w,
            bias: b,
            iterations,
            loss_trace: trace,
        }
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        dot(row, &self.weights) + self.bias
    }

    pub fn predict_one(&self, row: &[f64]) -> bool {
        self.decision(row) > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_never_increases() {
        let x: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![i as f64 / 20.0, ((i * 3) % 7) as f64 / 7.0])
            .collect();
        let y: Vec<bool> = (0..20).map(|i| i % 3 != 0 && i > 5).collect();
        let m = LogisticModel::fit(&x, &y, 1.0, 5000);
        for pair in m.loss_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-15, "{pair:?}");
        }
        assert!(m.iterations < 5000);
    }

    #[test]
    fn zero_weights_follow_bias_sign() {
        let m = LogisticModel {
            weights: vec![0.0, 0.0],
            bias: -0.3,
            iterations: 0,
            loss_trace: vec![],
        };
        assert!(!m.predict_one(&[1.0, 5.0]));
        assert!(!m.predict_one(&[-4.0, 0.0]));
    }
}
