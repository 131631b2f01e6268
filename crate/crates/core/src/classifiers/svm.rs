//! Soft-margin SVM with an RBF kernel.
//!
//! The dual is solved by SMO: each step picks the maximal violating pair
//! (first-order working-set selection) and applies the clipped two-variable
//! update. The bias follows the usual rule: average of y*grad over free
//! vectors, or the midpoint of the feasible interval when none is free.

use serde::{Deserialize, Serialize};

pub const TOLERANCE: f64 = 1e-3;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub gamma: f64,
    pub support: Vec<Vec<f64>>,
    /// alpha_i * y_i for each support vector.
    pub coef: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
}

pub fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
    (-gamma * d2).exp()
}

impl SvmModel {
    pub fn fit(x: &[Vec<f64>], labels: &[bool], c: f64, gamma: f64) -> Self {
        let n = labels.len();
        let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rbf(gamma, &x[i], &x[j]);
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];
        let mut alpha = vec![0.0; n];
        let mut grad = vec![-1.0; n];
        let max_iter = (100 * n).max(100_000);
        let mut iterations = 0;
        let is_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
        let is_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);
        loop {
            let mut i = usize::MAX;
            let mut gmax = f64::NEG_INFINITY;
            let mut j = usize::MAX;
            let mut gmin = f64::INFINITY;
            for t in 0..n {
                let v = -y[t] * grad[t];
                if is_up(alpha[t], y[t]) && v > gmax {
                    gmax = v;
                    i = t;
                }
                if is_low(alpha[t], y[t]) && v < gmin {
                    gmin = v;
                    j = t;
                }
            }
            if i == usize::MAX || j == usize::MAX || gmax - gmin < TOLERANCE {
                break;
            }
            if iterations >= max_iter {
                log::warn!("svm: iteration cap {max_iter} reached before tolerance");
                break;
            }
            iterations += 1;
            let (old_i, old_j) = (alpha[i], alpha[j]);
            let qij = q(i, j);
            if y[i] != y[j] {
                let mut quad = q(i, i) + q(j, j) + 2.0 * qij;
                if quad <= 0.0 {
                    quad = TAU;
                }
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let mut quad = q(i, i) + q(j, j) - 2.0 * qij;
                if quad <= 0.0 {
                    quad = TAU;
                }
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
            let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
            for (t, g) in grad.iter_mut().enumerate() {
                *g += q(i, t) * di + q(j, t) * dj;
            }
        }

        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut free, mut sum_free) = (0usize, 0.0);
        for t in 0..n {
            let yg = y[t] * grad[t];
            let at_upper = alpha[t] >= c;
            let at_lower = alpha[t] <= 0.0;
            if at_upper {
                if y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if at_lower {
                if y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                sum_free += yg;
            }
        }
        let rho = if free > 0 {
            sum_free / free as f64
        } else {
            (ub + lb) / 2.0
        };

        let mut support = Vec::new();
        let mut coef = Vec::new();
        for t in 0..n {
            if alpha[t] > 0.0 {
                support.push(x[t].clone());
                coef.push(alpha[t] * y[t]);
            }
        }
        SvmModel {
            gamma,
            support,
            coef,
            rho,
            iterations,
        }
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(s, a)| a * rbf(self.gamma, s, row))
            .sum::<f64>()
            - self.rho
    }

    pub fn predict_one(&self, row: &[f64]) -> bool {
        self.decision(row) > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_two_clusters() {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..10 {
            let e = i as f64 * 0.01;
            x.push(vec![0.1 + e, 0.1]);
            y.push(false);
            x.push(vec![0.9 - e, 0.9]);
            y.push(true);
        }
        let m = SvmModel::fit(&x, &y, 10.0, 1.0);
        for (r, l) in x.iter().zip(&y) {
            assert_eq!(m.predict_one(r), *l);
        }
        let balance: f64 = m.coef.iter().sum();
        assert!(balance.abs() < 1e-9);
    }

    #[test]
    fn kernel_at_zero_distance_is_one() {
        assert_eq!(rbf(0.5, &[1.0, 2.0], &[1.0, 2.0]), 1.0);
        assert!((rbf(1.0, &[0.0], &[1.0]) - (-1.0f64).exp()).abs() < 1e-15);
    }
}
