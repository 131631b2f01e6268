use serde::{Deserialize, Serialize};

use super::{HyperParams, KnnMetric, KnnWeights};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<bool>,
    pub k: usize,
    pub weights: KnnWeights,
    pub metric: KnnMetric,
}

pub fn distance(metric: KnnMetric, a: &[f64], b: &[f64]) -> f64 {
    match metric {
        KnnMetric::Euclidean => a
            .iter()
            .zip(b)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt(),
        KnnMetric::Manhattan => a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum(),
    }
}

/// Training indices ordered by (distance, index).
fn neighbor_order(x: &[Vec<f64>], query: &[f64], metric: KnnMetric) -> Vec<(f64, usize)> {
    let mut d: Vec<(f64, usize)> = x
        .iter()
        .enumerate()
        .map(|(i, r)| (distance(metric, r, query), i))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d
}

/// Vote over the first `k` entries of a sorted neighbor list. Zero-distance
/// neighbors get infinite weight under distance weighting, so they alone
/// vote when present. Ties go to the negative class.
fn vote(order: &[(f64, usize)], y: &[bool], k: usize, weights: KnnWeights) -> bool {
    let nn = &order[..k.min(order.len())];
    let (mut pos, mut neg) = (0.0, 0.0);
    match weights {
        KnnWeights::Uniform => {
            for &(_, i) in nn {
                if y[i] {
                    pos += 1.0;
                } else {
                    neg += 1.0;
                }
            }
        }
        KnnWeights::Distance => {
            let exact = nn.iter().any(|&(d, _)| d == 0.0);
            for &(d, i) in nn {
                let w = if exact {
                    if d == 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    1.0 / d
                };
                if y[i] {
                    pos += w;
                } else {
                    neg += w;
                }
            }
        }
    }
    pos > neg
}

impl KnnModel {
    pub fn fit(
        x: &[Vec<f64>],
        y: &[bool],
        k: usize,
        weights: KnnWeights,
        metric: KnnMetric,
    ) -> Self {
        KnnModel {
            x: x.to_vec(),
            y: y.to_vec(),
            k,
            weights,
            metric,
        }
    }

    pub fn predict_one(&self, query: &[f64]) -> bool {
        let order = neighbor_order(&self.x, query, self.metric);
        vote(&order, &self.y, self.k, self.weights)
    }
}

/// Predictions of every kNN grid point on a validation set, sharing one
/// neighbor ordering per (metric, query). Output is indexed like `points`.
pub fn grid_predictions(
    train_x: &[Vec<f64>],
    train_y: &[bool],
    val_x: &[Vec<f64>],
    points: &[HyperParams],
) -> Vec<Vec<bool>> {
    let mut out = vec![Vec::with_capacity(val_x.len()); points.len()];
    for metric in [KnnMetric::Euclidean, KnnMetric::Manhattan] {
        let members: Vec<usize> = points
            .iter()
            .enumerate()
            .filter(|(_, p)| matches!(p, HyperParams::Knn { metric: m, .. } if *m == metric))
            .map(|(i, _)| i)
            .collect();
        if members.is_empty() {
            continue;
        }
        for q in val_x {
            let order = neighbor_order(train_x, q, metric);
            for &pi in &members {
                if let HyperParams::Knn {
                    n_neighbors,
                    weights,
                    ..
                } = points[pi]
                {
                    out[pi].push(vote(&order, train_y, n_neighbors, weights));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_nn_recalls_training_points() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.1, 0.0]];
        let y = vec![true, false, false];
        let m = KnnModel::fit(&x, &y, 1, KnnWeights::Uniform, KnnMetric::Euclidean);
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(m.predict_one(xi), *yi);
        }
    }

    #[test]
    fn exact_match_dominates_distance_vote() {
        let x = vec![vec![0.0], vec![0.1], vec![0.2]];
        let y = vec![true, false, false];
        let m = KnnModel::fit(&x, &y, 3, KnnWeights::Distance, KnnMetric::Manhattan);
        assert!(m.predict_one(&[0.0]));
        let u = KnnModel::fit(&x, &y, 3, KnnWeights::Uniform, KnnMetric::Manhattan);
        assert!(!u.predict_one(&[0.0]));
    }

    #[test]
    fn ties_go_negative() {
        let x = vec![vec![0.0], vec![2.0]];
        let m = KnnModel::fit(
            &x,
            &[true, false],
            2,
            KnnWeights::Uniform,
            KnnMetric::Euclidean,
        );
        assert!(!m.predict_one(&[1.0]));
    }
}
