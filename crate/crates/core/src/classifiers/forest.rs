//! Random forest: bagged CART trees with per-split feature subsampling.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeParams};
use super::Criterion;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
}

/// Features inspected per split: ceil(sqrt(d)).
pub fn features_per_split(d: usize) -> usize {
    ((d as f64).sqrt().ceil() as usize).max(1)
}

impl RandomForest {
    /// Each tree sees a bootstrap sample drawn from `rng`; duplicates are
    /// encoded as integer sample weights.
    pub fn fit(
        x: &[Vec<f64>],
        y: &[bool],
        n_estimators: usize,
        max_depth: Option<usize>,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let n = y.len();
        let d = x.first().map_or(0, Vec::len);
        let params = TreeParams {
            criterion: Criterion::Gini,
            max_depth,
            max_features: Some(features_per_split(d)),
        };
        let mut trees = Vec::with_capacity(n_estimators);
        for _ in 0..n_estimators {
            let mut w = vec![0.0; n];
            for _ in 0..n {
                w[rng.gen_range(0..n)] += 1.0;
            }
            let idx: Vec<usize> = (0..n).filter(|&i| w[i] > 0.0).collect();
            trees.push(DecisionTree::fit_weighted(x, y, &w, idx, params, Some(rng)));
        }
        RandomForest { trees }
    }

    /// Majority vote; a tie is label 0.
    pub fn predict_one(&self, row: &[f64]) -> bool {
        let pos = self.trees.iter().filter(|t| t.predict_one(row)).count();
        2 * pos > self.trees.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn subsample_size() {
        assert_eq!(features_per_split(1), 1);
        assert_eq!(features_per_split(10), 4);
        assert_eq!(features_per_split(100), 10);
    }

    #[test]
    fn even_split_vote_is_negative() {
        let leaf = |label| DecisionTree {
            nodes: vec![super::super::tree::Node::Leaf { label }],
        };
        let f = RandomForest {
            trees: vec![leaf(true), leaf(false)],
        };
        assert!(!f.predict_one(&[0.0]));
    }

    #[test]
    fn seeded_fit_is_deterministic() {
        let x: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![i as f64 / 30.0, (i % 7) as f64])
            .collect();
        let y: Vec<bool> = (0..30).map(|i| i >= 15).collect();
        let a = RandomForest::fit(&x, &y, 10, None, &mut ChaCha8Rng::seed_from_u64(3));
        let b = RandomForest::fit(&x, &y, 10, None, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        let hits = x
            .iter()
            .zip(&y)
            .filter(|(r, l)| a.predict_one(r) == **l)
            .count();
        assert!(hits >= 28);
    }
}
