//! CART-style binary decision tree with sample weights.
//!
//! Splits are single-feature thresholds at midpoints between consecutive
//! distinct values, chosen to maximise the weighted impurity decrease.
//! Ties keep the first candidate in (feature, threshold) order. Growth stops
//! at `max_depth`, at a pure node, below two samples, or when no feature
//! varies within the node.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Criterion;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        label: bool,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub criterion: Criterion,
    pub max_depth: Option<usize>,
    /// Features drawn per split (random forests); `None` inspects all.
    pub max_features: Option<usize>,
}

pub(crate) fn impurity(criterion: Criterion, pos: f64, neg: f64) -> f64 {
    let total = pos + neg;
    if total <= 0.0 {
        return 0.0;
    }
    let (p, q) = (pos / total, neg / total);
    match criterion {
        Criterion::Gini => 1.0 - p * p - q * q,
        Criterion::Entropy => {
            let h = |r: f64| if r > 0.0 { -r * r.log2() } else { 0.0 };
            h(p) + h(q)
        }
    }
}

pub(crate) fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [bool],
    w: &'a [f64],
    params: TreeParams,
    rng: Option<&'a mut ChaCha8Rng>,
    nodes: Vec<Node>,
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn class_weights(&self, idx: &[usize]) -> (f64, f64) {
        idx.iter().fold((0.0, 0.0), |(p, n), &i| {
            if self.y[i] {
                (p + self.w[i], n)
            } else {
                (p, n + self.w[i])
            }
        })
    }

    /// Best threshold on one feature, or None when the feature is constant
    /// within the node.
    fn best_on_feature(&self, idx: &[usize], f: usize, pos: f64, neg: f64) -> Option<BestSplit> {
        let mut order = idx.to_vec();
        order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
        let total = pos + neg;
        let parent = impurity(self.params.criterion, pos, neg);
        let (mut lp, mut ln) = (0.0, 0.0);
        let mut best: Option<BestSplit> = None;
        for k in 0..order.len() - 1 {
            let i = order[k];
            if self.y[i] {
                lp += self.w[i];
            } else {
                ln += self.w[i];
            }
            let (a, b) = (self.x[i][f], self.x[order[k + 1]][f]);
            if a == b {
                continue;
            }
            let (rp, rn) = (pos - lp, neg - ln);
            let wl = lp + ln;
            let wr = rp + rn;
            let child = (wl * impurity(self.params.criterion, lp, ln)
                + wr * impurity(self.params.criterion, rp, rn))
                / total;
            let gain = parent - child;
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(BestSplit {
                    gain,
                    feature: f,
                    threshold: midpoint(a, b),
                });
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let (pos, neg) = self.class_weights(&idx);
        let me = self.nodes.len();
        self.nodes.push(Node::Leaf { label: pos > neg });
        let stop = self.params.max_depth.is_some_and(|d| depth >= d)
            || pos <= 0.0
            || neg <= 0.0
            || idx.len() < 2;
        if stop {
            return me;
        }
        let d = self.x[idx[0]].len();
        let mut features: Vec<usize> = (0..d).collect();
        let budget = match (self.params.max_features, self.rng.as_deref_mut()) {
            (Some(m), Some(rng)) => {
                features.shuffle(rng);
                m.max(1)
            }
            _ => d,
        };
        let mut best: Option<BestSplit> = None;
        let mut inspected = 0;
        for &f in &features {
            if inspected >= budget {
                break;
            }
            if let Some(s) = self.best_on_feature(&idx, f, pos, neg) {
                inspected += 1;
                if best.as_ref().is_none_or(|b| s.gain > b.gain) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best else {
            return me;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x[i][split.feature] <= split.threshold);
        let left = self.grow(left_idx, depth + 1);
        let right = self.grow(right_idx, depth + 1);
        self.nodes[me] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        me
    }
}

impl DecisionTree {
    pub fn fit(x: &[Vec<f64>], y: &[bool], criterion: Criterion, max_depth: Option<usize>) -> Self {
        let w = vec![1.0; y.len()];
        let params = TreeParams {
            criterion,
            max_depth,
            max_features: None,
        };
        Self::fit_weighted(x, y, &w, (0..y.len()).collect(), params, None)
    }

    /// Fits on the rows in `idx` with per-row weights.
    pub fn fit_weighted(
        x: &[Vec<f64>],
        y: &[bool],
        w: &[f64],
        idx: Vec<usize>,
        params: TreeParams,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Self {
        let mut b = Builder {
            x,
            y,
            w,
            params,
            rng,
            nodes: Vec::new(),
        };
        b.grow(idx, 0);
        DecisionTree { nodes: b.nodes }
    }

    pub fn predict_one(&self, row: &[f64]) -> bool {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { label } => return *label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn impurities() {
        assert_eq!(impurity(Criterion::Gini, 1.0, 1.0), 0.5);
        assert_eq!(impurity(Criterion::Entropy, 1.0, 1.0), 1.0);
        assert_eq!(impurity(Criterion::Gini, 3.0, 0.0), 0.0);
    }

    #[test]
    fn pure_leaf_labels() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let y = vec![false, false, true, true];
        let t = DecisionTree::fit(&x, &y, Criterion::Gini, Some(8));
        assert_eq!(t.depth(), 1);
        match &t.nodes[0] {
            Node::Split { threshold, .. } => assert_eq!(*threshold, 1.5),
            _ => panic!("expected split"),
        }
        assert!(t.predict_one(&[2.5]));
        assert!(!t.predict_one(&[0.5]));
    }

    #[test]
    fn xor_needs_depth_two() {
        let x = vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ];
        let y = vec![false, true, true, false];
        let t = DecisionTree::fit(&x, &y, Criterion::Entropy, None);
        for (r, l) in x.iter().zip(&y) {
            assert_eq!(t.predict_one(r), *l);
        }
        let stump = DecisionTree::fit(&x, &y, Criterion::Gini, Some(1));
        assert_eq!(stump.depth(), 1);
    }

    #[test]
    fn midpoint_never_reaches_upper_value() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        assert_eq!(midpoint(a, b), a);
        assert_eq!(midpoint(1.0, 2.0), 1.5);
    }
}
