//! Q-unbalanced dataset assembly and stratified train/test splits.

use rand::seq::{index, SliceRandom};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::{FeatureTable, LabeledDataset};
use crate::seed;

/// Negatives drawn for `n_target` positives at ratio `q`.
pub fn negatives_for(n_target: usize, q: f64) -> usize {
    (q * n_target as f64).round() as usize
}

/// Row indices of an assembled dataset: every positive, then the sampled
/// negatives in ascending row order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assembly {
    pub positives: Vec<usize>,
    pub negatives: Vec<usize>,
}

impl Assembly {
    pub fn indices_and_labels(&self) -> (Vec<usize>, Vec<bool>) {
        let idx: Vec<usize> = self
            .positives
            .iter()
            .chain(&self.negatives)
            .copied()
            .collect();
        let labels = (0..idx.len()).map(|i| i < self.positives.len()).collect();
        (idx, labels)
    }
}

/// Samples `count` entries of `pool` without replacement, returned sorted.
pub fn sample_without_replacement(
    pool: &[usize],
    count: usize,
    target: &str,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    if count > pool.len() {
        return Err(Error::InsufficientNegatives {
            target: target.to_string(),
            needed: count,
            available: pool.len(),
        });
    }
    let mut picked: Vec<usize> = index::sample(rng, pool.len(), count)
        .into_iter()
        .map(|i| pool[i])
        .collect();
    picked.sort_unstable();
    Ok(picked)
}

pub(crate) fn assemble_indices(
    table: &FeatureTable,
    target_ev: &str,
    q: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Assembly> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("q must be >= 1, got {q}")));
    }
    let (positives, pool): (Vec<usize>, Vec<usize>) =
        (0..table.rows.len()).partition(|&i| table.rows[i].ev_id == target_ev);
    if positives.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "target {target_ev} has {} feature vectors, need at least 2",
            positives.len()
        )));
    }
    let negatives =
        sample_without_replacement(&pool, negatives_for(positives.len(), q), target_ev, rng)?;
    Ok(Assembly {
        positives,
        negatives,
    })
}

/// All vectors of `target_ev` plus `round(q * n_target)` vectors sampled
/// uniformly without replacement from every other EV.
pub fn assemble(
    table: &FeatureTable,
    target_ev: &str,
    q: f64,
    master_seed: u64,
) -> Result<LabeledDataset> {
    let mut rng = seed::rng(master_seed, &[seed::tag::ASSEMBLE]);
    let a = assemble_indices(table, target_ev, q, &mut rng)?;
    let (idx, labels) = a.indices_and_labels();
    LabeledDataset::new(
        table.names.clone(),
        target_ev,
        idx.iter().map(|&i| table.rows[i].clone()).collect(),
        labels,
    )
}

/// Number of a class's rows going to training: `round(fraction * n)`,
/// kept within `1..n` so both sides see the class.
pub fn train_count(n: usize, fraction: f64) -> usize {
    let k = (fraction * n as f64).round() as usize;
    k.clamp(1, n.saturating_sub(1).max(1))
}

/// Stratified random split of `labels` positions into (train, test).
/// Both lists are ascending.
pub fn stratified_split(
    labels: &[bool],
    fraction: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.is_empty() {
            continue;
        }
        idx.shuffle(rng);
        let k = train_count(idx.len(), fraction);
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}
