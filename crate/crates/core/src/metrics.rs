//! Set-recovery metrics and the counting bound.
//!
//! Corner cases: when both sets are empty, Jaccard and F1 are 1 (recovering
//! an empty defective set exactly counts as success). An empty estimate for
//! a non-empty defective set has F1 = 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ItemSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryStats {
    pub false_negatives: usize,
    pub false_positives: usize,
    pub misclassified: usize,
    pub jaccard: f64,
    pub f1: f64,
    pub exact: bool,
}

fn same_universe(truth: &ItemSet, estimate: &ItemSet) -> Result<()> {
    if truth.universe_size() != estimate.universe_size() {
        return Err(Error::DimensionMismatch {
            what: "estimate universe",
            expected: truth.universe_size(),
            found: estimate.universe_size(),
        });
    }
    Ok(())
}

/// FN = |K \ K̂|, FP = |K̂ \ K|, plus Jaccard and F1.
pub fn confusion(truth: &ItemSet, estimate: &ItemSet) -> Result<RecoveryStats> {
    same_universe(truth, estimate)?;
    let hits = truth.intersection_len(estimate);
    let false_negatives = truth.len() - hits;
    let false_positives = estimate.len() - hits;
    let misclassified = false_negatives + false_positives;
    Ok(RecoveryStats {
        false_negatives,
        false_positives,
        misclassified,
        jaccard: jaccard_from_counts(hits, truth.len(), estimate.len()),
        f1: f1_from_counts(hits, truth.len(), estimate.len()),
        exact: misclassified == 0,
    })
}

fn jaccard_from_counts(hits: usize, n_truth: usize, n_est: usize) -> f64 {
    let union = n_truth + n_est - hits;
    if union == 0 {
        1.0
    } else {
        hits as f64 / union as f64
    }
}

fn f1_from_counts(hits: usize, n_truth: usize, n_est: usize) -> f64 {
    if n_truth == 0 && n_est == 0 {
        return 1.0;
    }
    if hits == 0 {
        return 0.0;
    }
    let precision = hits as f64 / n_est as f64;
    let recall = hits as f64 / n_truth as f64;
    2.0 * precision * recall / (precision + recall)
}

/// `|K ∩ K̂| / |K ∪ K̂|`.
pub fn jaccard(truth: &ItemSet, estimate: &ItemSet) -> Result<f64> {
    same_universe(truth, estimate)?;
    Ok(jaccard_from_counts(
        truth.intersection_len(estimate),
        truth.len(),
        estimate.len(),
    ))
}

/// Harmonic mean of precision and recall.
pub fn f1_score(truth: &ItemSet, estimate: &ItemSet) -> Result<f64> {
    same_universe(truth, estimate)?;
    Ok(f1_from_counts(
        truth.intersection_len(estimate),
        truth.len(),
        estimate.len(),
    ))
}

/// `ln C(n, k)` as a sum of `ln((n-k+i)/i)`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

/// `min(1, 2^T / C(N, k))`: no decoder succeeds more often than this.
pub fn counting_bound(n: usize, k: usize, n_tests: usize) -> Result<f64> {
    if k > n {
        return Err(Error::param(format!("k = {k} exceeds N = {n}")));
    }
    let log_ratio = n_tests as f64 * std::f64::consts::LN_2 - ln_binomial(n, k);
    Ok(if log_ratio >= 0.0 { 1.0 } else { log_ratio.exp() })
}
