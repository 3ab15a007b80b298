//! Rank-based evaluation: DCG@k, NDCG@k, and dataset-level means.
//!
//! The gain of a document with label `y` is `2^y - 1` and the discount at
//! 1-based position `p` is `1/log2(1+p)`. Binary labels give gains in {0,1};
//! graded relevance in {0..4} works through the same formula. Groups whose
//! ideal DCG is zero (no relevant document) score 0 by convention.

use crate::dataset::RankingDataset;
use crate::error::{Error, Result};
use crate::numeric::{mean, sample_std};
use serde::{Deserialize, Serialize};

/// Positions assigned to documents by a scorer: `ranks[i]` is the 1-based
/// position of document `i` (rank 1 is best).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankingPermutation {
    pub ranks: Vec<usize>,
}

impl RankingPermutation {
    pub fn num_docs(&self) -> usize {
        self.ranks.len()
    }
}

/// Ranks documents by descending score. Equal scores keep document order, so
/// the lower index gets the better rank.
pub fn rank_by_scores(scores: &[f64]) -> Result<RankingPermutation> {
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::validation("NaN score cannot be ranked"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // sort_by is stable: ties keep ascending index order.
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let mut ranks = vec![0usize; scores.len()];
    for (pos, &doc) in order.iter().enumerate() {
        ranks[doc] = pos + 1;
    }
    Ok(RankingPermutation { ranks })
}

/// DCG@k of a permutation: sum over documents at positions <= k of
/// `(2^label - 1) / log2(1 + position)`.
pub fn dcg_at_k(perm: &RankingPermutation, labels: &[f64], k: usize) -> Result<f64> {
    if perm.ranks.len() != labels.len() {
        return Err(Error::validation(format!(
            "permutation covers {} documents but {} labels given",
            perm.ranks.len(),
            labels.len()
        )));
    }
    if k == 0 {
        return Err(Error::validation("k must be at least 1"));
    }
    let mut sum = 0.0;
    for (i, &rank) in perm.ranks.iter().enumerate() {
        if rank <= k {
            sum += (labels[i].exp2() - 1.0) / (1.0 + rank as f64).log2();
        }
    }
    Ok(sum)
}

/// NDCG@k: DCG of the score-induced ranking over DCG of the label-optimal
/// ranking (labels sorted decreasingly, ties by document index). Returns 0
/// when the ideal DCG is 0.
pub fn ndcg_at_k(scores: &[f64], labels: &[f64], k: usize) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::validation(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let ideal = dcg_at_k(&rank_by_scores(labels)?, labels, k)?;
    if ideal == 0.0 {
        return Ok(0.0);
    }
    let actual = dcg_at_k(&rank_by_scores(scores)?, labels, k)?;
    Ok(actual / ideal)
}

/// Mean and spread of per-group NDCG@k over a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NdcgSummary {
    pub k: usize,
    pub mean_ndcg: f64,
    /// Sample standard deviation over groups (0 for a single group).
    pub std_ndcg: f64,
}

/// The k values reported throughout: NDCG@8, @16, @32.
pub const DEFAULT_KS: [usize; 3] = [8, 16, 32];

/// Evaluates per-group scores against a dataset, one summary per k.
///
/// Labels come from each group's binary labels when present, otherwise from
/// graded relevance. `scores[g]` must align with `dataset.groups[g]`.
pub fn evaluate_dataset(
    scores: &[Vec<f64>],
    dataset: &RankingDataset,
    ks: &[usize],
) -> Result<Vec<NdcgSummary>> {
    if scores.len() != dataset.groups.len() {
        return Err(Error::validation(format!(
            "scores for {} groups but dataset has {}",
            scores.len(),
            dataset.groups.len()
        )));
    }
    let mut per_k = Vec::with_capacity(ks.len());
    for &k in ks {
        let mut values = Vec::with_capacity(dataset.groups.len());
        for (group, group_scores) in dataset.groups.iter().zip(scores) {
            if group_scores.len() != group.num_docs() {
                return Err(Error::validation(format!(
                    "group {}: {} scores for {} documents",
                    group.query_id,
                    group_scores.len(),
                    group.num_docs()
                )));
            }
            values.push(ndcg_at_k(group_scores, &group.eval_labels(), k)?);
        }
        per_k.push(NdcgSummary {
            k,
            mean_ndcg: mean(&values),
            std_ndcg: sample_std(&values),
        });
    }
    Ok(per_k)
}

/// One line of the evaluation report CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRow {
    pub run_id: String,
    pub strategy: String,
    pub k: usize,
    pub mean_ndcg: f64,
    pub std_ndcg: f64,
    pub seed: u64,
}
