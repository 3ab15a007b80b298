//! Ranking datasets: qid-grouped documents with graded relevance, derived
//! binary labels, and a regular/privileged feature split.
//!
//! The processing order mirrors the experimental pipeline: parse, filter
//! groups (enough documents, some positive relevance), apply the signed
//! log1p transform, synthesize binary labels by Gumbel-perturbed comparison,
//! then split feature columns by the magnitude of their correlation with the
//! binary label. Privileged columns are available during training only; the
//! student never consumes them.

mod fixture;
mod parse;

pub use fixture::{make_signal_fixture, make_synthetic_fixture, FixtureSpec, SignalFixtureSpec};
pub use parse::{parse_ranking_file, write_ranking_file};

use crate::error::{Error, Result};
use crate::numeric::sigmoid;
use crate::rng::seeded;
use nalgebra::DMatrix;
use rand_distr::{Distribution, Gumbel};
use serde::{Deserialize, Serialize};

/// One query and its candidate documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryGroup {
    pub query_id: String,
    /// Row per document, column per feature.
    pub features: DMatrix<f64>,
    /// Graded relevance in {0..4}, one entry per document.
    pub relevance: Vec<u8>,
    /// Binary labels in {0,1}, present once generated.
    pub binary_labels: Option<Vec<u8>>,
}

impl QueryGroup {
    pub fn num_docs(&self) -> usize {
        self.relevance.len()
    }

    /// True when at least one binary label is 1.
    pub fn is_positive(&self) -> Result<bool> {
        match &self.binary_labels {
            Some(labels) => Ok(labels.iter().any(|&y| y == 1)),
            None => Err(Error::validation(format!(
                "group {} has no binary labels",
                self.query_id
            ))),
        }
    }

    /// Labels used for evaluation: binary labels when generated, otherwise
    /// graded relevance.
    pub fn eval_labels(&self) -> Vec<f64> {
        match &self.binary_labels {
            Some(labels) => labels.iter().map(|&y| y as f64).collect(),
            None => self.relevance.iter().map(|&r| r as f64).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_docs() == 0 {
            return Err(Error::validation(format!(
                "group {} has no documents",
                self.query_id
            )));
        }
        if self.features.nrows() != self.num_docs() {
            return Err(Error::validation(format!(
                "group {}: {} feature rows for {} documents",
                self.query_id,
                self.features.nrows(),
                self.num_docs()
            )));
        }
        if let Some(r) = self.relevance.iter().find(|&&r| r > 4) {
            return Err(Error::validation(format!(
                "group {}: relevance {} outside 0..4",
                self.query_id, r
            )));
        }
        if let Some(labels) = &self.binary_labels {
            if labels.len() != self.num_docs() {
                return Err(Error::validation(format!(
                    "group {}: {} labels for {} documents",
                    self.query_id,
                    labels.len(),
                    self.num_docs()
                )));
            }
            if labels.iter().any(|&y| y > 1) {
                return Err(Error::validation(format!(
                    "group {}: binary label outside {{0,1}}",
                    self.query_id
                )));
            }
        }
        Ok(())
    }
}

/// An ordered collection of query groups sharing one feature space.
///
/// `regular_cols` and `privileged_cols` are disjoint, ascending column index
/// sets. Freshly parsed datasets treat every column as regular.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingDataset {
    pub groups: Vec<QueryGroup>,
    pub num_features: usize,
    pub regular_cols: Vec<usize>,
    pub privileged_cols: Vec<usize>,
}

impl RankingDataset {
    /// Wraps groups with every column regular.
    pub fn new(groups: Vec<QueryGroup>, num_features: usize) -> Self {
        RankingDataset {
            groups,
            num_features,
            regular_cols: (0..num_features).collect(),
            privileged_cols: Vec::new(),
        }
    }

    pub fn total_docs(&self) -> usize {
        self.groups.iter().map(|g| g.num_docs()).sum()
    }

    pub fn has_labels(&self) -> bool {
        !self.groups.is_empty() && self.groups.iter().all(|g| g.binary_labels.is_some())
    }

    pub fn validate(&self) -> Result<()> {
        for group in &self.groups {
            group.validate()?;
            if group.features.ncols() != self.num_features {
                return Err(Error::validation(format!(
                    "group {} has {} feature columns, dataset declares {}",
                    group.query_id,
                    group.features.ncols(),
                    self.num_features
                )));
            }
        }
        for &c in self.regular_cols.iter().chain(&self.privileged_cols) {
            if c >= self.num_features {
                return Err(Error::validation(format!(
                    "column index {c} out of range for {} features",
                    self.num_features
                )));
            }
        }
        if self
            .regular_cols
            .iter()
            .any(|c| self.privileged_cols.contains(c))
        {
            return Err(Error::validation(
                "regular and privileged column sets overlap",
            ));
        }
        Ok(())
    }

    /// Fraction of groups with at least one positive binary label.
    pub fn positive_fraction(&self) -> Result<f64> {
        if self.groups.is_empty() {
            return Ok(0.0);
        }
        let mut positive = 0usize;
        for group in &self.groups {
            if group.is_positive()? {
                positive += 1;
            }
        }
        Ok(positive as f64 / self.groups.len() as f64)
    }

    pub fn stats(&self) -> DatasetStats {
        let num_groups = self.groups.len();
        let total_docs = self.total_docs();
        DatasetStats {
            num_groups,
            total_docs,
            mean_docs_per_group: if num_groups == 0 {
                0.0
            } else {
                total_docs as f64 / num_groups as f64
            },
            num_features: self.num_features,
            num_regular: self.regular_cols.len(),
            num_privileged: self.privileged_cols.len(),
            positive_group_fraction: if self.has_labels() {
                self.positive_fraction().ok()
            } else {
                None
            },
        }
    }

    /// Copies the named columns of every group into dense matrices, in the
    /// order given.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Vec<DMatrix<f64>>> {
        for &c in cols {
            if c >= self.num_features {
                return Err(Error::validation(format!(
                    "column {c} out of range for {} features",
                    self.num_features
                )));
            }
        }
        Ok(self
            .groups
            .iter()
            .map(|g| {
                DMatrix::from_fn(g.num_docs(), cols.len(), |i, j| g.features[(i, cols[j])])
            })
            .collect())
    }
}

/// Summary statistics for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub num_groups: usize,
    pub total_docs: usize,
    pub mean_docs_per_group: f64,
    pub num_features: usize,
    pub num_regular: usize,
    pub num_privileged: usize,
    /// Absent until binary labels have been generated.
    pub positive_group_fraction: Option<f64>,
}

/// Parameters of binary label synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelGenConfig {
    /// Sharpness of the relevance-to-probability map; must be positive.
    pub temperature: f64,
    /// Relevance threshold: a document at `r = tau_target` is positive with
    /// probability one half.
    pub tau_target: f64,
    pub seed: u64,
}

impl LabelGenConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::validation(format!(
                "temperature must be a positive finite real, got {}",
                self.temperature
            )));
        }
        if !self.tau_target.is_finite() {
            return Err(Error::validation("tau_target must be finite"));
        }
        Ok(())
    }
}

/// Per-document Gumbel draws `(g0, g1)`, aligned with a dataset's groups.
///
/// Recorded so that a synthetic privileged signal can be thresholded from the
/// same noise that produced the labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GumbelNoise {
    pub draws: Vec<Vec<(f64, f64)>>,
}

/// Applies the signed log1p map `v -> ln(1+|v|)*sign(v)` to every feature.
pub fn log1p_transform(dataset: &RankingDataset) -> Result<RankingDataset> {
    let mut out = dataset.clone();
    for group in &mut out.groups {
        for v in group.features.iter_mut() {
            if !v.is_finite() {
                return Err(Error::validation(format!(
                    "non-finite feature value {v} in group {}",
                    group.query_id
                )));
            }
            *v = v.abs().ln_1p() * v.signum();
        }
    }
    Ok(out)
}

/// Keeps groups with at least `min_docs` documents and at least one document
/// of positive relevance.
pub fn filter_query_groups(dataset: &RankingDataset, min_docs: usize) -> Result<RankingDataset> {
    if min_docs == 0 {
        return Err(Error::validation("min_docs must be at least 1"));
    }
    let mut out = dataset.clone();
    out.groups.retain(|g| {
        g.num_docs() >= min_docs && g.relevance.iter().any(|&r| r > 0)
    });
    Ok(out)
}

fn threshold_labels(
    relevance: &[u8],
    noise: &[(f64, f64)],
    temperature: f64,
    threshold: f64,
) -> Vec<u8> {
    relevance
        .iter()
        .zip(noise)
        .map(|(&r, &(g0, g1))| {
            u8::from(temperature * r as f64 + g1 > temperature * threshold + g0)
        })
        .collect()
}

/// Draws fresh Gumbel noise for every document and thresholds it at
/// `cfg.tau_target`, recording the draws for reuse at other thresholds.
///
/// A document with relevance `r` comes out positive with probability
/// `sigmoid(t*(r - tau_target))`.
pub fn generate_binary_labels_recording(
    dataset: &RankingDataset,
    cfg: &LabelGenConfig,
) -> Result<(RankingDataset, GumbelNoise)> {
    cfg.validate()?;
    let gumbel = Gumbel::new(0.0, 1.0).expect("unit Gumbel parameters are valid");
    let mut rng = seeded(cfg.seed);
    let mut out = dataset.clone();
    let mut draws = Vec::with_capacity(out.groups.len());
    for group in &mut out.groups {
        let group_draws: Vec<(f64, f64)> = (0..group.num_docs())
            .map(|_| (gumbel.sample(&mut rng), gumbel.sample(&mut rng)))
            .collect();
        group.binary_labels = Some(threshold_labels(
            &group.relevance,
            &group_draws,
            cfg.temperature,
            cfg.tau_target,
        ));
        draws.push(group_draws);
    }
    Ok((out, GumbelNoise { draws }))
}

/// As [`generate_binary_labels_recording`] without keeping the noise.
pub fn generate_binary_labels(
    dataset: &RankingDataset,
    cfg: &LabelGenConfig,
) -> Result<RankingDataset> {
    generate_binary_labels_recording(dataset, cfg).map(|(d, _)| d)
}

/// Re-thresholds recorded noise at a different cutoff, yielding a 0/1 vector
/// per group. With `threshold = tau_target` this reproduces the labels bit
/// for bit; other thresholds give a correlated synthetic signal.
pub fn apply_threshold_with_noise(
    dataset: &RankingDataset,
    noise: &GumbelNoise,
    temperature: f64,
    threshold: f64,
) -> Result<Vec<Vec<u8>>> {
    if noise.draws.len() != dataset.groups.len() {
        return Err(Error::validation(format!(
            "noise covers {} groups, dataset has {}",
            noise.draws.len(),
            dataset.groups.len()
        )));
    }
    let mut out = Vec::with_capacity(dataset.groups.len());
    for (group, group_draws) in dataset.groups.iter().zip(&noise.draws) {
        if group_draws.len() != group.num_docs() {
            return Err(Error::validation(format!(
                "noise covers {} documents of group {}, expected {}",
                group_draws.len(),
                group.query_id,
                group.num_docs()
            )));
        }
        out.push(threshold_labels(
            &group.relevance,
            group_draws,
            temperature,
            threshold,
        ));
    }
    Ok(out)
}

/// Analytic positive probability for relevance `r` under a label config.
pub fn label_probability(cfg: &LabelGenConfig, relevance: u8) -> f64 {
    sigmoid(cfg.temperature * (relevance as f64 - cfg.tau_target))
}

/// Pearson correlation of each feature column (pooled over every document of
/// every group) with the binary label. Zero-variance columns get 0.
pub fn feature_label_correlations(dataset: &RankingDataset) -> Result<Vec<f64>> {
    if !dataset.has_labels() {
        return Err(Error::validation(
            "binary labels must be generated before correlation",
        ));
    }
    let n = dataset.total_docs();
    if n == 0 {
        return Ok(vec![0.0; dataset.num_features]);
    }
    let mut label_sum = 0.0;
    for g in &dataset.groups {
        for &y in g.binary_labels.as_ref().expect("labels checked") {
            label_sum += y as f64;
        }
    }
    let label_mean = label_sum / n as f64;

    let mut corrs = Vec::with_capacity(dataset.num_features);
    for c in 0..dataset.num_features {
        let mut feat_sum = 0.0;
        for g in &dataset.groups {
            feat_sum += g.features.column(c).sum();
        }
        let feat_mean = feat_sum / n as f64;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for g in &dataset.groups {
            let labels = g.binary_labels.as_ref().expect("labels checked");
            for (i, &y) in labels.iter().enumerate() {
                let dx = g.features[(i, c)] - feat_mean;
                let dy = y as f64 - label_mean;
                sxy += dx * dy;
                sxx += dx * dx;
                syy += dy * dy;
            }
        }
        if sxx == 0.0 || syy == 0.0 {
            corrs.push(0.0);
        } else {
            corrs.push(sxy / (sxx * syy).sqrt());
        }
    }
    Ok(corrs)
}

/// Marks the `num_privileged` columns most correlated (in magnitude) with
/// the binary label as privileged; everything else becomes regular. Ties go
/// to the lower column index, so the selection is nested in `num_privileged`.
pub fn split_features_by_correlation(
    dataset: &RankingDataset,
    num_privileged: usize,
) -> Result<RankingDataset> {
    if num_privileged > dataset.num_features {
        return Err(Error::validation(format!(
            "cannot mark {num_privileged} of {} columns privileged",
            dataset.num_features
        )));
    }
    let corrs = feature_label_correlations(dataset)?;
    let mut order: Vec<usize> = (0..dataset.num_features).collect();
    order.sort_by(|&a, &b| {
        corrs[b]
            .abs()
            .partial_cmp(&corrs[a].abs())
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut privileged: Vec<usize> = order[..num_privileged].to_vec();
    privileged.sort_unstable();
    let regular: Vec<usize> = (0..dataset.num_features)
        .filter(|c| !privileged.contains(c))
        .collect();
    let mut out = dataset.clone();
    out.regular_cols = regular;
    out.privileged_cols = privileged;
    Ok(out)
}

/// Splits groups into (positive, negative) by binary label, preserving order
/// within each part. Both halves share the feature metadata.
pub fn partition_by_positivity(
    dataset: &RankingDataset,
) -> Result<(RankingDataset, RankingDataset)> {
    let mut positive = dataset.clone();
    let mut negative = dataset.clone();
    positive.groups.clear();
    negative.groups.clear();
    for group in &dataset.groups {
        if group.is_positive()? {
            positive.groups.push(group.clone());
        } else {
            negative.groups.push(group.clone());
        }
    }
    Ok((positive, negative))
}
