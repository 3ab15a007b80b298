//! Synthetic datasets for tests, examples, and desk-scale experiments.

use super::{QueryGroup, RankingDataset};
use crate::error::{Error, Result};
use crate::rng::seeded;
use nalgebra::DMatrix;
use rand::distributions::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Relevance mass on grades 0..4. Skewed to low grades, positive mass on 4,
/// so sparse positives appear once labels are thresholded.
pub const RELEVANCE_WEIGHTS: [f64; 5] = [0.55, 0.20, 0.12, 0.08, 0.05];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub num_groups: usize,
    pub docs_per_group: usize,
    pub num_features: usize,
    pub seed: u64,
}

fn check_counts(num_groups: usize, docs_per_group: usize, num_features: usize) -> Result<()> {
    if num_groups == 0 || docs_per_group == 0 || num_features == 0 {
        return Err(Error::validation(
            "fixture counts must all be at least 1",
        ));
    }
    Ok(())
}

/// Pure-noise fixture: i.i.d. standard normal features, relevance from
/// [`RELEVANCE_WEIGHTS`]. Deterministic given the seed.
pub fn make_synthetic_fixture(spec: &FixtureSpec) -> Result<RankingDataset> {
    check_counts(spec.num_groups, spec.docs_per_group, spec.num_features)?;
    let mut rng = seeded(spec.seed);
    let grade = WeightedIndex::new(RELEVANCE_WEIGHTS).expect("weights are positive");
    let groups = (0..spec.num_groups)
        .map(|g| {
            let relevance: Vec<u8> = (0..spec.docs_per_group)
                .map(|_| grade.sample(&mut rng) as u8)
                .collect();
            let features = DMatrix::from_fn(spec.docs_per_group, spec.num_features, |_, _| {
                rng.sample(StandardNormal)
            });
            QueryGroup {
                query_id: (g + 1).to_string(),
                features,
                relevance,
                binary_labels: None,
            }
        })
        .collect();
    Ok(RankingDataset::new(groups, spec.num_features))
}

/// Fixture whose columns track relevance with configurable strength.
///
/// Column `j` of a document with grade `r` is
/// `feature_signals[j] * (r - 2)/2 + N(0,1)`: coefficient 0 gives pure
/// noise, large coefficients give a nearly clean relevance readout. Useful
/// for constructing informative or weak privileged columns on demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalFixtureSpec {
    pub num_groups: usize,
    pub docs_per_group: usize,
    pub feature_signals: Vec<f64>,
    pub relevance_weights: [f64; 5],
    pub seed: u64,
}

impl SignalFixtureSpec {
    pub fn new(
        num_groups: usize,
        docs_per_group: usize,
        feature_signals: Vec<f64>,
        seed: u64,
    ) -> Self {
        SignalFixtureSpec {
            num_groups,
            docs_per_group,
            feature_signals,
            relevance_weights: RELEVANCE_WEIGHTS,
            seed,
        }
    }
}

pub fn make_signal_fixture(spec: &SignalFixtureSpec) -> Result<RankingDataset> {
    check_counts(
        spec.num_groups,
        spec.docs_per_group,
        spec.feature_signals.len(),
    )?;
    if spec.relevance_weights.iter().any(|&w| w < 0.0)
        || spec.relevance_weights.iter().sum::<f64>() <= 0.0
    {
        return Err(Error::validation("relevance weights must be a nonnegative, nonzero mass"));
    }
    let mut rng = seeded(spec.seed);
    let grade = WeightedIndex::new(spec.relevance_weights).map_err(|e| {
        Error::validation(format!("invalid relevance weights: {e}"))
    })?;
    let num_features = spec.feature_signals.len();
    let groups = (0..spec.num_groups)
        .map(|g| {
            let relevance: Vec<u8> = (0..spec.docs_per_group)
                .map(|_| grade.sample(&mut rng) as u8)
                .collect();
            let mut features = DMatrix::zeros(spec.docs_per_group, num_features);
            for i in 0..spec.docs_per_group {
                let centered = (relevance[i] as f64 - 2.0) / 2.0;
                for (j, &signal) in spec.feature_signals.iter().enumerate() {
                    let noise: f64 = rng.sample(StandardNormal);
                    features[(i, j)] = signal * centered + noise;
                }
            }
            QueryGroup {
                query_id: (g + 1).to_string(),
                features,
                relevance,
                binary_labels: None,
            }
        })
        .collect();
    Ok(RankingDataset::new(groups, num_features))
}
