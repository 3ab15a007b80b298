//! Ranking losses and their exact gradients.
//!
//! Scores are raw logits throughout; the sigmoid lives inside the loss.
//!
//! ```text
//! RankBCE:  l = sum_i -[ t_i*ln(sig(s_i)) + (1-t_i)*ln(1-sig(s_i)) ]
//! RankNet:  l = sum_{i!=j in group} CE( sig(s_i-s_j), clip((t_i-t_j+1)/2) )
//! blended:  alpha * l_data(S_label) + (1-alpha) * l_teacher(S_all)
//! ```
//!
//! Log-sigmoids are computed through the softplus identity
//! `-ln(sig(s)) = softplus(-s)`, whose exponent is never positive, so no
//! overflow clamp is needed even for |s| in the thousands.

use crate::error::{Error, Result};
use crate::numeric::{sigmoid, softplus};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    RankBce,
    RankNet,
}

/// How the blended objective mixes data and teacher terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistillationConfig {
    /// Weight on the data loss; `1 - alpha` goes to the teacher loss.
    pub alpha: f64,
    pub loss_kind: LossKind,
    pub teacher_count: usize,
}

impl DistillationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::validation(format!(
                "alpha must lie in [0,1], got {}",
                self.alpha
            )));
        }
        if self.teacher_count == 0 {
            return Err(Error::validation("teacher_count must be at least 1"));
        }
        Ok(())
    }
}

fn check_finite(name: &str, xs: &[f64]) -> Result<()> {
    if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
        return Err(Error::validation(format!("non-finite {name} value {x}")));
    }
    Ok(())
}

/// Pointwise binary cross entropy over logits. Targets may be soft
/// (anywhere in [0,1]). Returns the total loss and d(loss)/d(score).
pub fn rank_bce(scores: &[f64], targets: &[f64]) -> Result<(f64, Vec<f64>)> {
    if scores.len() != targets.len() {
        return Err(Error::validation(format!(
            "{} scores but {} targets",
            scores.len(),
            targets.len()
        )));
    }
    check_finite("score", scores)?;
    if let Some(t) = targets.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::validation(format!(
            "target {t} outside [0,1]"
        )));
    }
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(scores.len());
    for (&s, &t) in scores.iter().zip(targets) {
        // -t*ln(sig(s)) - (1-t)*ln(1-sig(s)) = t*softplus(-s) + (1-t)*softplus(s)
        loss += t * softplus(-s) + (1.0 - t) * softplus(s);
        grad.push(sigmoid(s) - t);
    }
    Ok((loss, grad))
}

/// Which ordered pairs enter the pairwise loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairMode {
    /// Every ordered pair i != j, including equal-target pairs (target 1/2).
    AllOrdered,
    /// Only pairs whose targets differ.
    DiscordantOnly,
}

fn check_offsets(offsets: &[usize], len: usize) -> Result<()> {
    if offsets.len() < 2 || offsets[0] != 0 || *offsets.last().unwrap() != len {
        return Err(Error::validation(format!(
            "group offsets must run from 0 to {len}"
        )));
    }
    if offsets.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::validation("group offsets must be non-decreasing"));
    }
    Ok(())
}

/// Pairwise cross entropy within each group, over the configured pair set.
///
/// `offsets` delimits groups: group g spans `offsets[g]..offsets[g+1]`.
/// Targets may be binary labels or real teacher scores; the pair target
/// `(t_i - t_j + 1)/2` is clipped to [0,1].
pub fn rank_net_with_mode(
    scores: &[f64],
    targets: &[f64],
    offsets: &[usize],
    mode: PairMode,
) -> Result<(f64, Vec<f64>)> {
    if scores.len() != targets.len() {
        return Err(Error::validation(format!(
            "{} scores but {} targets",
            scores.len(),
            targets.len()
        )));
    }
    check_finite("score", scores)?;
    check_finite("target", targets)?;
    check_offsets(offsets, scores.len())?;
    let mut loss = 0.0;
    let mut grad = vec![0.0; scores.len()];
    for g in offsets.windows(2) {
        for i in g[0]..g[1] {
            for j in g[0]..g[1] {
                if i == j {
                    continue;
                }
                if mode == PairMode::DiscordantOnly && targets[i] == targets[j] {
                    continue;
                }
                let p = ((targets[i] - targets[j] + 1.0) / 2.0).clamp(0.0, 1.0);
                let d = scores[i] - scores[j];
                loss += p * softplus(-d) + (1.0 - p) * softplus(d);
                let gd = sigmoid(d) - p;
                grad[i] += gd;
                grad[j] -= gd;
            }
        }
    }
    Ok((loss, grad))
}

/// [`rank_net_with_mode`] over all ordered pairs, the default reading of the
/// pairwise formula.
pub fn rank_net(scores: &[f64], targets: &[f64], offsets: &[usize]) -> Result<(f64, Vec<f64>)> {
    rank_net_with_mode(scores, targets, offsets, PairMode::AllOrdered)
}

/// Student scores and data targets for one blended-loss evaluation.
///
/// The labeled view and the all-groups view are separate vectors; when a
/// document appears in both, the caller adds the two gradient entries. For
/// RankBCE the offsets are ignored (the loss is pointwise).
#[derive(Debug, Clone, Copy)]
pub struct DistillationBatch<'a> {
    pub labeled_scores: &'a [f64],
    pub labeled_targets: &'a [f64],
    pub labeled_offsets: &'a [usize],
    pub all_scores: &'a [f64],
    pub all_offsets: &'a [usize],
}

/// Blended loss value with its two components and per-view gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct DistillationTerms {
    pub loss: f64,
    pub data_loss: f64,
    pub teacher_loss: f64,
    /// alpha-weighted gradient w.r.t. the labeled-view scores.
    pub grad_labeled: Vec<f64>,
    /// (1-alpha)-weighted gradient w.r.t. the all-view scores.
    pub grad_all: Vec<f64>,
}

fn data_term(batch: &DistillationBatch, kind: LossKind) -> Result<(f64, Vec<f64>)> {
    match kind {
        LossKind::RankBce => rank_bce(batch.labeled_scores, batch.labeled_targets),
        LossKind::RankNet => rank_net(
            batch.labeled_scores,
            batch.labeled_targets,
            batch.labeled_offsets,
        ),
    }
}

fn teacher_term(batch: &DistillationBatch, teacher: &[f64], kind: LossKind) -> Result<(f64, Vec<f64>)> {
    if teacher.len() != batch.all_scores.len() {
        return Err(Error::validation(format!(
            "teacher predicts {} documents, batch has {}",
            teacher.len(),
            batch.all_scores.len()
        )));
    }
    check_finite("teacher prediction", teacher)?;
    match kind {
        // Soft targets: the teacher's sigmoid output, not a hard threshold.
        LossKind::RankBce => {
            let soft: Vec<f64> = teacher.iter().map(|&g| sigmoid(g)).collect();
            rank_bce(batch.all_scores, &soft)
        }
        // Raw teacher logits feed the pairwise target, clipped inside.
        LossKind::RankNet => rank_net(batch.all_scores, teacher, batch.all_offsets),
    }
}

/// Blended objective against the mean of the given teachers:
/// `alpha * l_data + (1-alpha) * mean_t l_teacher(t)`.
pub fn multi_teacher_loss(
    batch: &DistillationBatch,
    teachers: &[&[f64]],
    cfg: &DistillationConfig,
) -> Result<DistillationTerms> {
    cfg.validate()?;
    if teachers.is_empty() {
        return Err(Error::validation("at least one teacher is required"));
    }
    let (data_loss, data_grad) = data_term(batch, cfg.loss_kind)?;

    let mut teacher_loss = 0.0;
    let mut teacher_grad = vec![0.0; batch.all_scores.len()];
    for teacher in teachers {
        let (l, g) = teacher_term(batch, teacher, cfg.loss_kind)?;
        teacher_loss += l;
        for (acc, gi) in teacher_grad.iter_mut().zip(g) {
            *acc += gi;
        }
    }
    let inv = 1.0 / teachers.len() as f64;
    teacher_loss *= inv;
    for g in teacher_grad.iter_mut() {
        *g *= inv;
    }

    let a = cfg.alpha;
    Ok(DistillationTerms {
        loss: a * data_loss + (1.0 - a) * teacher_loss,
        data_loss,
        teacher_loss,
        grad_labeled: data_grad.into_iter().map(|g| a * g).collect(),
        grad_all: teacher_grad.into_iter().map(|g| (1.0 - a) * g).collect(),
    })
}

/// [`multi_teacher_loss`] with a single teacher.
pub fn distillation_loss(
    batch: &DistillationBatch,
    teacher: &[f64],
    cfg: &DistillationConfig,
) -> Result<DistillationTerms> {
    multi_teacher_loss(batch, &[teacher], cfg)
}

/// Relative magnitudes of the two loss terms, before and after mixing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossScaleReport {
    pub data_loss: f64,
    pub teacher_loss: f64,
    pub alpha: f64,
    /// teacher_loss / data_loss; 0 when the teacher loss is 0.
    pub ratio: f64,
    pub data_share: f64,
    pub teacher_share: f64,
}

pub fn loss_scale_report(data_loss: f64, teacher_loss: f64, alpha: f64) -> Result<LossScaleReport> {
    if !data_loss.is_finite() || !teacher_loss.is_finite() {
        return Err(Error::validation("loss values must be finite"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::validation(format!("alpha {alpha} outside [0,1]")));
    }
    let ratio = if teacher_loss == 0.0 {
        0.0
    } else if data_loss == 0.0 {
        f64::INFINITY
    } else {
        teacher_loss / data_loss
    };
    Ok(LossScaleReport {
        data_loss,
        teacher_loss,
        alpha,
        ratio,
        data_share: alpha * data_loss,
        teacher_share: (1.0 - alpha) * teacher_loss,
    })
}
