//! Training strategies: the no-distillation baseline, self-distillation,
//! distillation from a privileged-only teacher, distillation from a
//! regular-plus-privileged teacher (single and multi-teacher), and
//! pretrain-then-finetune, plus the imputation evaluation and the ablation
//! sweeps over alpha and the two label thresholds.
//!
//! Every strategy is a pure function of (dataset, config, seed): training is
//! single-threaded and all shuffles derive from the config seed.

mod trainer;

use crate::dataset::{
    apply_threshold_with_noise, generate_binary_labels_recording, LabelGenConfig,
    RankingDataset,
};
use crate::error::{Error, Result};
use crate::losses::LossKind;
use crate::metrics::{evaluate_dataset, NdcgSummary, DEFAULT_KS};
use crate::model::{DecayMode, MlpModel};
use crate::rng::{mix, seeded};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use trainer::{run_training, LoopSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "baseline")]
    Baseline,
    #[serde(rename = "self-distill")]
    SelfDistill,
    #[serde(rename = "gend")]
    GenD,
    #[serde(rename = "pfd")]
    Pfd,
    #[serde(rename = "multi-teacher-pfd")]
    MultiTeacherPfd,
    #[serde(rename = "pretrain-finetune")]
    PretrainFinetune,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Strategy::Baseline => "baseline",
            Strategy::SelfDistill => "self-distill",
            Strategy::GenD => "gend",
            Strategy::Pfd => "pfd",
            Strategy::MultiTeacherPfd => "multi-teacher-pfd",
            Strategy::PretrainFinetune => "pretrain-finetune",
        };
        write!(f, "{name}")
    }
}

/// Which query groups contribute to the data-loss term. Negative groups are
/// treated as unlabeled either way: they always feed the teacher term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataLossScope {
    PositiveGroupsOnly,
    AllGroups,
}

/// Split used for per-epoch checkpoint selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckpointOn {
    /// A validation split carved from the training groups (default).
    Valid,
    /// The supplied test split; matches the original selection protocol but
    /// leaks the test set into model choice, so it is opt-in.
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub strategy: Strategy,
    pub loss_kind: LossKind,
    /// Weight of the data loss; `1 - alpha` weights the teacher loss.
    pub alpha: f64,
    pub epochs: usize,
    /// Approximate documents per batch; whole query groups are packed until
    /// the count is reached.
    pub batch_size: usize,
    pub base_lr: f64,
    pub seed: u64,
    pub data_loss_scope: DataLossScope,
    /// NDCG cutoff used for checkpoint selection.
    pub checkpoint_k: usize,
    pub hidden_dim: usize,
    pub depth: usize,
    pub weight_decay: f64,
    pub decay_mode: DecayMode,
    /// Share of training groups carved off for selection in Valid mode.
    pub validation_fraction: f64,
    /// Feature column holding the auxiliary binary target; required by the
    /// pretrain-finetune strategy only.
    pub aux_col: Option<usize>,
    /// Epoch budget of the finetune phase; 0 returns the pretrained model.
    pub finetune_epochs: usize,
}

impl TrainConfig {
    /// Per-loss-kind defaults: pointwise runs use batches of ~500 documents
    /// at lr 1e-3, pairwise runs ~300 at 3e-4; both train 100 epochs.
    pub fn defaults_for(strategy: Strategy, loss_kind: LossKind, seed: u64) -> Self {
        let (batch_size, base_lr) = match loss_kind {
            LossKind::RankBce => (500, 1e-3),
            LossKind::RankNet => (300, 3e-4),
        };
        TrainConfig {
            strategy,
            loss_kind,
            alpha: 0.5,
            epochs: 100,
            batch_size,
            base_lr,
            seed,
            data_loss_scope: DataLossScope::PositiveGroupsOnly,
            checkpoint_k: 8,
            hidden_dim: 100,
            depth: 5,
            weight_decay: 0.005,
            decay_mode: DecayMode::Decoupled,
            validation_fraction: 0.1,
            aux_col: None,
            finetune_epochs: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::config(format!("alpha must lie in [0,1], got {}", self.alpha)));
        }
        if self.epochs == 0 {
            return Err(Error::config("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be at least 1"));
        }
        if !(self.base_lr > 0.0 && self.base_lr.is_finite()) {
            return Err(Error::config("base_lr must be a positive finite real"));
        }
        if self.checkpoint_k == 0 {
            return Err(Error::config("checkpoint_k must be at least 1"));
        }
        if self.hidden_dim == 0 || self.depth < 2 {
            return Err(Error::config("model needs hidden_dim >= 1 and depth >= 2"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::config("weight_decay must be finite and nonnegative"));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::config("validation_fraction must lie in (0,1)"));
        }
        Ok(())
    }
}

/// Frozen per-document teacher scores covering every group of the dataset
/// they were generated from, in group order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TeacherPredictions {
    pub group_ids: Vec<String>,
    pub scores: Vec<Vec<f64>>,
    pub strategy: Strategy,
    pub checkpoint_id: String,
}

impl TeacherPredictions {
    /// Checks complete, aligned, finite coverage of `dataset`.
    pub fn validate_for(&self, dataset: &RankingDataset) -> Result<()> {
        if self.group_ids.len() != dataset.groups.len() {
            return Err(Error::validation(format!(
                "teacher {} covers {} groups, dataset has {}",
                self.checkpoint_id,
                self.group_ids.len(),
                dataset.groups.len()
            )));
        }
        for ((id, scores), group) in self.group_ids.iter().zip(&self.scores).zip(&dataset.groups) {
            if id != &group.query_id {
                return Err(Error::validation(format!(
                    "teacher {} keyed by group {id}, dataset group is {}",
                    self.checkpoint_id, group.query_id
                )));
            }
            if scores.len() != group.num_docs() {
                return Err(Error::validation(format!(
                    "teacher {} scores {} documents of group {id}, expected {}",
                    self.checkpoint_id,
                    scores.len(),
                    group.num_docs()
                )));
            }
            if scores.iter().any(|s| !s.is_finite()) {
                return Err(Error::validation(format!(
                    "teacher {} has a non-finite score in group {id}",
                    self.checkpoint_id
                )));
            }
        }
        Ok(())
    }
}

/// One epoch of training telemetry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochRow {
    pub epoch: usize,
    pub lr: f64,
    pub mean_batch_loss: f64,
    pub mean_data_loss: f64,
    pub mean_teacher_loss: f64,
    pub selection_ndcg: f64,
    pub best_so_far: bool,
}

/// A trained model with its provenance and training telemetry.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: MlpModel,
    /// Dataset columns the model consumes, in input order.
    pub input_cols: Vec<usize>,
    pub strategy: Strategy,
    pub best_epoch: usize,
    pub best_selection_ndcg: f64,
    pub epoch_rows: Vec<EpochRow>,
}

/// Scores every group of `dataset` through `model` using the given columns.
pub fn score_dataset(
    model: &MlpModel,
    dataset: &RankingDataset,
    input_cols: &[usize],
) -> Result<Vec<Vec<f64>>> {
    dataset
        .select_columns(input_cols)?
        .iter()
        .map(|f| model.score(f))
        .collect()
}

/// NDCG summaries of a trained model on a dataset.
pub fn evaluate_outcome(
    outcome: &TrainOutcome,
    dataset: &RankingDataset,
    ks: &[usize],
) -> Result<Vec<NdcgSummary>> {
    let scores = score_dataset(&outcome.model, dataset, &outcome.input_cols)?;
    evaluate_dataset(&scores, dataset, ks)
}

/// Splits off roughly `fraction` of the groups (at least one, never all) for
/// checkpoint selection. Both halves keep the original group order.
pub fn carve_validation(
    dataset: &RankingDataset,
    fraction: f64,
    seed: u64,
) -> Result<(RankingDataset, RankingDataset)> {
    let n = dataset.groups.len();
    if n < 2 {
        return Err(Error::config("need at least 2 groups to carve a validation split"));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::config("validation fraction must lie in (0,1)"));
    }
    let n_valid = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seeded(mix(seed, 0xca47e, 0)));
    let mut chosen = idx[..n_valid].to_vec();
    chosen.sort_unstable();
    let mut train = dataset.clone();
    let mut valid = dataset.clone();
    train.groups.clear();
    valid.groups.clear();
    let mut next = chosen.iter().peekable();
    for (g, group) in dataset.groups.iter().enumerate() {
        if next.peek() == Some(&&g) {
            valid.groups.push(group.clone());
            next.next();
        } else {
            train.groups.push(group.clone());
        }
    }
    Ok((train, valid))
}

/// Targets for the data loss under the configured scope; `None` marks a
/// group excluded (negative groups under the positive-only scope).
fn scope_targets(
    train: &RankingDataset,
    scope: DataLossScope,
) -> Result<Vec<Option<Vec<f64>>>> {
    if !train.has_labels() {
        return Err(Error::config("training requires generated binary labels"));
    }
    let mut out = Vec::with_capacity(train.groups.len());
    for group in &train.groups {
        let include = match scope {
            DataLossScope::AllGroups => true,
            DataLossScope::PositiveGroupsOnly => group.is_positive()?,
        };
        out.push(if include { Some(group.eval_labels()) } else { None });
    }
    if out.iter().all(|t| t.is_none()) {
        return Err(Error::config(
            "no positive query groups available for the data loss",
        ));
    }
    Ok(out)
}

/// Trains on regular features against the binary labels; no teacher term.
pub fn train_baseline(
    train: &RankingDataset,
    selection: &RankingDataset,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if train.regular_cols.is_empty() {
        return Err(Error::config("dataset has no regular feature columns"));
    }
    let data_targets = scope_targets(train, cfg.data_loss_scope)?;
    run_training(
        LoopSpec {
            train,
            selection,
            input_cols: &train.regular_cols,
            data_targets,
            teachers: Vec::new(),
            alpha: 1.0,
            epochs: cfg.epochs,
            warm_start: None,
            strategy: Strategy::Baseline,
        },
        cfg,
    )
}

fn train_teacher_with_cols(
    train: &RankingDataset,
    selection: &RankingDataset,
    cfg: &TrainConfig,
    input_cols: &[usize],
    strategy: Strategy,
) -> Result<(TrainOutcome, TeacherPredictions)> {
    let data_targets = scope_targets(train, cfg.data_loss_scope)?;
    let outcome = run_training(
        LoopSpec {
            train,
            selection,
            input_cols,
            data_targets,
            teachers: Vec::new(),
            alpha: 1.0,
            epochs: cfg.epochs,
            warm_start: None,
            strategy,
        },
        cfg,
    )?;
    let scores = score_dataset(&outcome.model, train, &outcome.input_cols)?;
    let predictions = TeacherPredictions {
        group_ids: train.groups.iter().map(|g| g.query_id.clone()).collect(),
        scores,
        strategy,
        checkpoint_id: format!("{strategy}-seed{}-epoch{}", cfg.seed, outcome.best_epoch),
    };
    Ok((outcome, predictions))
}

/// Teacher over the concatenation of regular and privileged columns, with
/// predictions frozen over every training group.
pub fn train_teacher_pfd(
    train: &RankingDataset,
    selection: &RankingDataset,
    cfg: &TrainConfig,
) -> Result<(TrainOutcome, TeacherPredictions)> {
    if train.privileged_cols.is_empty() {
        return Err(Error::config("teacher needs at least one privileged column"));
    }
    let cols: Vec<usize> = train
        .regular_cols
        .iter()
        .chain(&train.privileged_cols)
        .copied()
        .collect();
    train_teacher_with_cols(train, selection, cfg, &cols, Strategy::Pfd)
}

/// Teacher over privileged columns only.
pub fn train_teacher_gend(
    train: &RankingDataset,
    selection: &RankingDataset,
    cfg: &TrainConfig,
) -> Result<(TrainOutcome, TeacherPredictions)> {
    if train.privileged_cols.is_empty() {
        return Err(Error::config("teacher needs at least one privileged column"));
    }
    let cols = train.privileged_cols.clone();
    train_teacher_with_cols(train, selection, cfg, &cols, Strategy::GenD)
}

/// Teacher with the student's own inputs and architecture.
pub fn train_teacher_self(
    train: &RankingDataset,
    selection: &RankingDataset,
    cfg: &TrainConfig,
) -> Result<(TrainOutcome, TeacherPredictions)> {
    if train.regular_cols.is_empty() {
        return Err(Error::config("dataset has no regular feature columns"));
    }
    let cols = train.regular_cols.clone();
    train_teacher_with_cols(train, selection, cfg, &cols, Strategy::SelfDistill)
}

/// Trains the student on regular features against the blended objective:
/// `alpha` on the labels over the configured scope, `1 - alpha` on the mean
/// of the per-teacher losses over every group.
pub fn distill_student(
    train: &RankingDataset,
    selection: &RankingDataset,
    teachers: &[TeacherPredictions],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if teachers.is_empty() {
        return Err(Error::validation("distillation requires at least one teacher"));
    }
    for t in teachers {
        t.validate_for(train)?;
    }
    let strategy = if teachers.len() > 1 {
        Strategy::MultiTeacherPfd
    } else {
        teachers[0].strategy
    };
    // exact alpha = 1 zeroes the teacher term; run the literal baseline path
    // so the checkpoint is bit-identical to train_baseline under one seed
    if cfg.alpha == 1.0 {
        let mut outcome = train_baseline(train, selection, cfg)?;
        outcome.strategy = strategy;
        return Ok(outcome);
    }
    if train.regular_cols.is_empty() {
        return Err(Error::config("dataset has no regular feature columns"));
    }
    let data_targets = scope_targets(train, cfg.data_loss_scope)?;
    run_training(
        LoopSpec {
            train,
            selection,
            input_cols: &train.regular_cols,
            data_targets,
            teachers: teachers.iter().map(|t| t.scores.clone()).collect(),
            alpha: cfg.alpha,
            epochs: cfg.epochs,
            warm_start: None,
            strategy,
        },
        cfg,
    )
}

/// Trains the student architecture against a binary auxiliary column for
/// `cfg.epochs`, then continues against the real labels for
/// `cfg.finetune_epochs` (0 returns the pretrained model, evaluated on the
/// labels). The auxiliary phase uses every group; the finetune phase honors
/// the configured scope.
pub fn pretrain_finetune(
    train: &RankingDataset,
    selection: &RankingDataset,
    aux_col: usize,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if train.regular_cols.is_empty() {
        return Err(Error::config("dataset has no regular feature columns"));
    }
    if aux_col >= train.num_features {
        return Err(Error::config(format!(
            "auxiliary column {aux_col} out of range for {} features",
            train.num_features
        )));
    }
    let mut aux_targets = Vec::with_capacity(train.groups.len());
    for group in &train.groups {
        let mut t = Vec::with_capacity(group.num_docs());
        for i in 0..group.num_docs() {
            let v = group.features[(i, aux_col)];
            if v != 0.0 && v != 1.0 {
                return Err(Error::config(format!(
                    "auxiliary column {aux_col} holds non-binary value {v} in group {}",
                    group.query_id
                )));
            }
            t.push(v);
        }
        aux_targets.push(Some(t));
    }
    let pretrained = run_training(
        LoopSpec {
            train,
            selection,
            input_cols: &train.regular_cols,
            data_targets: aux_targets,
            teachers: Vec::new(),
            alpha: 1.0,
            epochs: cfg.epochs,
            warm_start: None,
            strategy: Strategy::PretrainFinetune,
        },
        cfg,
    )?;
    let data_targets = scope_targets(train, cfg.data_loss_scope)?;
    run_training(
        LoopSpec {
            train,
            selection,
            input_cols: &train.regular_cols,
            data_targets,
            teachers: Vec::new(),
            alpha: 1.0,
            epochs: cfg.finetune_epochs,
            warm_start: Some(pretrained.model),
            strategy: Strategy::PretrainFinetune,
        },
        cfg,
    )
}

/// What replaces the privileged inputs when a teacher is evaluated without
/// them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImputationMode {
    Zero,
    Mean,
}

/// Evaluates a teacher on test groups with its privileged inputs replaced
/// by constants: zero, or the per-column training means.
pub fn imputation_eval(
    teacher: &TrainOutcome,
    train: &RankingDataset,
    test: &RankingDataset,
    mode: ImputationMode,
) -> Result<Vec<NdcgSummary>> {
    let privileged: Vec<usize> = teacher
        .input_cols
        .iter()
        .copied()
        .filter(|c| train.privileged_cols.contains(c))
        .collect();
    if privileged.is_empty() {
        return Err(Error::validation(
            "model consumes no privileged columns; nothing to impute",
        ));
    }
    let mut fill = std::collections::HashMap::new();
    for &c in &privileged {
        let value = match mode {
            ImputationMode::Zero => 0.0,
            ImputationMode::Mean => {
                let mut sum = 0.0;
                let mut count = 0usize;
                for group in &train.groups {
                    for i in 0..group.num_docs() {
                        sum += group.features[(i, c)];
                        count += 1;
                    }
                }
                sum / count as f64
            }
        };
        fill.insert(c, value);
    }
    let mut scores = Vec::with_capacity(test.groups.len());
    for group in &test.groups {
        let feats = nalgebra::DMatrix::from_fn(
            group.num_docs(),
            teacher.input_cols.len(),
            |i, j| {
                let col = teacher.input_cols[j];
                match fill.get(&col) {
                    Some(&v) => v,
                    None => group.features[(i, col)],
                }
            },
        );
        scores.push(teacher.model.score(&feats)?);
    }
    evaluate_dataset(&scores, test, &DEFAULT_KS)
}

/// A strategy run end to end: the student outcome, any teachers trained on
/// the way, and NDCG summaries on the selection split and (when supplied)
/// the test split.
#[derive(Debug, Clone)]
pub struct StrategyRun {
    pub outcome: TrainOutcome,
    pub teachers: Vec<TrainOutcome>,
    pub selection_eval: Vec<NdcgSummary>,
    pub test_eval: Option<Vec<NdcgSummary>>,
}

/// Dispatches `cfg.strategy` over a labeled training set. In `Valid` mode
/// the selection split is carved from the training groups; `Test` mode
/// selects on the supplied test split.
pub fn run_strategy(
    train: &RankingDataset,
    test: Option<&RankingDataset>,
    cfg: &TrainConfig,
    checkpoint_on: CheckpointOn,
) -> Result<StrategyRun> {
    cfg.validate()?;
    let (fit, selection) = match checkpoint_on {
        CheckpointOn::Valid => carve_validation(train, cfg.validation_fraction, cfg.seed)?,
        CheckpointOn::Test => {
            let t = test.ok_or_else(|| {
                Error::config("checkpoint selection on test requires a test split")
            })?;
            (train.clone(), t.clone())
        }
    };
    let mut teachers = Vec::new();
    let mut outcome = match cfg.strategy {
        Strategy::Baseline => train_baseline(&fit, &selection, cfg)?,
        Strategy::SelfDistill => {
            let (t, preds) = train_teacher_self(&fit, &selection, cfg)?;
            teachers.push(t);
            distill_student(&fit, &selection, &[preds], cfg)?
        }
        Strategy::GenD => {
            let (t, preds) = train_teacher_gend(&fit, &selection, cfg)?;
            teachers.push(t);
            distill_student(&fit, &selection, &[preds], cfg)?
        }
        Strategy::Pfd => {
            let (t, preds) = train_teacher_pfd(&fit, &selection, cfg)?;
            teachers.push(t);
            distill_student(&fit, &selection, &[preds], cfg)?
        }
        Strategy::MultiTeacherPfd => {
            if fit.privileged_cols.is_empty() {
                return Err(Error::config("teacher needs at least one privileged column"));
            }
            let mut preds = Vec::new();
            for &p in &fit.privileged_cols.clone() {
                let cols: Vec<usize> =
                    fit.regular_cols.iter().copied().chain([p]).collect();
                let (t, mut pr) =
                    train_teacher_with_cols(&fit, &selection, cfg, &cols, Strategy::Pfd)?;
                pr.checkpoint_id = format!("{}-col{p}", pr.checkpoint_id);
                teachers.push(t);
                preds.push(pr);
            }
            distill_student(&fit, &selection, &preds, cfg)?
        }
        Strategy::PretrainFinetune => {
            let col = cfg.aux_col.ok_or_else(|| {
                Error::config("pretrain-finetune requires an auxiliary target column")
            })?;
            pretrain_finetune(&fit, &selection, col, cfg)?
        }
    };
    outcome.strategy = cfg.strategy;
    let selection_eval = evaluate_outcome(&outcome, &selection, &DEFAULT_KS)?;
    let test_eval = match test {
        Some(t) => Some(evaluate_outcome(&outcome, t, &DEFAULT_KS)?),
        None => None,
    };
    Ok(StrategyRun {
        outcome,
        teachers,
        selection_eval,
        test_eval,
    })
}

/// Appends one 0/1 column to every group, marking it privileged or regular.
pub fn append_binary_column(
    dataset: &RankingDataset,
    values: &[Vec<u8>],
    privileged: bool,
) -> Result<RankingDataset> {
    if values.len() != dataset.groups.len() {
        return Err(Error::validation(format!(
            "column values for {} groups, dataset has {}",
            values.len(),
            dataset.groups.len()
        )));
    }
    let new_col = dataset.num_features;
    let mut out = dataset.clone();
    out.num_features += 1;
    if privileged {
        out.privileged_cols.push(new_col);
    } else {
        out.regular_cols.push(new_col);
    }
    for (group, vals) in out.groups.iter_mut().zip(values) {
        if vals.len() != group.num_docs() {
            return Err(Error::validation(format!(
                "column gives {} values for {} documents of group {}",
                vals.len(),
                group.num_docs(),
                group.query_id
            )));
        }
        let mut feats = nalgebra::DMatrix::zeros(group.num_docs(), new_col + 1);
        feats
            .view_mut((0, 0), group.features.shape())
            .copy_from(&group.features);
        for (i, &v) in vals.iter().enumerate() {
            feats[(i, new_col)] = v as f64;
        }
        group.features = feats;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Alpha,
    TauTarget,
    TauPrivileged,
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            SweepAxis::Alpha => "alpha",
            SweepAxis::TauTarget => "tau_target",
            SweepAxis::TauPrivileged => "tau_privileged",
        };
        write!(f, "{name}")
    }
}

/// One sweep measurement: a strategy's test NDCG at one axis value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub strategy: String,
    pub k: usize,
    pub mean_ndcg: f64,
    pub std_ndcg: f64,
    /// Fraction of training groups that are positive at this axis value.
    pub train_positive_fraction: f64,
    pub seed: u64,
}

fn push_rows(
    rows: &mut Vec<SweepRow>,
    axis: SweepAxis,
    value: f64,
    strategy: &str,
    summaries: &[NdcgSummary],
    positive_fraction: f64,
    seed: u64,
) {
    for s in summaries {
        rows.push(SweepRow {
            axis,
            value,
            strategy: strategy.to_string(),
            k: s.k,
            mean_ndcg: s.mean_ndcg,
            std_ndcg: s.std_ndcg,
            train_positive_fraction: positive_fraction,
            seed,
        });
    }
}

fn relabel(dataset: &RankingDataset, labels: Vec<Vec<u8>>) -> RankingDataset {
    let mut out = dataset.clone();
    for (group, l) in out.groups.iter_mut().zip(labels) {
        group.binary_labels = Some(l);
    }
    out
}

/// Runs one ablation axis at a single seed.
///
/// Input datasets carry graded relevance; binary labels are generated here
/// from `label_cfg` (the test split uses an independent noise stream) so the
/// threshold axes can re-derive them per value from one recorded set of
/// Gumbel draws. The alpha and tau_target axes need a privileged/regular
/// split on the dataset; the tau_privileged axis ignores any existing split
/// and studies a synthesized privileged column thresholded from the label
/// noise itself.
pub fn run_ablation_sweep(
    train: &RankingDataset,
    test: &RankingDataset,
    label_cfg: &LabelGenConfig,
    axis: SweepAxis,
    values: &[f64],
    cfg: &TrainConfig,
) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    if values.is_empty() {
        return Err(Error::config("sweep needs at least one axis value"));
    }
    let (labeled_train, train_noise) = generate_binary_labels_recording(train, label_cfg)?;
    let test_cfg = LabelGenConfig {
        seed: mix(label_cfg.seed, 0x7e57, 1),
        ..*label_cfg
    };
    let (labeled_test, test_noise) = generate_binary_labels_recording(test, &test_cfg)?;

    let mut rows = Vec::new();
    match axis {
        SweepAxis::Alpha => {
            if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::config(format!("alpha value {v} outside [0,1]")));
            }
            if labeled_train.privileged_cols.is_empty() {
                return Err(Error::config("alpha sweep needs privileged columns"));
            }
            let (fit, valid) =
                carve_validation(&labeled_train, cfg.validation_fraction, cfg.seed)?;
            let positive = fit.positive_fraction()?;
            let (_, preds) = train_teacher_pfd(&fit, &valid, cfg)?;
            for &alpha in values {
                let mut scfg = cfg.clone();
                scfg.alpha = alpha;
                let student = distill_student(&fit, &valid, &[preds.clone()], &scfg)?;
                let summaries = evaluate_outcome(&student, &labeled_test, &DEFAULT_KS)?;
                push_rows(&mut rows, axis, alpha, "pfd-student", &summaries, positive, cfg.seed);
            }
        }
        SweepAxis::TauTarget => {
            if labeled_train.privileged_cols.is_empty() {
                return Err(Error::config("tau_target sweep needs privileged columns"));
            }
            for &tau in values {
                let train_v = relabel(
                    &labeled_train,
                    apply_threshold_with_noise(
                        &labeled_train,
                        &train_noise,
                        label_cfg.temperature,
                        tau,
                    )?,
                );
                let test_v = relabel(
                    &labeled_test,
                    apply_threshold_with_noise(
                        &labeled_test,
                        &test_noise,
                        label_cfg.temperature,
                        tau,
                    )?,
                );
                let (fit, valid) = carve_validation(&train_v, cfg.validation_fraction, cfg.seed)?;
                let positive = fit.positive_fraction()?;

                let baseline = train_baseline(&fit, &valid, cfg)?;
                let summaries = evaluate_outcome(&baseline, &test_v, &DEFAULT_KS)?;
                push_rows(&mut rows, axis, tau, "baseline", &summaries, positive, cfg.seed);

                let (_, self_preds) = train_teacher_self(&fit, &valid, cfg)?;
                let self_student = distill_student(&fit, &valid, &[self_preds], cfg)?;
                let summaries = evaluate_outcome(&self_student, &test_v, &DEFAULT_KS)?;
                push_rows(
                    &mut rows,
                    axis,
                    tau,
                    "self-distill-student",
                    &summaries,
                    positive,
                    cfg.seed,
                );

                let (_, pfd_preds) = train_teacher_pfd(&fit, &valid, cfg)?;
                let pfd_student = distill_student(&fit, &valid, &[pfd_preds], cfg)?;
                let summaries = evaluate_outcome(&pfd_student, &test_v, &DEFAULT_KS)?;
                push_rows(&mut rows, axis, tau, "pfd-student", &summaries, positive, cfg.seed);
            }
        }
        SweepAxis::TauPrivileged => {
            // the synthesized column is the one privileged feature here
            let mut base = labeled_train.clone();
            base.regular_cols = (0..base.num_features).collect();
            base.privileged_cols.clear();
            for &tau in values {
                let z = apply_threshold_with_noise(
                    &base,
                    &train_noise,
                    label_cfg.temperature,
                    tau,
                )?;
                let aug = append_binary_column(&base, &z, true)?;
                let (fit, valid) = carve_validation(&aug, cfg.validation_fraction, cfg.seed)?;
                let positive = fit.positive_fraction()?;
                let (_, preds) = train_teacher_pfd(&fit, &valid, cfg)?;
                let student = distill_student(&fit, &valid, &[preds], cfg)?;
                let summaries = evaluate_outcome(&student, &labeled_test, &DEFAULT_KS)?;
                push_rows(&mut rows, axis, tau, "pfd-student", &summaries, positive, cfg.seed);
            }
        }
    }
    Ok(rows)
}
