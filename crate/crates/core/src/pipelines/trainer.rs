//! The shared training loop behind every strategy: whole-group batches,
//! per-epoch reshuffles, Adam with the halving schedule, and best-epoch
//! checkpoint selection on a designated split.

use super::{EpochRow, Strategy, TrainConfig, TrainOutcome};
use crate::dataset::RankingDataset;
use crate::error::{Error, Result};
use crate::losses::{
    multi_teacher_loss, rank_bce, rank_net, DistillationBatch, DistillationConfig, LossKind,
};
use crate::metrics::ndcg_at_k;
use crate::model::{adam_step, backward, forward, init_mlp, MlpModel, OptimizerState};
use crate::numeric::mean;
use crate::rng::{mix, seeded};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;

pub(super) struct LoopSpec<'a> {
    pub train: &'a RankingDataset,
    pub selection: &'a RankingDataset,
    pub input_cols: &'a [usize],
    /// Per-group data-loss targets; `None` keeps a group out of the data
    /// term (it still feeds the teacher term when teachers are present).
    pub data_targets: Vec<Option<Vec<f64>>>,
    /// Per teacher, per group, per document scores covering every train
    /// group. Empty means a plain data-loss run.
    pub teachers: Vec<Vec<Vec<f64>>>,
    pub alpha: f64,
    pub epochs: usize,
    /// Continue from these parameters instead of a fresh init.
    pub warm_start: Option<MlpModel>,
    pub strategy: Strategy,
}

/// Greedy packing: groups are appended until the document count reaches the
/// budget, then a new batch starts. Groups are never split.
fn pack_batches(order: &[usize], sizes: &[usize], batch_docs: usize) -> Vec<Vec<usize>> {
    let mut batches = Vec::new();
    let mut current = Vec::new();
    let mut count = 0;
    for &g in order {
        current.push(g);
        count += sizes[g];
        if count >= batch_docs {
            batches.push(std::mem::take(&mut current));
            count = 0;
        }
    }
    if !current.is_empty() {
        batches.push(current);
    }
    batches
}

fn selection_ndcg(
    model: &MlpModel,
    feats: &[DMatrix<f64>],
    labels: &[Vec<f64>],
    k: usize,
) -> Result<f64> {
    let mut values = Vec::with_capacity(feats.len());
    for (f, l) in feats.iter().zip(labels) {
        values.push(ndcg_at_k(&model.score(f)?, l, k)?);
    }
    Ok(mean(&values))
}

pub(super) fn run_training(spec: LoopSpec, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if spec.input_cols.is_empty() {
        return Err(Error::config("no input columns to train on"));
    }
    if spec.train.groups.is_empty() || spec.selection.groups.is_empty() {
        return Err(Error::config("training and selection splits must be nonempty"));
    }
    if spec.data_targets.len() != spec.train.groups.len() {
        return Err(Error::validation("data targets misaligned with groups"));
    }
    let has_data = spec.data_targets.iter().any(|t| t.is_some());
    if !has_data && spec.teachers.is_empty() {
        return Err(Error::config(
            "nothing to optimize: no data-loss groups and no teachers",
        ));
    }

    let train_feats = spec.train.select_columns(spec.input_cols)?;
    let sel_feats = spec.selection.select_columns(spec.input_cols)?;
    let sel_labels: Vec<Vec<f64>> = spec.selection.groups.iter().map(|g| g.eval_labels()).collect();
    let sizes: Vec<usize> = spec.train.groups.iter().map(|g| g.num_docs()).collect();

    // teacher runs batch over every group; data-only runs skip the excluded
    let universe: Vec<usize> = if spec.teachers.is_empty() {
        (0..sizes.len())
            .filter(|&g| spec.data_targets[g].is_some())
            .collect()
    } else {
        (0..sizes.len()).collect()
    };

    let mut model = match spec.warm_start {
        Some(m) => {
            if m.input_dim != spec.input_cols.len() {
                return Err(Error::config(format!(
                    "warm-start model takes {} inputs, run supplies {}",
                    m.input_dim,
                    spec.input_cols.len()
                )));
            }
            m
        }
        None => init_mlp(spec.input_cols.len(), cfg.hidden_dim, cfg.depth, cfg.seed)?,
    };

    let mut best_params = model.flatten_params();
    let mut best_epoch = 0usize;
    let mut best_metric = f64::NEG_INFINITY;
    let mut epoch_rows = Vec::with_capacity(spec.epochs);

    if spec.epochs == 0 {
        // degenerate finetune phase: score the inherited model as-is
        best_metric = selection_ndcg(&model, &sel_feats, &sel_labels, cfg.checkpoint_k)?;
        return Ok(TrainOutcome {
            model,
            input_cols: spec.input_cols.to_vec(),
            strategy: spec.strategy,
            best_epoch: 0,
            best_selection_ndcg: best_metric,
            epoch_rows,
        });
    }

    let mut opt = OptimizerState::new(&model, cfg.base_lr);
    opt.weight_decay = cfg.weight_decay;
    opt.decay_mode = cfg.decay_mode;
    let dcfg = DistillationConfig {
        alpha: spec.alpha,
        loss_kind: cfg.loss_kind,
        teacher_count: spec.teachers.len().max(1),
    };

    for epoch in 0..spec.epochs {
        opt.set_epoch(epoch);
        let mut order = universe.clone();
        order.shuffle(&mut seeded(mix(cfg.seed, epoch as u64, 0x5f)));
        let batches = pack_batches(&order, &sizes, cfg.batch_size);

        let mut losses = Vec::with_capacity(batches.len());
        let mut data_losses = Vec::with_capacity(batches.len());
        let mut teacher_losses = Vec::with_capacity(batches.len());
        for batch in &batches {
            let total: usize = batch.iter().map(|&g| sizes[g]).sum();
            let mut feats = DMatrix::zeros(total, spec.input_cols.len());
            let mut offsets = Vec::with_capacity(batch.len() + 1);
            offsets.push(0usize);
            let mut row = 0;
            for &g in batch {
                feats
                    .view_mut((row, 0), train_feats[g].shape())
                    .copy_from(&train_feats[g]);
                row += sizes[g];
                offsets.push(row);
            }
            let (scores, cache) = forward(&model, &feats)?;

            let grad_scores;
            if spec.teachers.is_empty() {
                let mut targets = Vec::with_capacity(total);
                for &g in batch {
                    targets.extend_from_slice(
                        spec.data_targets[g].as_ref().expect("universe is filtered"),
                    );
                }
                let (loss, grad) = match cfg.loss_kind {
                    LossKind::RankBce => rank_bce(&scores, &targets)?,
                    LossKind::RankNet => rank_net(&scores, &targets, &offsets)?,
                };
                losses.push(loss);
                data_losses.push(loss);
                teacher_losses.push(0.0);
                grad_scores = grad;
            } else {
                // labeled view: the subset of batch rows whose group carries
                // data targets, kept in batch order
                let mut labeled_scores = Vec::new();
                let mut labeled_targets = Vec::new();
                let mut labeled_offsets = vec![0usize];
                let mut labeled_rows = Vec::new();
                for (b, &g) in batch.iter().enumerate() {
                    if let Some(targets) = &spec.data_targets[g] {
                        let span = offsets[b]..offsets[b + 1];
                        labeled_scores.extend_from_slice(&scores[span.clone()]);
                        labeled_targets.extend_from_slice(targets);
                        labeled_rows.extend(span);
                        labeled_offsets.push(labeled_scores.len());
                    }
                }
                if labeled_offsets.len() == 1 {
                    labeled_offsets = vec![0, 0];
                }
                let teacher_vecs: Vec<Vec<f64>> = spec
                    .teachers
                    .iter()
                    .map(|t| {
                        let mut v = Vec::with_capacity(total);
                        for &g in batch {
                            v.extend_from_slice(&t[g]);
                        }
                        v
                    })
                    .collect();
                let teacher_refs: Vec<&[f64]> =
                    teacher_vecs.iter().map(|v| v.as_slice()).collect();
                let view = DistillationBatch {
                    labeled_scores: &labeled_scores,
                    labeled_targets: &labeled_targets,
                    labeled_offsets: &labeled_offsets,
                    all_scores: &scores,
                    all_offsets: &offsets,
                };
                let terms = multi_teacher_loss(&view, &teacher_refs, &dcfg)?;
                losses.push(terms.loss);
                data_losses.push(terms.data_loss);
                teacher_losses.push(terms.teacher_loss);
                let mut grad = terms.grad_all;
                for (slot, g) in labeled_rows.into_iter().zip(&terms.grad_labeled) {
                    grad[slot] += g;
                }
                grad_scores = grad;
            }

            let grads = backward(&model, &cache, &grad_scores)?;
            adam_step(&mut model, &grads, &mut opt)?;
        }

        let metric = selection_ndcg(&model, &sel_feats, &sel_labels, cfg.checkpoint_k)?;
        let improved = metric > best_metric;
        if improved {
            best_metric = metric;
            best_epoch = epoch;
            best_params = model.flatten_params();
        }
        epoch_rows.push(EpochRow {
            epoch,
            lr: opt.current_lr(),
            mean_batch_loss: mean(&losses),
            mean_data_loss: mean(&data_losses),
            mean_teacher_loss: mean(&teacher_losses),
            selection_ndcg: metric,
            best_so_far: improved,
        });
    }

    model.set_params_from_flat(&best_params)?;
    Ok(TrainOutcome {
        model,
        input_cols: spec.input_cols.to_vec(),
        strategy: spec.strategy,
        best_epoch,
        best_selection_ndcg: best_metric,
        epoch_rows,
    })
}
