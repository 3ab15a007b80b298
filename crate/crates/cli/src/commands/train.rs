use crate::cli::TrainArgs;
use crate::config::{self, EffectiveConfig, Overrides, PartialConfig};
use crate::io::{load_dataset, sha256_hex, write_csv, write_json};
use crate::report::{unix_now, LossScaleRow, MetricsRow, RunManifest};
use anyhow::{Context, Result};
use privdistill_core::losses::loss_scale_report;
use privdistill_core::model::save_checkpoint_json;
use privdistill_core::pipelines::{run_strategy, StrategyRun};
use std::process::ExitCode;

fn overrides_from(args: &TrainArgs) -> Overrides {
    Overrides {
        strategy: args.strategy.map(Into::into),
        loss_kind: args.loss.map(Into::into),
        alpha: args.alpha,
        epochs: args.epochs,
        batch_size: args.batch_size,
        base_lr: args.lr,
        seed: args.seed,
        data_loss_scope: args.data_loss_scope.map(Into::into),
        checkpoint_k: args.checkpoint_k,
        hidden_dim: args.hidden_dim,
        depth: args.depth,
        weight_decay: args.weight_decay,
        validation_fraction: args.validation_fraction,
        aux_col: args.aux_col,
        finetune_epochs: args.finetune_epochs,
        checkpoint_on: args.checkpoint_on.map(Into::into),
    }
}

fn metrics_rows(run: &StrategyRun) -> Vec<MetricsRow> {
    let mut rows: Vec<MetricsRow> = run
        .outcome
        .epoch_rows
        .iter()
        .map(MetricsRow::epoch)
        .collect();
    for s in &run.selection_eval {
        rows.push(MetricsRow::best("selection", s.k, s.mean_ndcg, s.std_ndcg));
    }
    if let Some(test_eval) = &run.test_eval {
        for s in test_eval {
            rows.push(MetricsRow::best("test", s.k, s.mean_ndcg, s.std_ndcg));
        }
    }
    rows
}

fn loss_scale_rows(run: &StrategyRun, alpha: f64) -> Result<Vec<LossScaleRow>> {
    run.outcome
        .epoch_rows
        .iter()
        .map(|row| {
            let report = loss_scale_report(row.mean_data_loss, row.mean_teacher_loss, alpha)?;
            Ok(LossScaleRow::new(row.epoch, &report))
        })
        .collect()
}

pub fn run(args: &TrainArgs) -> Result<ExitCode> {
    let started_at = unix_now();

    // Config problems must surface before any training happens.
    let file = match &args.config {
        Some(path) => config::load_partial(path)?,
        None => PartialConfig::default(),
    };
    let effective: EffectiveConfig = config::resolve(&file, &overrides_from(args), None)?;

    let train_set = load_dataset(&args.dataset)?;
    let test_set = match &args.test {
        Some(path) => Some(load_dataset(path)?),
        None => None,
    };

    let run = run_strategy(
        &train_set,
        test_set.as_ref(),
        &effective.train,
        effective.checkpoint_on,
    )?;

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let checkpoint_path = args.out.join("checkpoint.json");
    let metrics_path = args.out.join("metrics.csv");
    let loss_scale_path = args.out.join("loss_scale.csv");
    let manifest_path = args.out.join("manifest.json");

    save_checkpoint_json(&checkpoint_path, &run.outcome.model, &run.outcome.input_cols)?;
    write_csv(&metrics_path, &metrics_rows(&run))?;
    write_csv(&loss_scale_path, &loss_scale_rows(&run, effective.train.alpha)?)?;

    let run_id = args
        .run_id
        .clone()
        .unwrap_or_else(|| format!("{}-s{}", effective.train.strategy, effective.train.seed));
    let manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        command: "train".to_string(),
        run_id: run_id.clone(),
        seed: effective.train.seed,
        strategy: Some(effective.train.strategy.to_string()),
        dataset_path: Some(args.dataset.display().to_string()),
        dataset_sha256: Some(sha256_hex(&args.dataset)?),
        test_path: args.test.as_ref().map(|p| p.display().to_string()),
        test_sha256: args.test.as_ref().map(|p| sha256_hex(p)).transpose()?,
        config: serde_json::to_value(&effective)?,
        started_at,
        finished_at: unix_now(),
        outputs: vec![
            checkpoint_path.display().to_string(),
            metrics_path.display().to_string(),
            loss_scale_path.display().to_string(),
        ],
    };
    write_json(&manifest_path, &manifest)?;

    println!(
        "train {run_id}: best epoch {} selection NDCG@{} {:.4}",
        run.outcome.best_epoch, effective.train.checkpoint_k, run.outcome.best_selection_ndcg
    );
    if let Some(test_eval) = &run.test_eval {
        for s in test_eval {
            println!("test NDCG@{}: {:.4} (std {:.4})", s.k, s.mean_ndcg, s.std_ndcg);
        }
    }
    println!("outputs in {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}
