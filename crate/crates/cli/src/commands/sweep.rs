use crate::cli::SweepArgs;
use crate::config::{self, Overrides, PartialConfig};
use crate::io::{load_dataset, parse_f64_list, sha256_hex, write_csv, write_json};
use crate::report::{unix_now, RunManifest, SweepWideRow};
use anyhow::{anyhow, bail, Context, Result};
use privdistill_core::dataset::LabelGenConfig;
use privdistill_core::metrics::DEFAULT_KS;
use privdistill_core::pipelines::{run_ablation_sweep, Strategy, SweepRow};
use privdistill_core::rng::mix;
use rayon::prelude::*;
use std::process::ExitCode;

fn overrides_from(args: &SweepArgs) -> Overrides {
    Overrides {
        strategy: None,
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
        aux_col: None,
        finetune_epochs: None,
        checkpoint_on: None,
    }
}

/// Pivots one repeat's long rows (value x strategy x k) into one wide row
/// per axis value at the reporting cutoff.
fn pivot(rows: &[SweepRow], repeat: usize, report_k: usize) -> Result<Vec<SweepWideRow>> {
    let mut wide: Vec<SweepWideRow> = Vec::new();
    for row in rows.iter().filter(|r| r.k == report_k) {
        if wide.last().map(|w| w.value) != Some(row.value) {
            wide.push(SweepWideRow {
                axis: row.axis.to_string(),
                value: row.value,
                repeat,
                seed: row.seed,
                train_positive_fraction: row.train_positive_fraction,
                k: report_k,
                baseline_ndcg: None,
                baseline_std: None,
                self_distill_ndcg: None,
                self_distill_std: None,
                pfd_ndcg: None,
                pfd_std: None,
            });
        }
        let cell = wide.last_mut().expect("pushed above");
        match row.strategy.as_str() {
            "baseline" => {
                cell.baseline_ndcg = Some(row.mean_ndcg);
                cell.baseline_std = Some(row.std_ndcg);
            }
            "self-distill-student" => {
                cell.self_distill_ndcg = Some(row.mean_ndcg);
                cell.self_distill_std = Some(row.std_ndcg);
            }
            "pfd-student" => {
                cell.pfd_ndcg = Some(row.mean_ndcg);
                cell.pfd_std = Some(row.std_ndcg);
            }
            other => bail!("unexpected sweep strategy {other:?}"),
        }
    }
    Ok(wide)
}

pub fn run(args: &SweepArgs) -> Result<ExitCode> {
    let started_at = unix_now();

    let file = match &args.config {
        Some(path) => config::load_partial(path)?,
        None => PartialConfig::default(),
    };
    // The axis dictates which strategies are trained, so a strategy is not
    // required; Pfd stands in for config validation.
    let effective = config::resolve(&file, &overrides_from(args), Some(Strategy::Pfd))?;
    let values = parse_f64_list(&args.values).context("--values")?;
    if args.repeats == 0 {
        bail!("--repeats must be at least 1");
    }

    let train_set = load_dataset(&args.dataset)?;
    let test_set = load_dataset(&args.test)?;
    let axis = args.axis.into();
    let label_cfg = LabelGenConfig {
        temperature: args.temperature,
        tau_target: args.tau_target,
        seed: args.label_seed,
    };
    let report_k = if DEFAULT_KS.contains(&effective.train.checkpoint_k) {
        effective.train.checkpoint_k
    } else {
        DEFAULT_KS[0]
    };

    // Repeat 0 runs the base seeds; later repeats re-mix both streams.
    let per_repeat: Vec<Vec<SweepWideRow>> = (0..args.repeats)
        .into_par_iter()
        .map(|rep| {
            let mut cfg = effective.train.clone();
            let mut labels = label_cfg;
            if rep > 0 {
                cfg.seed = mix(effective.train.seed, rep as u64, 1);
                labels.seed = mix(label_cfg.seed, rep as u64, 2);
            }
            let rows = run_ablation_sweep(&train_set, &test_set, &labels, axis, &values, &cfg)
                .map_err(|e| anyhow!("repeat {rep}: {e}"))?;
            pivot(&rows, rep, report_k)
        })
        .collect::<Result<_>>()?;
    let wide: Vec<SweepWideRow> = per_repeat.into_iter().flatten().collect();

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let csv_path = args.out.join("sweep.csv");
    write_csv(&csv_path, &wide)?;

    let run_id = args
        .run_id
        .clone()
        .unwrap_or_else(|| format!("sweep-{axis}-s{}", effective.train.seed));
    let manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        command: "sweep".to_string(),
        run_id,
        seed: effective.train.seed,
        strategy: None,
        dataset_path: Some(args.dataset.display().to_string()),
        dataset_sha256: Some(sha256_hex(&args.dataset)?),
        test_path: Some(args.test.display().to_string()),
        test_sha256: Some(sha256_hex(&args.test)?),
        config: serde_json::json!({
            "train": effective,
            "axis": axis,
            "values": values,
            "repeats": args.repeats,
            "temperature": args.temperature,
            "tau_target": args.tau_target,
            "label_seed": args.label_seed,
        }),
        started_at,
        finished_at: unix_now(),
        outputs: vec![csv_path.display().to_string()],
    };
    write_json(&args.out.join("manifest.json"), &manifest)?;

    println!(
        "sweep {axis}: {} values x {} repeats -> {} rows in {}",
        values.len(),
        args.repeats,
        wide.len(),
        csv_path.display()
    );
    Ok(ExitCode::SUCCESS)
}
