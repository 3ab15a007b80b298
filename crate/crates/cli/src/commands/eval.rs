use crate::cli::EvalArgs;
use crate::io::{load_dataset, write_csv};
use anyhow::{Context, Result};
use privdistill_core::metrics::{evaluate_dataset, EvalRow, DEFAULT_KS};
use privdistill_core::model::load_checkpoint_json;
use privdistill_core::pipelines::score_dataset;
use std::process::ExitCode;

/// run_id/strategy/seed come from flags first, then the run manifest, then
/// placeholders, so a checkpoint stays scoreable without its training
/// provenance.
fn identity(args: &EvalArgs) -> (String, String, u64) {
    let manifest_path = args
        .manifest
        .clone()
        .or_else(|| Some(args.checkpoint.parent()?.join("manifest.json")));
    let manifest: Option<serde_json::Value> = manifest_path
        .filter(|p| p.is_file())
        .and_then(|p| std::fs::read_to_string(p).ok())
        .and_then(|text| serde_json::from_str(&text).ok());
    let from_manifest = |key: &str| -> Option<String> {
        Some(manifest.as_ref()?.get(key)?.as_str()?.to_string())
    };

    let run_id = args
        .run_id
        .clone()
        .or_else(|| from_manifest("run_id"))
        .unwrap_or_else(|| "eval".to_string());
    let strategy = args
        .strategy
        .clone()
        .or_else(|| from_manifest("strategy"))
        .unwrap_or_else(|| "unknown".to_string());
    let seed = args
        .seed
        .or_else(|| manifest.as_ref()?.get("seed")?.as_u64())
        .unwrap_or(0);
    (run_id, strategy, seed)
}

pub fn run(args: &EvalArgs) -> Result<ExitCode> {
    let record = load_checkpoint_json(&args.checkpoint)?;
    let model = record.to_model()?;
    let dataset = load_dataset(&args.dataset)?;
    let scores = score_dataset(&model, &dataset, &record.input_cols)?;
    let summaries = evaluate_dataset(&scores, &dataset, &DEFAULT_KS)?;

    let (run_id, strategy, seed) = identity(args);
    let rows: Vec<EvalRow> = summaries
        .iter()
        .map(|s| EvalRow {
            run_id: run_id.clone(),
            strategy: strategy.clone(),
            k: s.k,
            mean_ndcg: s.mean_ndcg,
            std_ndcg: s.std_ndcg,
            seed,
        })
        .collect();

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let csv_path = args.out.join("eval.csv");
    write_csv(&csv_path, &rows)?;

    for row in &rows {
        println!(
            "{} [{}] NDCG@{}: {:.4} (std {:.4})",
            row.run_id, row.strategy, row.k, row.mean_ndcg, row.std_ndcg
        );
    }
    println!("wrote {}", csv_path.display());
    Ok(ExitCode::SUCCESS)
}
