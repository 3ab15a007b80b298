use crate::cli::SplitFeaturesArgs;
use crate::io::{load_dataset, write_json};
use anyhow::{Context, Result};
use privdistill_core::dataset::split_features_by_correlation;
use std::process::ExitCode;

pub fn run(args: &SplitFeaturesArgs) -> Result<ExitCode> {
    let dataset = load_dataset(&args.input)?;
    let split = split_features_by_correlation(&dataset, args.num_privileged)?;
    let stats = split.stats();

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let dataset_path = args.out.join("dataset.json");
    write_json(&dataset_path, &split)?;
    write_json(&args.out.join("stats.json"), &stats)?;

    println!(
        "split-features: {} regular, {} privileged {:?} -> {}",
        stats.num_regular,
        stats.num_privileged,
        split.privileged_cols,
        dataset_path.display()
    );
    Ok(ExitCode::SUCCESS)
}
