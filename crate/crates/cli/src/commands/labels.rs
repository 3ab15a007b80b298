use crate::cli::GenLabelsArgs;
use crate::io::{load_dataset, write_json};
use anyhow::{Context, Result};
use privdistill_core::dataset::{generate_binary_labels, LabelGenConfig};
use std::process::ExitCode;

pub fn run(args: &GenLabelsArgs) -> Result<ExitCode> {
    let dataset = load_dataset(&args.input)?;
    let cfg = LabelGenConfig {
        temperature: args.temperature,
        tau_target: args.tau_target,
        seed: args.seed,
    };
    let labeled = generate_binary_labels(&dataset, &cfg)?;
    let stats = labeled.stats();

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let dataset_path = args.out.join("dataset.json");
    write_json(&dataset_path, &labeled)?;
    write_json(&args.out.join("stats.json"), &stats)?;

    println!(
        "gen-labels: t={} tau_target={} seed={} positive groups {:.4} -> {}",
        args.temperature,
        args.tau_target,
        args.seed,
        stats.positive_group_fraction.unwrap_or(f64::NAN),
        dataset_path.display()
    );
    Ok(ExitCode::SUCCESS)
}
