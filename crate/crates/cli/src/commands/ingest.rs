use crate::cli::IngestArgs;
use crate::io::{load_dataset, write_json};
use anyhow::{Context, Result};
use privdistill_core::dataset::{filter_query_groups, log1p_transform};
use std::process::ExitCode;

/// Parse, filter, transform, then write. Everything is computed before the
/// first file is created, so a bad input leaves no partial output behind.
pub fn run(args: &IngestArgs) -> Result<ExitCode> {
    let raw = load_dataset(&args.input)?;
    let filtered = filter_query_groups(&raw, args.min_docs)?;
    let transformed = log1p_transform(&filtered)?;
    transformed.validate()?;
    let stats = transformed.stats();

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let dataset_path = args.out.join("dataset.json");
    let stats_path = args.out.join("stats.json");
    write_json(&dataset_path, &transformed)?;
    write_json(&stats_path, &stats)?;

    println!(
        "ingest: kept {} of {} query groups ({} docs) -> {}",
        stats.num_groups,
        raw.groups.len(),
        stats.total_docs,
        dataset_path.display()
    );
    Ok(ExitCode::SUCCESS)
}
