use crate::cli::{FixtureArgs, FixtureKind};
use crate::io::{parse_f64_list, write_json};
use anyhow::{Context, Result};
use privdistill_core::dataset::{
    make_signal_fixture, make_synthetic_fixture, FixtureSpec, SignalFixtureSpec,
};
use std::process::ExitCode;

pub fn run(args: &FixtureArgs) -> Result<ExitCode> {
    let dataset = match args.kind {
        FixtureKind::Basic => make_synthetic_fixture(&FixtureSpec {
            num_groups: args.groups,
            docs_per_group: args.docs,
            num_features: args.features,
            seed: args.seed,
        })?,
        FixtureKind::Signal => {
            let signals = parse_f64_list(&args.signals).context("--signals")?;
            make_signal_fixture(&SignalFixtureSpec::new(
                args.groups,
                args.docs,
                signals,
                args.seed,
            ))?
        }
    };

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let dataset_path = args.out.join("dataset.json");
    let stats_path = args.out.join("stats.json");
    write_json(&dataset_path, &dataset)?;
    write_json(&stats_path, &dataset.stats())?;

    println!(
        "fixture: {} groups x {} docs, {} features -> {}",
        dataset.groups.len(),
        args.docs,
        dataset.num_features,
        dataset_path.display()
    );
    Ok(ExitCode::SUCCESS)
}
