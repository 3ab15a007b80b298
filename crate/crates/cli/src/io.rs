//! File plumbing shared by the subcommands.

use anyhow::{bail, Context, Result};
use privdistill_core::dataset::{parse_ranking_file, RankingDataset};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Loads a dataset: `.json` is the canonical serialized form (the only one
/// carrying binary labels and the feature split), anything else goes through
/// the ranking-text parser (gzip handled transparently).
pub fn load_dataset(path: &Path) -> Result<RankingDataset> {
    let dataset = if path.extension().is_some_and(|e| e == "json") {
        let file = File::open(path)
            .with_context(|| format!("cannot open dataset {}", path.display()))?;
        let dataset: RankingDataset = serde_json::from_reader(BufReader::new(file))
            .with_context(|| format!("invalid dataset JSON {}", path.display()))?;
        dataset.validate()?;
        dataset
    } else {
        parse_ranking_file(path)
            .with_context(|| format!("cannot parse ranking file {}", path.display()))?
    };
    Ok(dataset)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, value)
        .with_context(|| format!("cannot serialize {}", path.display()))?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn sha256_hex(path: &Path) -> Result<String> {
    let file = File::open(path)
        .with_context(|| format!("cannot open {} for hashing", path.display()))?;
    let mut reader = BufReader::new(file);
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

pub fn parse_f64_list(spec: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .with_context(|| format!("cannot parse {s:?} as a number"))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        bail!("no values supplied");
    }
    Ok(values)
}

/// Accepts an inclusive range "a..b" or a comma list "a,b,c".
pub fn parse_usize_spec(spec: &str) -> Result<Vec<usize>> {
    let spec = spec.trim();
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo.trim().parse().context("range start must be an integer")?;
        let hi: usize = hi.trim().parse().context("range end must be an integer")?;
        if hi < lo {
            bail!("range end {hi} below start {lo}");
        }
        return Ok((lo..=hi).collect());
    }
    let values: Vec<usize> = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .with_context(|| format!("cannot parse {s:?} as an integer"))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        bail!("no values supplied");
    }
    Ok(values)
}
