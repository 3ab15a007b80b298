//! Plain-text ranking file format.
//!
//! One document per line: `<relevance> qid:<id> <idx>:<value> ...` with
//! 1-based, strictly increasing feature indices. Absent indices read as 0.
//! Files ending in `.gz` are transparently (de)compressed. Trailing `#`
//! comments are ignored.

use super::{QueryGroup, RankingDataset};
use crate::error::{Error, Result};
use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use nalgebra::DMatrix;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

struct RawDoc {
    relevance: u8,
    // (0-based column, value), ascending
    features: Vec<(usize, f64)>,
}

fn parse_line(line: &str, line_no: usize) -> Result<Option<(String, RawDoc)>> {
    let content = match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    };
    let mut tokens = content.split_whitespace();
    let Some(label_tok) = tokens.next() else {
        return Ok(None); // blank or comment-only line
    };
    let relevance: i64 = label_tok
        .parse()
        .map_err(|_| Error::parse(line_no, format!("relevance label `{label_tok}` is not an integer")))?;
    if !(0..=4).contains(&relevance) {
        return Err(Error::parse(
            line_no,
            format!("relevance label {relevance} outside 0..4"),
        ));
    }
    let qid_tok = tokens
        .next()
        .ok_or_else(|| Error::parse(line_no, "missing qid token"))?;
    let qid = qid_tok
        .strip_prefix("qid:")
        .ok_or_else(|| Error::parse(line_no, format!("expected qid:<id>, got `{qid_tok}`")))?;
    if qid.is_empty() {
        return Err(Error::parse(line_no, "empty qid"));
    }

    let mut features = Vec::new();
    let mut last_idx = 0usize;
    for tok in tokens {
        let (idx_str, val_str) = tok
            .split_once(':')
            .ok_or_else(|| Error::parse(line_no, format!("expected <idx>:<value>, got `{tok}`")))?;
        let idx: usize = idx_str
            .parse()
            .map_err(|_| Error::parse(line_no, format!("feature index `{idx_str}` is not an integer")))?;
        if idx == 0 {
            return Err(Error::parse(line_no, "feature indices are 1-based"));
        }
        if idx <= last_idx {
            return Err(Error::parse(
                line_no,
                format!("feature index {idx} not increasing after {last_idx}"),
            ));
        }
        let value: f64 = val_str
            .parse()
            .map_err(|_| Error::parse(line_no, format!("feature value `{val_str}` is not a number")))?;
        features.push((idx - 1, value));
        last_idx = idx;
    }
    Ok(Some((
        qid.to_string(),
        RawDoc {
            relevance: relevance as u8,
            features,
        },
    )))
}

fn open_reader(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path)?;
    if path.extension().is_some_and(|e| e == "gz") {
        Ok(Box::new(BufReader::new(GzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

/// Reads a ranking file into a dataset. Groups appear in qid
/// first-appearance order; the feature count is the largest index seen.
pub fn parse_ranking_file(path: impl AsRef<Path>) -> Result<RankingDataset> {
    let path = path.as_ref();
    let reader = open_reader(path)?;

    let mut group_order: Vec<String> = Vec::new();
    let mut group_docs: HashMap<String, Vec<RawDoc>> = HashMap::new();
    let mut num_features = 0usize;

    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if let Some((qid, doc)) = parse_line(&line, i + 1)? {
            if let Some(&(idx, _)) = doc.features.last() {
                num_features = num_features.max(idx + 1);
            }
            group_docs
                .entry(qid.clone())
                .or_insert_with(|| {
                    group_order.push(qid.clone());
                    Vec::new()
                })
                .push(doc);
        }
    }
    if group_order.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "{} contains no document lines",
            path.display()
        )));
    }

    let groups = group_order
        .into_iter()
        .map(|qid| {
            let docs = group_docs.remove(&qid).expect("qid recorded on insert");
            let mut features = DMatrix::zeros(docs.len(), num_features);
            let mut relevance = Vec::with_capacity(docs.len());
            for (row, doc) in docs.into_iter().enumerate() {
                relevance.push(doc.relevance);
                for (col, value) in doc.features {
                    features[(row, col)] = value;
                }
            }
            QueryGroup {
                query_id: qid,
                features,
                relevance,
                binary_labels: None,
            }
        })
        .collect();
    Ok(RankingDataset::new(groups, num_features))
}

/// Writes a dataset back to the text format, densely (every column printed).
/// Binary labels and the column split are not part of this format.
pub fn write_ranking_file(dataset: &RankingDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path)?;
    let mut writer: Box<dyn Write> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(BufWriter::new(GzEncoder::new(file, Default::default())))
    } else {
        Box::new(BufWriter::new(file))
    };
    for group in &dataset.groups {
        for row in 0..group.num_docs() {
            write!(writer, "{} qid:{}", group.relevance[row], group.query_id)?;
            for col in 0..dataset.num_features {
                write!(writer, " {}:{}", col + 1, group.features[(row, col)])?;
            }
            writeln!(writer)?;
        }
    }
    writer.flush()?;
    Ok(())
}

// Used by round-trip checks and the gzip sniffing test.
#[allow(dead_code)]
fn read_to_string_possibly_gz(path: &Path) -> Result<String> {
    let mut s = String::new();
    open_reader(path)?.read_to_string(&mut s)?;
    Ok(s)
}
