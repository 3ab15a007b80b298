//! Run manifests and report-row shapes.
//!
//! CSV bodies must be byte-identical across reruns with equal inputs, so
//! rows hold plain numbers (the csv crate prints the shortest decimal that
//! round-trips) and timestamps live only in the manifest.

use privdistill_core::losses::LossScaleReport;
use privdistill_core::pipelines::EpochRow;
use serde::Serialize;
use std::time::{SystemTime, UNIX_EPOCH};

/// Provenance of one command invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: String,
    pub run_id: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset_sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_sha256: Option<String>,
    /// Effective configuration snapshot; for `train` this feeds back via
    /// `--config` to reproduce the run.
    pub config: serde_json::Value,
    pub started_at: u64,
    pub finished_at: u64,
    pub outputs: Vec<String>,
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// One metrics.csv line. Epoch rows fill the training columns; best rows
/// fill the evaluation columns. The strategy is recorded in the manifest,
/// not here, so runs that must produce equal metrics under different
/// strategy names (the alpha = 1 identity) diff clean.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsRow {
    pub record: &'static str,
    pub epoch: Option<usize>,
    pub lr: Option<f64>,
    pub mean_batch_loss: Option<f64>,
    pub mean_data_loss: Option<f64>,
    pub mean_teacher_loss: Option<f64>,
    pub selection_ndcg: Option<f64>,
    pub best_so_far: Option<bool>,
    pub split: Option<&'static str>,
    pub k: Option<usize>,
    pub mean_ndcg: Option<f64>,
    pub std_ndcg: Option<f64>,
}

impl MetricsRow {
    pub fn epoch(row: &EpochRow) -> Self {
        MetricsRow {
            record: "epoch",
            epoch: Some(row.epoch),
            lr: Some(row.lr),
            mean_batch_loss: Some(row.mean_batch_loss),
            mean_data_loss: Some(row.mean_data_loss),
            mean_teacher_loss: Some(row.mean_teacher_loss),
            selection_ndcg: Some(row.selection_ndcg),
            best_so_far: Some(row.best_so_far),
            split: None,
            k: None,
            mean_ndcg: None,
            std_ndcg: None,
        }
    }

    pub fn best(split: &'static str, k: usize, mean_ndcg: f64, std_ndcg: f64) -> Self {
        MetricsRow {
            record: "best",
            epoch: None,
            lr: None,
            mean_batch_loss: None,
            mean_data_loss: None,
            mean_teacher_loss: None,
            selection_ndcg: None,
            best_so_far: None,
            split: Some(split),
            k: Some(k),
            mean_ndcg: Some(mean_ndcg),
            std_ndcg: Some(std_ndcg),
        }
    }
}

/// One loss_scale.csv line: the blended objective's balance at one epoch.
#[derive(Debug, Clone, Serialize)]
pub struct LossScaleRow {
    pub epoch: usize,
    pub data_loss: f64,
    pub teacher_loss: f64,
    pub alpha: f64,
    pub ratio: f64,
    pub data_share: f64,
    pub teacher_share: f64,
}

impl LossScaleRow {
    pub fn new(epoch: usize, report: &LossScaleReport) -> Self {
        LossScaleRow {
            epoch,
            data_loss: report.data_loss,
            teacher_loss: report.teacher_loss,
            alpha: report.alpha,
            ratio: report.ratio,
            data_share: report.data_share,
            teacher_share: report.teacher_share,
        }
    }
}

/// One verify.csv line: a Monte Carlo estimate against its exact target.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub check: String,
    pub d_z: Option<usize>,
    pub mc_value: f64,
    pub std_error: f64,
    pub expected: f64,
    /// |mc - expected| in standard-error units.
    pub margin_se: f64,
    /// Extra absolute tolerance granted beyond the SE band.
    pub abs_slack: f64,
    pub pass: bool,
}

/// One sweep.csv line: every strategy the axis trains, at one axis value in
/// one repeat, scored on the test split at the selection cutoff. Axes that
/// train fewer strategies leave the other columns empty.
#[derive(Debug, Clone, Serialize)]
pub struct SweepWideRow {
    pub axis: String,
    pub value: f64,
    pub repeat: usize,
    pub seed: u64,
    pub train_positive_fraction: f64,
    pub k: usize,
    pub baseline_ndcg: Option<f64>,
    pub baseline_std: Option<f64>,
    pub self_distill_ndcg: Option<f64>,
    pub self_distill_std: Option<f64>,
    pub pfd_ndcg: Option<f64>,
    pub pfd_std: Option<f64>,
}
