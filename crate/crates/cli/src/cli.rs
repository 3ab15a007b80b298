//! Argument surface of the `privdistill` binary.

use clap::{Args, Parser, Subcommand, ValueEnum};
use privdistill_core::losses::LossKind;
use privdistill_core::pipelines::{CheckpointOn, DataLossScope, Strategy, SweepAxis};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "privdistill",
    version,
    about = "Train and analyze learning-to-rank models that distill privileged features"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a ranking file, drop sparse and all-negative query groups,
    /// apply signed log1p to features, and write the canonical dataset
    Ingest(IngestArgs),
    /// Draw binary labels from graded relevance via Gumbel thresholding
    GenLabels(GenLabelsArgs),
    /// Mark the columns most correlated with the labels as privileged
    SplitFeatures(SplitFeaturesArgs),
    /// Train one strategy end to end and write checkpoint plus reports
    Train(TrainArgs),
    /// Ablation sweep over alpha, tau_target, or tau_privileged
    Sweep(SweepArgs),
    /// Monte Carlo checks of the linear-model risk formulas
    Theory(TheoryArgs),
    /// Score a checkpoint on a dataset and write an evaluation report
    Eval(EvalArgs),
    /// Generate a synthetic ranking dataset
    Fixture(FixtureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Baseline,
    SelfDistill,
    Gend,
    Pfd,
    MultiTeacherPfd,
    PretrainFinetune,
}

impl From<StrategyArg> for Strategy {
    fn from(arg: StrategyArg) -> Self {
        match arg {
            StrategyArg::Baseline => Strategy::Baseline,
            StrategyArg::SelfDistill => Strategy::SelfDistill,
            StrategyArg::Gend => Strategy::GenD,
            StrategyArg::Pfd => Strategy::Pfd,
            StrategyArg::MultiTeacherPfd => Strategy::MultiTeacherPfd,
            StrategyArg::PretrainFinetune => Strategy::PretrainFinetune,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Rankbce,
    Ranknet,
}

impl From<LossArg> for LossKind {
    fn from(arg: LossArg) -> Self {
        match arg {
            LossArg::Rankbce => LossKind::RankBce,
            LossArg::Ranknet => LossKind::RankNet,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    /// Only query groups with a positive label feed the data loss
    Positive,
    /// Every query group feeds the data loss
    All,
}

impl From<ScopeArg> for DataLossScope {
    fn from(arg: ScopeArg) -> Self {
        match arg {
            ScopeArg::Positive => DataLossScope::PositiveGroupsOnly,
            ScopeArg::All => DataLossScope::AllGroups,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckpointArg {
    /// Select the best epoch on a validation split carved from training
    Valid,
    /// Select the best epoch on the supplied test split
    Test,
}

impl From<CheckpointArg> for CheckpointOn {
    fn from(arg: CheckpointArg) -> Self {
        match arg {
            CheckpointArg::Valid => CheckpointOn::Valid,
            CheckpointArg::Test => CheckpointOn::Test,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    Alpha,
    #[value(alias = "tau_target")]
    TauTarget,
    #[value(alias = "tau_privileged")]
    TauPrivileged,
}

impl From<AxisArg> for SweepAxis {
    fn from(arg: AxisArg) -> Self {
        match arg {
            AxisArg::Alpha => SweepAxis::Alpha,
            AxisArg::TauTarget => SweepAxis::TauTarget,
            AxisArg::TauPrivileged => SweepAxis::TauPrivileged,
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Ranking file: `<grade> qid:<id> <i>:<v> ...` text, its .gz form, or
    /// a canonical dataset JSON
    pub input: PathBuf,
    /// Query groups with fewer documents are dropped
    #[arg(long, default_value_t = 10)]
    pub min_docs: usize,
    /// Output directory for dataset.json and stats.json
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenLabelsArgs {
    /// Canonical dataset JSON (or raw ranking file)
    pub input: PathBuf,
    /// Sharpness of the relevance-to-probability map
    #[arg(long, default_value_t = 4.0)]
    pub temperature: f64,
    /// Relevance at which a document is positive with probability one half
    #[arg(long, default_value_t = 4.8)]
    pub tau_target: f64,
    #[arg(long, default_value_t = 17)]
    pub seed: u64,
    /// Output directory for dataset.json and stats.json
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitFeaturesArgs {
    /// Canonical dataset JSON with binary labels
    pub input: PathBuf,
    /// How many columns to mark privileged, chosen by |label correlation|
    #[arg(long)]
    pub num_privileged: usize,
    /// Output directory for dataset.json and stats.json
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled canonical dataset JSON used for fitting
    pub dataset: PathBuf,
    /// Held-out dataset scored with the best checkpoint
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// JSON config file; CLI flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub strategy: Option<StrategyArg>,
    #[arg(long)]
    pub loss: Option<LossArg>,
    /// Weight of the data loss; 1 - alpha weights the teacher loss
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub data_loss_scope: Option<ScopeArg>,
    /// NDCG cutoff used for checkpoint selection
    #[arg(long)]
    pub checkpoint_k: Option<usize>,
    #[arg(long)]
    pub hidden_dim: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    /// Share of training groups carved off for checkpoint selection
    #[arg(long)]
    pub validation_fraction: Option<f64>,
    /// Feature column holding the auxiliary binary target
    /// (pretrain-finetune only)
    #[arg(long)]
    pub aux_col: Option<usize>,
    #[arg(long)]
    pub finetune_epochs: Option<usize>,
    #[arg(long)]
    pub checkpoint_on: Option<CheckpointArg>,
    /// Identifier stamped into the manifest and reports
    #[arg(long)]
    pub run_id: Option<String>,
    /// Output directory for checkpoint.json, metrics.csv, loss_scale.csv,
    /// manifest.json
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Canonical dataset JSON with graded relevance (labels are drawn here)
    pub dataset: PathBuf,
    /// Held-out dataset, labeled from an independent noise stream
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub axis: AxisArg,
    /// Comma-separated axis values, e.g. "0.3,0.5,0.7"
    #[arg(long)]
    pub values: String,
    /// Independent repetitions; repeat r re-mixes the training and label
    /// seeds
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    /// Label-generation temperature
    #[arg(long, default_value_t = 4.0)]
    pub temperature: f64,
    /// Label-generation threshold (the tau_target axis overrides it per
    /// value)
    #[arg(long, default_value_t = 4.8)]
    pub tau_target: f64,
    /// Seed of the label noise stream
    #[arg(long, default_value_t = 17)]
    pub label_seed: u64,
    /// JSON config file; CLI flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub loss: Option<LossArg>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub data_loss_scope: Option<ScopeArg>,
    #[arg(long)]
    pub checkpoint_k: Option<usize>,
    #[arg(long)]
    pub hidden_dim: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    pub validation_fraction: Option<f64>,
    /// Identifier stamped into the manifest
    #[arg(long)]
    pub run_id: Option<String>,
    /// Output directory for sweep.csv and manifest.json
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[command(subcommand)]
    pub command: TheoryCommand,
}

#[derive(Debug, Subcommand)]
pub enum TheoryCommand {
    /// Check the Monte Carlo risks against the closed forms and report
    /// pass/fail with margins
    Verify(TheoryVerifyArgs),
    /// Tabulate two-stage risk across privileged widths
    Sweep(TheorySweepArgs),
}

#[derive(Debug, Args)]
pub struct TheoryVerifyArgs {
    #[arg(long, default_value_t = 20_000)]
    pub trials: usize,
    /// Regular-feature dimension
    #[arg(long, default_value_t = 10)]
    pub dx: usize,
    /// Privileged-pool dimension
    #[arg(long, default_value_t = 10)]
    pub du: usize,
    /// Privileged widths checked for the two-stage estimator
    #[arg(long, default_value = "0,3,5,8,10")]
    pub dz_list: String,
    /// Labeled sample count
    #[arg(long, default_value_t = 30)]
    pub n: usize,
    /// Extra unlabeled rows feeding the distillation pool
    #[arg(long, default_value_t = 200)]
    pub m: usize,
    /// Label noise standard deviation
    #[arg(long, default_value_t = 15.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 17)]
    pub seed: u64,
    /// Output directory for verify.csv and manifest.json
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TheorySweepArgs {
    /// Privileged widths: inclusive range "0..10" or comma list "0,2,4"
    #[arg(long, default_value = "0..10")]
    pub dz: String,
    #[arg(long, default_value_t = 20_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 10)]
    pub dx: usize,
    #[arg(long, default_value_t = 10)]
    pub du: usize,
    #[arg(long, default_value_t = 30)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub m: usize,
    #[arg(long, default_value_t = 15.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 17)]
    pub seed: u64,
    /// Output directory for dz_sweep.csv and manifest.json
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoint JSON written by `train`
    pub checkpoint: PathBuf,
    /// Dataset to score
    pub dataset: PathBuf,
    /// Manifest supplying run_id/strategy/seed defaults; defaults to the
    /// checkpoint's sibling manifest.json when present
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub run_id: Option<String>,
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for eval.csv
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureKind {
    /// Gaussian features independent of the relevance grades
    Basic,
    /// Features carry per-column signal proportional to relevance
    Signal,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    #[arg(long, value_enum, default_value_t = FixtureKind::Basic)]
    pub kind: FixtureKind,
    #[arg(long, default_value_t = 120)]
    pub groups: usize,
    #[arg(long, default_value_t = 20)]
    pub docs: usize,
    /// Feature count (basic kind)
    #[arg(long, default_value_t = 8)]
    pub features: usize,
    /// Comma-separated per-column signal strengths (signal kind)
    #[arg(long, default_value = "0.7,0.4,2.5")]
    pub signals: String,
    #[arg(long, default_value_t = 17)]
    pub seed: u64,
    /// Output directory for dataset.json and stats.json
    #[arg(long)]
    pub out: PathBuf,
}
