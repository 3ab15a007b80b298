//! Layered training configuration.
//!
//! Precedence is CLI flag over config-file value over built-in default. The
//! resolved [`EffectiveConfig`] is dumped into the run manifest; feeding that
//! snapshot back as a config file reproduces the run.

use anyhow::{bail, Context, Result};
use privdistill_core::losses::LossKind;
use privdistill_core::model::DecayMode;
use privdistill_core::pipelines::{CheckpointOn, DataLossScope, Strategy, TrainConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const DEFAULT_SEED: u64 = 17;

/// Config-file shape: every field optional, unknown keys rejected so typos
/// surface instead of falling back to defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PartialConfig {
    pub strategy: Option<Strategy>,
    pub loss_kind: Option<LossKind>,
    pub alpha: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub base_lr: Option<f64>,
    pub seed: Option<u64>,
    pub data_loss_scope: Option<DataLossScope>,
    pub checkpoint_k: Option<usize>,
    pub hidden_dim: Option<usize>,
    pub depth: Option<usize>,
    pub weight_decay: Option<f64>,
    pub decay_mode: Option<DecayMode>,
    pub validation_fraction: Option<f64>,
    pub aux_col: Option<usize>,
    pub finetune_epochs: Option<usize>,
    pub checkpoint_on: Option<CheckpointOn>,
}

/// CLI-side overrides, already converted from clap enums to core types.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub strategy: Option<Strategy>,
    pub loss_kind: Option<LossKind>,
    pub alpha: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub base_lr: Option<f64>,
    pub seed: Option<u64>,
    pub data_loss_scope: Option<DataLossScope>,
    pub checkpoint_k: Option<usize>,
    pub hidden_dim: Option<usize>,
    pub depth: Option<usize>,
    pub weight_decay: Option<f64>,
    pub validation_fraction: Option<f64>,
    pub aux_col: Option<usize>,
    pub finetune_epochs: Option<usize>,
    pub checkpoint_on: Option<CheckpointOn>,
}

/// The fully resolved configuration a run executes under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveConfig {
    #[serde(flatten)]
    pub train: TrainConfig,
    pub checkpoint_on: CheckpointOn,
}

pub fn load_partial(path: &Path) -> Result<PartialConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("invalid config file {}", path.display()))
}

/// Resolves flags over file values over defaults. `fallback_strategy` lets
/// sweep runs omit one (the axis dictates the strategies trained); train
/// passes `None` and so requires a strategy.
pub fn resolve(
    file: &PartialConfig,
    cli: &Overrides,
    fallback_strategy: Option<Strategy>,
) -> Result<EffectiveConfig> {
    let strategy = match cli.strategy.or(file.strategy).or(fallback_strategy) {
        Some(s) => s,
        None => bail!("a strategy is required: pass --strategy or set it in the config file"),
    };
    let loss_kind = cli
        .loss_kind
        .or(file.loss_kind)
        .unwrap_or(LossKind::RankBce);
    let seed = cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED);

    let mut train = TrainConfig::defaults_for(strategy, loss_kind, seed);
    overlay(&mut train, file);
    train.strategy = strategy;
    train.loss_kind = loss_kind;
    train.seed = seed;

    if let Some(v) = cli.alpha {
        train.alpha = v;
    }
    if let Some(v) = cli.epochs {
        train.epochs = v;
    }
    if let Some(v) = cli.batch_size {
        train.batch_size = v;
    }
    if let Some(v) = cli.base_lr {
        train.base_lr = v;
    }
    if let Some(v) = cli.data_loss_scope {
        train.data_loss_scope = v;
    }
    if let Some(v) = cli.checkpoint_k {
        train.checkpoint_k = v;
    }
    if let Some(v) = cli.hidden_dim {
        train.hidden_dim = v;
    }
    if let Some(v) = cli.depth {
        train.depth = v;
    }
    if let Some(v) = cli.weight_decay {
        train.weight_decay = v;
    }
    if let Some(v) = cli.validation_fraction {
        train.validation_fraction = v;
    }
    if let Some(v) = cli.aux_col {
        train.aux_col = Some(v);
    }
    if let Some(v) = cli.finetune_epochs {
        train.finetune_epochs = v;
    }

    let checkpoint_on = cli
        .checkpoint_on
        .or(file.checkpoint_on)
        .unwrap_or(CheckpointOn::Valid);

    train.validate()?;
    Ok(EffectiveConfig {
        train,
        checkpoint_on,
    })
}

fn overlay(train: &mut TrainConfig, file: &PartialConfig) {
    if let Some(v) = file.alpha {
        train.alpha = v;
    }
    if let Some(v) = file.epochs {
        train.epochs = v;
    }
    if let Some(v) = file.batch_size {
        train.batch_size = v;
    }
    if let Some(v) = file.base_lr {
        train.base_lr = v;
    }
    if let Some(v) = file.data_loss_scope {
        train.data_loss_scope = v;
    }
    if let Some(v) = file.checkpoint_k {
        train.checkpoint_k = v;
    }
    if let Some(v) = file.hidden_dim {
        train.hidden_dim = v;
    }
    if let Some(v) = file.depth {
        train.depth = v;
    }
    if let Some(v) = file.weight_decay {
        train.weight_decay = v;
    }
    if let Some(v) = file.decay_mode {
        train.decay_mode = v;
    }
    if let Some(v) = file.validation_fraction {
        train.validation_fraction = v;
    }
    if let Some(v) = file.aux_col {
        train.aux_col = Some(v);
    }
    if let Some(v) = file.finetune_epochs {
        train.finetune_epochs = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file = PartialConfig {
            strategy: Some(Strategy::Baseline),
            epochs: Some(40),
            alpha: Some(0.9),
            ..Default::default()
        };
        let cli = Overrides {
            strategy: Some(Strategy::Pfd),
            alpha: Some(0.25),
            ..Default::default()
        };
        let eff = resolve(&file, &cli, None).unwrap();
        assert_eq!(eff.train.strategy, Strategy::Pfd);
        assert_eq!(eff.train.alpha, 0.25);
        assert_eq!(eff.train.epochs, 40);
        assert_eq!(eff.train.batch_size, 500);
        assert_eq!(eff.checkpoint_on, CheckpointOn::Valid);
    }

    #[test]
    fn missing_strategy_is_an_error() {
        let err = resolve(&PartialConfig::default(), &Overrides::default(), None)
            .unwrap_err()
            .to_string();
        assert!(err.contains("strategy"), "{err}");
    }

    #[test]
    fn defaults_track_the_loss_kind() {
        let cli = Overrides {
            strategy: Some(Strategy::Baseline),
            loss_kind: Some(LossKind::RankNet),
            ..Default::default()
        };
        let eff = resolve(&PartialConfig::default(), &cli, None).unwrap();
        assert_eq!(eff.train.batch_size, 300);
        assert_eq!(eff.train.base_lr, 3e-4);
    }

    #[test]
    fn snapshot_fed_back_as_config_resolves_identically() {
        let cli = Overrides {
            strategy: Some(Strategy::Pfd),
            alpha: Some(0.7),
            epochs: Some(33),
            checkpoint_on: Some(CheckpointOn::Test),
            ..Default::default()
        };
        let eff = resolve(&PartialConfig::default(), &cli, None).unwrap();

        let snapshot = serde_json::to_string(&eff).unwrap();
        let reloaded: PartialConfig = serde_json::from_str(&snapshot).unwrap();
        let again = resolve(&reloaded, &Overrides::default(), None).unwrap();
        assert_eq!(again, eff);
    }

    #[test]
    fn invalid_resolved_config_is_rejected() {
        let cli = Overrides {
            strategy: Some(Strategy::Pfd),
            alpha: Some(1.5),
            ..Default::default()
        };
        assert!(resolve(&PartialConfig::default(), &cli, None).is_err());
    }
}
