//! Adam with weight decay and the halving learning-rate schedule.

use super::{Layer, MlpModel, ModelGradients};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// How weight decay enters the update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayMode {
    /// Parameters shrink by `lr * lambda` before the Adam delta (AdamW).
    Decoupled,
    /// `lambda * theta` is added to the gradient before the moments (L2).
    L2InGradient,
}

/// `base * 0.5^floor(epoch/20)`: the learning rate halves every 20 epochs.
pub fn lr_at_epoch(base_lr: f64, epoch: usize) -> f64 {
    base_lr * 0.5f64.powi((epoch / 20) as i32)
}

#[derive(Debug, Clone)]
pub struct OptimizerState {
    first_moment: Vec<Layer>,
    second_moment: Vec<Layer>,
    pub step: u64,
    pub base_lr: f64,
    pub weight_decay: f64,
    pub decay_mode: DecayMode,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Multiplier applied every `lr_decay_period` epochs.
    pub lr_decay_factor: f64,
    pub lr_decay_period: usize,
    current_lr: f64,
}

impl OptimizerState {
    /// Fresh state with the defaults: beta 0.9/0.999, epsilon 1e-8, decoupled
    /// decay 0.005, halving every 20 epochs.
    pub fn new(model: &MlpModel, base_lr: f64) -> Self {
        let zeros = || -> Vec<Layer> {
            model
                .layers
                .iter()
                .map(|l| Layer {
                    weight: DMatrix::zeros(l.weight.nrows(), l.weight.ncols()),
                    bias: DVector::zeros(l.bias.len()),
                })
                .collect()
        };
        OptimizerState {
            first_moment: zeros(),
            second_moment: zeros(),
            step: 0,
            base_lr,
            weight_decay: 0.005,
            decay_mode: DecayMode::Decoupled,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            lr_decay_factor: 0.5,
            lr_decay_period: 20,
            current_lr: base_lr,
        }
    }

    /// Applies the schedule for the (0-based) epoch about to run.
    pub fn set_epoch(&mut self, epoch: usize) {
        self.current_lr =
            self.base_lr * self.lr_decay_factor.powi((epoch / self.lr_decay_period) as i32);
    }

    pub fn current_lr(&self) -> f64 {
        self.current_lr
    }
}

/// One Adam update over every layer. Weight decay (if any) touches the
/// parameters first, then the bias-corrected Adam delta is applied.
pub fn adam_step(
    model: &mut MlpModel,
    grads: &ModelGradients,
    state: &mut OptimizerState,
) -> Result<()> {
    if grads.layers.len() != model.layers.len() {
        return Err(Error::validation("gradient layer count mismatch"));
    }
    for (layer, grad) in model.layers.iter().zip(&grads.layers) {
        if layer.weight.shape() != grad.weight.shape() || layer.bias.len() != grad.bias.len() {
            return Err(Error::validation("gradient shape mismatch"));
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let lr = state.current_lr;
    let bias1 = 1.0 - state.beta1.powi(t);
    let bias2 = 1.0 - state.beta2.powi(t);

    for ((layer, grad), (m, v)) in model
        .layers
        .iter_mut()
        .zip(&grads.layers)
        .zip(state.first_moment.iter_mut().zip(&mut state.second_moment))
    {
        let update = |theta: &mut f64, g_in: f64, m: &mut f64, v: &mut f64| {
            if state.weight_decay > 0.0 && state.decay_mode == DecayMode::Decoupled {
                *theta -= lr * state.weight_decay * *theta;
            }
            let g = if state.decay_mode == DecayMode::L2InGradient {
                g_in + state.weight_decay * *theta
            } else {
                g_in
            };
            *m = state.beta1 * *m + (1.0 - state.beta1) * g;
            *v = state.beta2 * *v + (1.0 - state.beta2) * g * g;
            let m_hat = *m / bias1;
            let v_hat = *v / bias2;
            *theta -= lr * m_hat / (v_hat.sqrt() + state.epsilon);
        };
        for (i, theta) in layer.weight.iter_mut().enumerate() {
            update(theta, grad.weight[i], &mut m.weight[i], &mut v.weight[i]);
        }
        for (i, theta) in layer.bias.iter_mut().enumerate() {
            update(theta, grad.bias[i], &mut m.bias[i], &mut v.bias[i]);
        }
    }
    model.bump_version();
    Ok(())
}
