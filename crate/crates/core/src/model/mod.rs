//! Pointwise scoring network: a fully connected MLP (ReLU hidden layers,
//! linear scalar output) with hand-written forward and backward passes.
//!
//! Scores are raw logits; losses apply the sigmoid where needed. The default
//! shape is depth 5 with hidden width 100.

mod checkpoint;
mod optimizer;

pub use checkpoint::{
    load_checkpoint_binary, load_checkpoint_json, save_checkpoint_binary, save_checkpoint_json,
    CheckpointRecord,
};
pub use optimizer::{adam_step, lr_at_epoch, DecayMode, OptimizerState};

use crate::error::{Error, Result};
use crate::rng::seeded;
use nalgebra::{DMatrix, DVector};
use rand::distributions::Uniform;
use rand::Rng;

pub const DEFAULT_HIDDEN_DIM: usize = 100;
pub const DEFAULT_DEPTH: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// (input_dim x output_dim); scores are computed as rows * weight.
    pub weight: DMatrix<f64>,
    pub bias: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layers: Vec<Layer>,
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub depth: usize,
    pub init_seed: u64,
    /// Bumped on every parameter update; forward caches carry the value they
    /// saw so backward can reject a cache from an older model.
    version: u64,
}

/// Activations recorded by [`forward`] for one batch.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    version: u64,
    input: DMatrix<f64>,
    /// Pre-activations z_k of every layer, in forward order.
    pre_activations: Vec<DMatrix<f64>>,
}

/// Parameter gradients, shaped like the model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGradients {
    pub layers: Vec<Layer>,
}

/// Glorot-uniform weights, zero biases. `depth` counts weight matrices, so
/// depth 5 means four hidden transforms plus the scalar output layer.
pub fn init_mlp(input_dim: usize, hidden_dim: usize, depth: usize, seed: u64) -> Result<MlpModel> {
    if input_dim == 0 || hidden_dim == 0 {
        return Err(Error::validation("model dimensions must be at least 1"));
    }
    if depth < 2 {
        return Err(Error::validation("depth must be at least 2"));
    }
    let mut rng = seeded(seed);
    let mut layers = Vec::with_capacity(depth);
    for k in 0..depth {
        let fan_in = if k == 0 { input_dim } else { hidden_dim };
        let fan_out = if k == depth - 1 { 1 } else { hidden_dim };
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit);
        let mut weight = DMatrix::zeros(fan_in, fan_out);
        for r in 0..fan_in {
            for c in 0..fan_out {
                weight[(r, c)] = rng.sample(dist);
            }
        }
        layers.push(Layer {
            weight,
            bias: DVector::zeros(fan_out),
        });
    }
    Ok(MlpModel {
        layers,
        input_dim,
        hidden_dim,
        depth,
        init_seed: seed,
        version: 0,
    })
}

impl MlpModel {
    pub fn version(&self) -> u64 {
        self.version
    }

    pub(crate) fn bump_version(&mut self) {
        self.version += 1;
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.len() + l.bias.len())
            .sum()
    }

    /// All parameters as one vector: per layer, row-major weights then bias.
    pub fn flatten_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for layer in &self.layers {
            for r in 0..layer.weight.nrows() {
                for c in 0..layer.weight.ncols() {
                    out.push(layer.weight[(r, c)]);
                }
            }
            out.extend(layer.bias.iter().copied());
        }
        out
    }

    /// Inverse of [`MlpModel::flatten_params`]. Bumps the version.
    pub fn set_params_from_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::validation(format!(
                "{} values for {} parameters",
                flat.len(),
                self.num_params()
            )));
        }
        let mut it = flat.iter();
        for layer in &mut self.layers {
            for r in 0..layer.weight.nrows() {
                for c in 0..layer.weight.ncols() {
                    layer.weight[(r, c)] = *it.next().expect("length checked");
                }
            }
            for b in layer.bias.iter_mut() {
                *b = *it.next().expect("length checked");
            }
        }
        self.bump_version();
        Ok(())
    }

    /// Scores without keeping a cache; for evaluation of a frozen model.
    pub fn score(&self, features: &DMatrix<f64>) -> Result<Vec<f64>> {
        forward(self, features).map(|(scores, _)| scores)
    }
}

/// Runs the batch through the network: one score per row, plus the
/// activation cache consumed by [`backward`].
pub fn forward(model: &MlpModel, features: &DMatrix<f64>) -> Result<(Vec<f64>, ForwardCache)> {
    if features.ncols() != model.input_dim {
        return Err(Error::validation(format!(
            "{} feature columns, model expects {}",
            features.ncols(),
            model.input_dim
        )));
    }
    let mut pre_activations = Vec::with_capacity(model.layers.len());
    let mut activation = features.clone();
    for (k, layer) in model.layers.iter().enumerate() {
        let mut z = &activation * &layer.weight;
        for mut row in z.row_iter_mut() {
            row += layer.bias.transpose();
        }
        if k + 1 < model.layers.len() {
            activation = z.map(|v| v.max(0.0));
        }
        pre_activations.push(z);
    }
    let scores = pre_activations
        .last()
        .expect("depth >= 2")
        .column(0)
        .iter()
        .copied()
        .collect();
    Ok((
        scores,
        ForwardCache {
            version: model.version,
            input: features.clone(),
            pre_activations,
        },
    ))
}

/// Backpropagates d(loss)/d(score) to parameter gradients.
///
/// The ReLU subgradient at exactly 0 is taken as 0. The cache must come from
/// a forward pass of this model at its current parameters.
pub fn backward(
    model: &MlpModel,
    cache: &ForwardCache,
    grad_scores: &[f64],
) -> Result<ModelGradients> {
    if cache.version != model.version {
        return Err(Error::validation(
            "stale forward cache: model parameters changed since the forward pass",
        ));
    }
    let batch = cache.input.nrows();
    if grad_scores.len() != batch {
        return Err(Error::validation(format!(
            "{} score gradients for a batch of {batch}",
            grad_scores.len()
        )));
    }
    let depth = model.layers.len();
    let mut grads: Vec<Layer> = model
        .layers
        .iter()
        .map(|l| Layer {
            weight: DMatrix::zeros(l.weight.nrows(), l.weight.ncols()),
            bias: DVector::zeros(l.bias.len()),
        })
        .collect();

    let mut delta = DMatrix::from_fn(batch, 1, |i, _| grad_scores[i]);
    for k in (0..depth).rev() {
        // activation entering layer k is relu of the previous pre-activation
        let relu_prev;
        let upstream = if k == 0 {
            &cache.input
        } else {
            relu_prev = cache.pre_activations[k - 1].map(|v| v.max(0.0));
            &relu_prev
        };
        grads[k].weight = upstream.transpose() * &delta;
        for c in 0..delta.ncols() {
            grads[k].bias[c] = delta.column(c).sum();
        }
        if k > 0 {
            let mut back = &delta * model.layers[k].weight.transpose();
            back.zip_apply(&cache.pre_activations[k - 1], |b, z| {
                if z <= 0.0 {
                    *b = 0.0;
                }
            });
            delta = back;
        }
    }
    Ok(ModelGradients { layers: grads })
}
