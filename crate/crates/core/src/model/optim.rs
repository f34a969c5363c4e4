use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{Gradients, MlpModel};

/// Heavy-ball SGD with L2 decay folded into the gradient. The learning rate
/// drops once, by a constant factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    /// Fraction of `epochs` after which the rate is multiplied by
    /// `lr_drop_factor`.
    pub lr_drop_fraction: f64,
    pub lr_drop_factor: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 32,
            learning_rate: 0.1,
            momentum: 0.9,
            weight_decay: 5e-4,
            lr_drop_fraction: 0.8,
            lr_drop_factor: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(invalid("epochs and batch_size must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid(format!(
                "learning_rate {} must be positive",
                self.learning_rate
            )));
        }
        if !(self.momentum >= 0.0 && self.momentum < 1.0) {
            return Err(invalid(format!("momentum {} must be in [0, 1)", self.momentum)));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(invalid(format!("weight_decay {} must be >= 0", self.weight_decay)));
        }
        if !(self.lr_drop_fraction > 0.0 && self.lr_drop_fraction <= 1.0) {
            return Err(invalid(format!(
                "lr_drop_fraction {} must be in (0, 1]",
                self.lr_drop_fraction
            )));
        }
        if !(self.lr_drop_factor > 0.0 && self.lr_drop_factor <= 1.0) {
            return Err(invalid(format!(
                "lr_drop_factor {} must be in (0, 1]",
                self.lr_drop_factor
            )));
        }
        Ok(())
    }

    /// Learning rate in effect during 0-based `epoch`.
    pub fn lr_at(&self, epoch: usize) -> f64 {
        if epoch as f64 >= self.lr_drop_fraction * self.epochs as f64 {
            self.learning_rate * self.lr_drop_factor
        } else {
            self.learning_rate
        }
    }
}

/// Momentum buffers, one per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Velocity(Gradients);

impl Velocity {
    pub fn zeros(m: &MlpModel) -> Self {
        Self(Gradients::zeros_like(m))
    }

    pub fn as_gradients(&self) -> &Gradients {
        &self.0
    }
}

/// `v ← μ·v + (g + wd·θ)`, then `θ ← θ − lr(epoch)·v`.
pub fn sgd_step(
    m: &mut MlpModel,
    grads: &Gradients,
    config: &TrainConfig,
    velocity: &mut Velocity,
    epoch: usize,
) -> Result<()> {
    if grads.layers.len() != m.layers.len() || velocity.0.layers.len() != m.layers.len() {
        return Err(invalid("gradient layer count does not match the model"));
    }
    let lr = config.lr_at(epoch);
    for ((layer, (gw, gb)), (vw, vb)) in m.layers.iter_mut().zip(&grads.layers).zip(&mut velocity.0.layers) {
        if gw.shape() != layer.weights.shape() || gb.len() != layer.bias.len() {
            return Err(Error::Shape {
                op: "sgd_step",
                left: layer.weights.shape(),
                right: gw.shape(),
            });
        }
        let params = layer.weights.as_mut_slice().iter_mut().chain(layer.bias.iter_mut());
        let g = gw.as_slice().iter().chain(gb.iter());
        let v = vw.as_mut_slice().iter_mut().chain(vb.iter_mut());
        for ((theta, &g), v) in params.zip(g).zip(v) {
            *v = config.momentum * *v + (g + config.weight_decay * *theta);
            *theta -= lr * *v;
        }
    }
    if m.parameters().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sgd_step"));
    }
    Ok(())
}
