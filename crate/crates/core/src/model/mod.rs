//! Feed-forward classifier with addressable layer boundaries.
//!
//! A model with `L` layers has mix points `0..L`: point `I` is the
//! post-activation output of the first `I` layers, point `0` being the raw
//! input. The last layer is the linear classifier head.

mod checkpoint;
mod loss;
mod optim;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use loss::{softmax_rows, softmax_xent, xent_of_row};
pub use optim::{sgd_step, TrainConfig, Velocity};

use crate::error::{invalid, Error, Result};
use crate::numeric::{Matrix, RngStream};
use crate::sampling::ProbVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Identity => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `(in, out)`; a batch `x` maps to `x · weights + bias`.
    pub(crate) weights: Matrix,
    pub(crate) bias: Vec<f64>,
    pub(crate) activation: Activation,
}

impl Layer {
    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    fn forward(&self, x: &Matrix) -> Result<Matrix> {
        let act = self.activation;
        Ok(x.matmul(&self.weights)?
            .add_row_vector(&self.bias)?
            .map(|v| act.apply(v)))
    }
}

/// Hidden features at a mix point.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBatch {
    values: Matrix,
    mix_point: usize,
}

impl FeatureBatch {
    pub fn new(values: Matrix, mix_point: usize) -> Self {
        Self { values, mix_point }
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn into_values(self) -> Matrix {
        self.values
    }

    pub fn mix_point(&self) -> usize {
        self.mix_point
    }
}

/// Per-parameter gradients, in the same layout as the model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub(crate) layers: Vec<(Matrix, Vec<f64>)>,
}

impl Gradients {
    pub fn zeros_like(m: &MlpModel) -> Self {
        let layers = m
            .layers
            .iter()
            .map(|l| {
                let (r, c) = l.weights.shape();
                (Matrix::from_parts(r, c, vec![0.0; r * c]), vec![0.0; l.bias.len()])
            })
            .collect();
        Self { layers }
    }

    /// `(weight gradient, bias gradient)` for each layer.
    pub fn layers(&self) -> &[(Matrix, Vec<f64>)] {
        &self.layers
    }

    /// All entries flattened layer by layer, weights before bias.
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|(w, b)| w.as_slice().iter().chain(b).copied())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layers: Vec<Layer>,
}

impl MlpModel {
    /// `layer_widths` starts with the input width and lists each hidden
    /// width; a linear head to `num_classes` logits is appended. Weights are
    /// fan-in scaled uniform, biases zero.
    pub fn init(layer_widths: &[usize], num_classes: usize, rng: &mut RngStream) -> Result<Self> {
        if layer_widths.len() < 2 {
            return Err(invalid(format!(
                "need an input width and at least one hidden width, got {layer_widths:?}"
            )));
        }
        if layer_widths.contains(&0) || num_classes < 2 {
            return Err(invalid("widths must be positive and num_classes >= 2"));
        }
        let mut widths = layer_widths.to_vec();
        widths.push(num_classes);
        let last = widths.len() - 2;
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let activation = if k == last {
                    Activation::Identity
                } else {
                    Activation::Relu
                };
                let gain = if activation == Activation::Relu { 6.0 } else { 3.0 };
                let bound = (gain / fan_in as f64).sqrt();
                let data = (0..fan_in * fan_out)
                    .map(|_| bound * (2.0 * rng.uniform() - 1.0))
                    .collect();
                Layer {
                    weights: Matrix::from_parts(fan_in, fan_out, data),
                    bias: vec![0.0; fan_out],
                    activation,
                }
            })
            .collect();
        Ok(Self { layers })
    }

    pub(crate) fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.len() < 2 {
            return Err(invalid("a model needs at least two layers"));
        }
        for w in layers.windows(2) {
            if w[0].weights.cols() != w[1].weights.rows() {
                return Err(Error::Shape {
                    op: "layer chain",
                    left: w[0].weights.shape(),
                    right: w[1].weights.shape(),
                });
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Number of valid mix points (`0..num_layers`).
    pub fn num_mix_points(&self) -> usize {
        self.layers.len()
    }

    /// Input width followed by every layer's output width.
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].weights.rows())
            .chain(self.layers.iter().map(|l| l.weights.cols()))
            .collect()
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].weights.rows()
    }

    pub fn num_classes(&self) -> usize {
        self.layers[self.layers.len() - 1].weights.cols()
    }

    /// Feature width at mix point `mix_point`.
    pub fn width_at(&self, mix_point: usize) -> Result<usize> {
        self.check_mix_point(mix_point)?;
        Ok(self.widths()[mix_point])
    }

    fn check_mix_point(&self, mix_point: usize) -> Result<()> {
        if mix_point >= self.layers.len() {
            return Err(invalid(format!(
                "mix point {mix_point} outside 0..{}",
                self.layers.len()
            )));
        }
        Ok(())
    }

    fn check_width(&self, x: &Matrix, mix_point: usize) -> Result<()> {
        let w = self.widths()[mix_point];
        if x.cols() != w {
            return Err(Error::Shape {
                op: "feature width",
                left: x.shape(),
                right: (x.rows(), w),
            });
        }
        Ok(())
    }

    /// Activations for layers `from..to`; entry `0` is `x` itself.
    fn run(&self, x: &Matrix, from: usize, to: usize) -> Result<Vec<Matrix>> {
        let mut acts = Vec::with_capacity(to - from + 1);
        acts.push(x.clone());
        for layer in &self.layers[from..to] {
            let next = layer.forward(acts.last().expect("non-empty"))?;
            acts.push(next);
        }
        Ok(acts)
    }

    /// Backpropagates `grad` (w.r.t. the last activation in `acts`) through
    /// layers `from..from + acts.len() - 1`, accumulating into `grads`.
    /// Returns the gradient w.r.t. `acts[0]`.
    fn backprop(&self, acts: &[Matrix], from: usize, mut grad: Matrix, grads: &mut Gradients) -> Result<Matrix> {
        for k in (0..acts.len() - 1).rev() {
            let layer = &self.layers[from + k];
            if layer.activation == Activation::Relu {
                for (g, &h) in grad.as_mut_slice().iter_mut().zip(acts[k + 1].as_slice()) {
                    if h <= 0.0 {
                        *g = 0.0;
                    }
                }
            }
            let (dw, db) = &mut grads.layers[from + k];
            let w_grad = acts[k].t_matmul(&grad)?;
            for (a, b) in dw.as_mut_slice().iter_mut().zip(w_grad.as_slice()) {
                *a += b;
            }
            for (a, b) in db.iter_mut().zip(grad.sum_rows()) {
                *a += b;
            }
            grad = grad.matmul_t(&layer.weights)?;
        }
        Ok(grad)
    }

    /// Activations at mix point `mix_point`.
    pub fn forward_to(&self, x: &Matrix, mix_point: usize) -> Result<FeatureBatch> {
        self.check_mix_point(mix_point)?;
        self.check_width(x, 0)?;
        let mut acts = self.run(x, 0, mix_point)?;
        Ok(FeatureBatch::new(acts.pop().expect("non-empty"), mix_point))
    }

    /// Logits from features at their mix point.
    pub fn forward_from(&self, f: &FeatureBatch) -> Result<Matrix> {
        self.check_mix_point(f.mix_point)?;
        self.check_width(&f.values, f.mix_point)?;
        let mut acts = self.run(&f.values, f.mix_point, self.layers.len())?;
        acts.pop().expect("non-empty").ensure_finite("forward")
    }

    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        self.forward_from(&FeatureBatch::new(x.clone(), 0))
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<ProbVector>> {
        let p = softmax_rows(&self.forward(x)?);
        Ok(p.iter_rows().map(|r| ProbVector::new_unchecked(r.to_vec())).collect())
    }

    /// Loss and gradients for a plain (unmixed) batch.
    pub fn backward(&self, x: &Matrix, soft_targets: &Matrix) -> Result<(f64, Gradients)> {
        self.check_width(x, 0)?;
        let acts = self.run(x, 0, self.layers.len())?;
        let (loss, dlogits) = softmax_xent(acts.last().expect("non-empty"), soft_targets)?;
        let mut grads = Gradients::zeros_like(self);
        self.backprop(&acts, 0, dlogits, &mut grads)?;
        Ok((loss, grads))
    }

    /// Branch-and-merge pass: `x1` and `x2` each run to `mix_point`, their
    /// features are mixed as `λ₂·z₁ + (1 − λ₂)·z₂`, and the mixture runs
    /// through the remaining layers. Layers below the mix point collect
    /// gradient from both branches, scaled by `λ₂` and `1 − λ₂`.
    pub fn backward_mixed(
        &self,
        x1: &Matrix,
        x2: &Matrix,
        lambda2: f64,
        mix_point: usize,
        soft_targets: &Matrix,
    ) -> Result<(f64, Gradients)> {
        if x1.shape() != x2.shape() {
            return Err(Error::Shape {
                op: "backward_mixed",
                left: x1.shape(),
                right: x2.shape(),
            });
        }
        if !(0.0..=1.0).contains(&lambda2) {
            return Err(invalid(format!("lambda2 {lambda2} outside [0, 1]")));
        }
        self.check_mix_point(mix_point)?;
        self.check_width(x1, 0)?;

        let branch1 = self.run(x1, 0, mix_point)?;
        let branch2 = self.run(x2, 0, mix_point)?;
        let z1 = branch1.last().expect("non-empty");
        let z2 = branch2.last().expect("non-empty");
        let mixed = z1.lerp(z2, lambda2)?;
        let shared = self.run(&mixed, mix_point, self.layers.len())?;
        let (loss, dlogits) = softmax_xent(shared.last().expect("non-empty"), soft_targets)?;

        let mut grads = Gradients::zeros_like(self);
        let g_mixed = self.backprop(&shared, mix_point, dlogits, &mut grads)?;
        if mix_point > 0 {
            self.backprop(&branch1, 0, g_mixed.scale(lambda2), &mut grads)?;
            self.backprop(&branch2, 0, g_mixed.scale(1.0 - lambda2), &mut grads)?;
        }
        Ok((loss, grads))
    }

    /// All parameters flattened layer by layer, weights before bias.
    pub fn parameters(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.as_slice().iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn num_parameters(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.as_slice().len() + l.bias.len())
            .sum()
    }

    /// Overwrites parameters from the layout of [`MlpModel::parameters`].
    pub fn set_parameters(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_parameters() {
            return Err(invalid(format!(
                "expected {} parameters, got {}",
                self.num_parameters(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("set_parameters"));
        }
        let mut it = values.iter().copied();
        for l in &mut self.layers {
            for w in l.weights.as_mut_slice() {
                *w = it.next().expect("length checked");
            }
            for b in &mut l.bias {
                *b = it.next().expect("length checked");
            }
        }
        Ok(())
    }
}
