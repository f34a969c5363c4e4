//! Cross-mix-and-mix augmentation and the training epochs built on it.
//!
//! For a pair `(x₁, y₁), (x₂, y₂)` and two coefficients `λ₁, λ₂`:
//!
//! ```text
//! ẋ₁ = λ₁x₁ + (1 − λ₁)x₂        ẋ₂ = (1 − λ₁)x₁ + λ₁x₂
//! z̈  = λ₂·enc(ẋ₁) + (1 − λ₂)·enc(ẋ₂)      (at mix point I)
//! ÿ  = a·y₁ + b·y₂,   a = 1 − λ₁ − λ₂ + 2λ₁λ₂,   b = 1 − a
//! ```
//!
//! Plain mixup (`ẋ = λx₁ + (1 − λ)x₂`, same for labels) is kept as a
//! baseline.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, PoolState};
use crate::error::{invalid, Error, Result};
use crate::model::{sgd_step, MlpModel, TrainConfig, Velocity};
use crate::numeric::{sample_beta, shuffled_pairs, Matrix, RngStream};

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(invalid(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// The two interpolation coefficients and the label weights they induce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixCoefficients {
    lambda1: f64,
    lambda2: f64,
    a: f64,
    b: f64,
}

impl MixCoefficients {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        check_unit("lambda1", lambda1)?;
        check_unit("lambda2", lambda2)?;
        // 1 − λ₁ − λ₂ + 2λ₁λ₂ rewritten around 1/2; |t| <= 1/2 keeps a, b in
        // [0, 1] and λ₁ = 1/2 gives a = 1/2 exactly.
        let t = 2.0 * (lambda1 - 0.5) * (lambda2 - 0.5);
        Ok(Self {
            lambda1,
            lambda2,
            a: 0.5 + t,
            b: 0.5 - t,
        })
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// Weight of `y₁`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Weight of `y₂`.
    pub fn b(&self) -> f64 {
        self.b
    }
}

/// `λ·u + (1 − λ)·v`, clamped into `[min(u, v), max(u, v)]` so rounding
/// never leaves the segment.
fn lerp_in_hull(u: &Matrix, v: &Matrix, lambda: f64) -> Result<Matrix> {
    let mut out = u.lerp(v, lambda)?;
    for ((o, &p), &q) in out.as_mut_slice().iter_mut().zip(u.as_slice()).zip(v.as_slice()) {
        *o = o.clamp(p.min(q), p.max(q));
    }
    Ok(out)
}

/// The mirrored input cross: `(λ₁x₁ + (1 − λ₁)x₂, (1 − λ₁)x₁ + λ₁x₂)`.
pub fn mix_inputs(x1: &Matrix, x2: &Matrix, lambda1: f64) -> Result<(Matrix, Matrix)> {
    check_unit("lambda1", lambda1)?;
    if x1.shape() != x2.shape() {
        return Err(Error::Shape {
            op: "mix_inputs",
            left: x1.shape(),
            right: x2.shape(),
        });
    }
    Ok((lerp_in_hull(x1, x2, lambda1)?, lerp_in_hull(x2, x1, lambda1)?))
}

/// `a·y₁ + b·y₂` for one pair of label vectors.
pub fn mix_labels(y1: &[f64], y2: &[f64], coeffs: &MixCoefficients) -> Result<Vec<f64>> {
    if y1.len() != y2.len() {
        return Err(invalid(format!("label lengths {} and {} differ", y1.len(), y2.len())));
    }
    Ok(y1.iter().zip(y2).map(|(p, q)| coeffs.a * p + coeffs.b * q).collect())
}

/// Row-wise [`mix_labels`] over a batch of target rows.
pub fn mix_label_rows(y1: &Matrix, y2: &Matrix, coeffs: &MixCoefficients) -> Result<Matrix> {
    if y1.shape() != y2.shape() {
        return Err(Error::Shape {
            op: "mix_label_rows",
            left: y1.shape(),
            right: y2.shape(),
        });
    }
    let data = mix_labels(y1.as_slice(), y2.as_slice(), coeffs)?;
    Matrix::new(y1.rows(), y1.cols(), data)
}

/// Plain mixup of inputs and label rows with a single coefficient.
pub fn mixup_pair(x1: &Matrix, x2: &Matrix, y1: &Matrix, y2: &Matrix, lambda: f64) -> Result<(Matrix, Matrix)> {
    check_unit("lambda", lambda)?;
    if x1.shape() != x2.shape() || y1.shape() != y2.shape() || x1.rows() != y1.rows() {
        return Err(Error::Shape {
            op: "mixup_pair",
            left: x1.shape(),
            right: y1.shape(),
        });
    }
    Ok((lerp_in_hull(x1, x2, lambda)?, lerp_in_hull(y1, y2, lambda)?))
}

/// Where each batch's `(λ₁, λ₂)` comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSource {
    /// Both drawn independently from `Beta(alpha, alpha)`.
    Beta {
        alpha: f64,
    },
    Fixed {
        lambda1: f64,
        lambda2: f64,
    },
}

impl LambdaSource {
    pub fn draw(&self, rng: &mut RngStream) -> Result<MixCoefficients> {
        match *self {
            LambdaSource::Beta { alpha } => {
                let l1 = sample_beta(alpha, alpha, rng)?;
                let l2 = sample_beta(alpha, alpha, rng)?;
                MixCoefficients::new(l1, l2)
            }
            LambdaSource::Fixed { lambda1, lambda2 } => MixCoefficients::new(lambda1, lambda2),
        }
    }
}

/// Inputs and soft targets of one cross-mixed batch.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedBatch {
    pub xdot1: Matrix,
    pub xdot2: Matrix,
    pub targets: Matrix,
    pub coeffs: MixCoefficients,
}

/// Builds the cross-mixed batch for `pairs` of dataset rows.
pub fn build_mixed_batch(d: &Dataset, pairs: &[(usize, usize)], coeffs: MixCoefficients) -> Result<MixedBatch> {
    let first: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let second: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    let x1 = d.features().select_rows(&first)?;
    let x2 = d.features().select_rows(&second)?;
    let (xdot1, xdot2) = mix_inputs(&x1, &x2, coeffs.lambda1)?;
    let targets = mix_label_rows(&d.one_hot(&first)?, &d.one_hot(&second)?, &coeffs)?;
    Ok(MixedBatch {
        xdot1,
        xdot2,
        targets,
        coeffs,
    })
}

/// One optimizer step on a cross-mixed batch. Returns the batch loss.
pub fn cmam_step(
    m: &mut MlpModel,
    batch: &MixedBatch,
    mix_point: usize,
    config: &TrainConfig,
    velocity: &mut Velocity,
    epoch: usize,
) -> Result<f64> {
    let (loss, grads) = m.backward_mixed(
        &batch.xdot1,
        &batch.xdot2,
        batch.coeffs.lambda2,
        mix_point,
        &batch.targets,
    )?;
    sgd_step(m, &grads, config, velocity, epoch)?;
    Ok(loss)
}

/// One optimizer step on an unmixed batch with the given targets.
pub fn plain_step(
    m: &mut MlpModel,
    x: &Matrix,
    targets: &Matrix,
    config: &TrainConfig,
    velocity: &mut Velocity,
    epoch: usize,
) -> Result<f64> {
    let (loss, grads) = m.backward(x, targets)?;
    sgd_step(m, &grads, config, velocity, epoch)?;
    Ok(loss)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    /// Loss averaged over every sample row seen this epoch.
    pub mean_loss: f64,
    pub steps: usize,
}

/// One epoch of cross-mixed training over the labeled pool.
///
/// The labeled indices are shuffled once and paired adjacently (an odd
/// leftover sits out the epoch). Each minibatch holds up to
/// `config.batch_size` pairs and draws one fresh `(λ₁, λ₂)`.
#[allow(clippy::too_many_arguments)]
pub fn train_epoch_cmam(
    m: &mut MlpModel,
    d: &Dataset,
    pool: &PoolState,
    mix_point: usize,
    lambdas: LambdaSource,
    config: &TrainConfig,
    epoch: usize,
    velocity: &mut Velocity,
    shuffle_rng: &mut RngStream,
    beta_rng: &mut RngStream,
) -> Result<EpochStats> {
    let labeled = pool.labeled_indices();
    if labeled.len() < 2 {
        return Err(invalid(format!(
            "cross-mixed training needs at least 2 labeled samples, have {}",
            labeled.len()
        )));
    }
    if let LambdaSource::Beta { alpha } = lambdas {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid(format!("alpha {alpha} must be positive")));
        }
    }
    m.width_at(mix_point)?;
    let pairs: Vec<(usize, usize)> = shuffled_pairs(labeled.len(), shuffle_rng)?
        .into_iter()
        .map(|(i, j)| (labeled[i], labeled[j]))
        .collect();
    let mut total = 0.0;
    let mut rows = 0usize;
    let mut steps = 0usize;
    for chunk in pairs.chunks(config.batch_size) {
        let coeffs = lambdas.draw(beta_rng)?;
        let batch = build_mixed_batch(d, chunk, coeffs)?;
        let loss = cmam_step(m, &batch, mix_point, config, velocity, epoch)?;
        total += loss * chunk.len() as f64;
        rows += chunk.len();
        steps += 1;
    }
    Ok(EpochStats {
        mean_loss: total / rows as f64,
        steps,
    })
}

/// One epoch of ordinary one-hot cross-entropy training over shuffled
/// minibatches of `config.batch_size` samples.
pub fn train_epoch_plain(
    m: &mut MlpModel,
    d: &Dataset,
    pool: &PoolState,
    config: &TrainConfig,
    epoch: usize,
    velocity: &mut Velocity,
    shuffle_rng: &mut RngStream,
) -> Result<EpochStats> {
    let mut labeled = pool.labeled_indices();
    if labeled.is_empty() {
        return Err(invalid("training needs at least one labeled sample"));
    }
    shuffle_rng.shuffle(&mut labeled);
    let mut total = 0.0;
    let mut steps = 0usize;
    for chunk in labeled.chunks(config.batch_size) {
        let x = d.features().select_rows(chunk)?;
        let t = d.one_hot(chunk)?;
        total += plain_step(m, &x, &t, config, velocity, epoch)? * chunk.len() as f64;
        steps += 1;
    }
    Ok(EpochStats {
        mean_loss: total / labeled.len() as f64,
        steps,
    })
}

/// How a cycle's model is trained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TrainingMode {
    Plain,
    Cmam { alpha: f64, mix_point: usize },
}

/// Runs `config.epochs` epochs with a fresh momentum buffer. Returns the
/// final epoch's statistics.
pub fn fit(
    m: &mut MlpModel,
    d: &Dataset,
    pool: &PoolState,
    mode: TrainingMode,
    config: &TrainConfig,
    shuffle_rng: &mut RngStream,
    beta_rng: &mut RngStream,
) -> Result<EpochStats> {
    config.validate()?;
    let mut velocity = Velocity::zeros(m);
    let mut last = None;
    for epoch in 0..config.epochs {
        let stats = match mode {
            TrainingMode::Plain => train_epoch_plain(m, d, pool, config, epoch, &mut velocity, shuffle_rng)?,
            TrainingMode::Cmam { alpha, mix_point } => train_epoch_cmam(
                m,
                d,
                pool,
                mix_point,
                LambdaSource::Beta { alpha },
                config,
                epoch,
                &mut velocity,
                shuffle_rng,
                beta_rng,
            )?,
        };
        last = Some(stats);
    }
    Ok(last.expect("epochs validated positive"))
}
