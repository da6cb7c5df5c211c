//! Hinge-loss training of the encoder.
//!
//! For a triplet `⟨i, j, k⟩` with answer `y` the loss is
//! `max(0, margin + y · (E_ij − E_ik))` with `E = W2²`. A positive answer
//! therefore pulls `E_ij` below `E_ik`, which is the same sign convention the
//! triplet error uses.
//!
//! Variances entering the loss are clamped to `[SIGMA_FLOOR, C]`; a clamped
//! coordinate passes no gradient back to the scale head.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::encoder::{EncoderGrads, EncoderParams, DEFAULT_HIDDEN_DIM, DEFAULT_INPUT_DIM};
use crate::error::{invalid, Error, Result};
use crate::eval::triplet_error;
use crate::gaussian::{accumulate_w2_grad, wasserstein2_sq, wasserstein2_sq_raw, GaussianEmbedding};
use crate::optim::Adam;
use crate::rng;
use crate::triplet::Triplet;

/// Lower variance bound; keeps the `√σ` gradient finite.
pub const SIGMA_FLOOR: f64 = 1e-6;
/// Smallest decrease of the epoch loss that counts as progress.
pub const MIN_IMPROVEMENT: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Embedding dimension `d`.
    pub dim: usize,
    /// Upper variance bound `C`.
    pub clamp: f64,
    pub learning_rate: f64,
    pub lr_decay: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub margin: f64,
    pub input_dim: usize,
    pub hidden_dim: usize,
    /// Point-embedding baseline: every variance pinned to [`SIGMA_FLOOR`].
    pub dirac: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            clamp: libm::log(100.0),
            learning_rate: 0.01,
            lr_decay: 1e-5,
            batch_size: 256,
            max_epochs: 200,
            patience: 10,
            margin: 1.0,
            input_dim: DEFAULT_INPUT_DIM,
            hidden_dim: DEFAULT_HIDDEN_DIM,
            dirac: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("clamp", self.clamp),
            ("learning_rate", self.learning_rate),
            ("margin", self.margin),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(alloc::format!("{name} must be > 0")));
            }
        }
        if !(self.lr_decay >= 0.0 && self.lr_decay.is_finite()) {
            return Err(invalid("lr_decay must be >= 0"));
        }
        let counts = [
            ("dim", self.dim),
            ("batch_size", self.batch_size),
            ("max_epochs", self.max_epochs),
            ("patience", self.patience),
            ("input_dim", self.input_dim),
            ("hidden_dim", self.hidden_dim),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(invalid(alloc::format!("{name} must be >= 1")));
            }
        }
        if self.patience > self.max_epochs {
            return Err(invalid("patience must not exceed max_epochs"));
        }
        if self.clamp <= SIGMA_FLOOR {
            return Err(invalid("clamp must exceed the variance floor"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean hinge loss over the training set after each epoch.
    pub epoch_loss: Vec<f64>,
    /// Training triplet error after each epoch.
    pub epoch_train_error: Vec<f64>,
    /// Error on held-out triplets, `None` when none were given.
    pub held_out_error: Option<f64>,
    pub epochs: usize,
    /// `true` if training stopped on a loss plateau rather than `max_epochs`.
    pub converged: bool,
    /// Filled in by callers that can read a clock.
    pub wall_clock_secs: f64,
}

impl TrainReport {
    pub fn final_loss(&self) -> f64 {
        self.epoch_loss.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_train_error(&self) -> f64 {
        self.epoch_train_error.last().copied().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: EncoderParams,
    pub embeddings: Vec<GaussianEmbedding>,
    pub report: TrainReport,
}

/// Energy between two embedded items: the squared 2-Wasserstein distance.
pub fn energy(za: &GaussianEmbedding, zb: &GaussianEmbedding) -> Result<f64> {
    wasserstein2_sq(za, zb)
}

/// `max(0, margin + y · (E_ij − E_ik))`.
pub fn hinge_loss(t: &Triplet, embeddings: &[GaussianEmbedding], margin: f64) -> Result<f64> {
    t.check_bounds(embeddings.len())?;
    let e_ij = energy(&embeddings[t.i], &embeddings[t.j])?;
    let e_ik = energy(&embeddings[t.i], &embeddings[t.k])?;
    Ok(hinge(margin, t.label, e_ij, e_ik))
}

#[inline]
fn hinge(margin: f64, label: i8, e_ij: f64, e_ik: f64) -> f64 {
    (margin + f64::from(label) * (e_ij - e_ik)).max(0.0)
}

/// Each entry replaced by `min(max(entry, SIGMA_FLOOR), clamp)`.
pub fn clamp_sigma(sigma: &[f64], clamp: f64) -> Vec<f64> {
    sigma.iter().map(|&s| clamp_one(s, clamp)).collect()
}

#[inline]
fn clamp_one(s: f64, clamp: f64) -> f64 {
    s.max(SIGMA_FLOOR).min(clamp)
}

/// Forward state of one item inside a step.
struct ItemState {
    hidden_pre: Vec<f64>,
    mu: Vec<f64>,
    /// Clamped variances used by the loss.
    sigma: Vec<f64>,
    /// `dσ/dσ_pre` per coordinate: `σ` where unclamped, 0 where clamped.
    sigma_slope: Vec<f64>,
    grad_mu: Vec<f64>,
    grad_sigma: Vec<f64>,
}

struct Model<'a> {
    params: EncoderParams,
    config: &'a TrainConfig,
}

impl Model<'_> {
    fn item_state(&self, i: usize) -> Result<ItemState> {
        let act = self.params.activations(i)?;
        let d = self.config.dim;
        let (sigma, sigma_slope) = if self.config.dirac {
            (alloc::vec![SIGMA_FLOOR; d], alloc::vec![0.0; d])
        } else {
            act.sigma
                .iter()
                .map(|&s| {
                    let c = clamp_one(s, self.config.clamp);
                    (c, if c == s { s } else { 0.0 })
                })
                .unzip()
        };
        Ok(ItemState {
            hidden_pre: act.hidden_pre,
            mu: act.mu,
            sigma,
            sigma_slope,
            grad_mu: alloc::vec![0.0; d],
            grad_sigma: alloc::vec![0.0; d],
        })
    }

    fn embed_all(&self) -> Result<Vec<GaussianEmbedding>> {
        (0..self.params.n)
            .map(|i| {
                let s = self.item_state(i)?;
                GaussianEmbedding::new(s.mu, s.sigma)
            })
            .collect()
    }
}

fn mean_loss(triplets: &[Triplet], embeddings: &[GaussianEmbedding], margin: f64) -> f64 {
    let total: f64 = triplets
        .iter()
        .map(|t| {
            let (zi, zj, zk) = (&embeddings[t.i], &embeddings[t.j], &embeddings[t.k]);
            let e_ij = wasserstein2_sq_raw(zi.mu(), zi.sigma(), zj.mu(), zj.sigma());
            let e_ik = wasserstein2_sq_raw(zi.mu(), zi.sigma(), zk.mu(), zk.sigma());
            hinge(margin, t.label, e_ij, e_ik)
        })
        .sum();
    total / triplets.len() as f64
}

/// Trains a fresh encoder on `train` and reports error on `held_out`.
///
/// Minibatch Adam on the mean hinge loss. Stops after `max_epochs` or once
/// the epoch loss has failed to drop by [`MIN_IMPROVEMENT`] for `patience`
/// consecutive epochs. The result depends only on the inputs and
/// `config.seed`.
pub fn train(train: &[Triplet], held_out: &[Triplet], n: usize, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::Empty("training triplets"));
    }
    for t in train.iter().chain(held_out) {
        t.check_bounds(n)?;
    }
    let params = EncoderParams::init(
        n,
        config.dim,
        config.input_dim,
        config.hidden_dim,
        rng::derive(config.seed, 10),
    )?;
    let mut model = Model { params, config };
    let mut adam = Adam::new(&model.params, config.learning_rate, config.lr_decay);
    let mut grads = EncoderGrads::zeros_like(&model.params);
    let mut shuffle_rng = rng::stream(rng::derive(config.seed, 11));

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut slot = alloc::vec![usize::MAX; n];
    let mut items: Vec<usize> = Vec::new();
    let mut states: Vec<ItemState> = Vec::new();

    let mut report = TrainReport {
        epoch_loss: Vec::new(),
        epoch_train_error: Vec::new(),
        held_out_error: None,
        epochs: 0,
        converged: false,
        wall_clock_secs: 0.0,
    };
    let mut best = f64::INFINITY;
    let mut stale = 0usize;
    let mut step = 0usize;

    for epoch in 0..config.max_epochs {
        order.shuffle(&mut shuffle_rng);
        for batch in order.chunks(config.batch_size) {
            items.clear();
            states.clear();
            for &ti in batch {
                let t = &train[ti];
                for v in [t.i, t.j, t.k] {
                    if slot[v] == usize::MAX {
                        slot[v] = items.len();
                        items.push(v);
                        states.push(model.item_state(v)?);
                    }
                }
            }

            let scale = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for &ti in batch {
                let t = &train[ti];
                let (si, sj, sk) = (slot[t.i], slot[t.j], slot[t.k]);
                let e_ij = wasserstein2_sq_raw(&states[si].mu, &states[si].sigma, &states[sj].mu, &states[sj].sigma);
                let e_ik = wasserstein2_sq_raw(&states[si].mu, &states[si].sigma, &states[sk].mu, &states[sk].sigma);
                let loss = hinge(config.margin, t.label, e_ij, e_ik);
                batch_loss += loss;
                if loss > 0.0 {
                    let y = f64::from(t.label) * scale;
                    accumulate_pair(&mut states, si, sj, y);
                    accumulate_pair(&mut states, si, sk, -y);
                }
            }
            if !batch_loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, step });
            }

            grads.clear();
            for (&v, s) in items.iter().zip(&states) {
                let grad_sigma_pre: Vec<f64> = s.grad_sigma.iter().zip(&s.sigma_slope).map(|(g, m)| g * m).collect();
                model.params.backward_pre(v, &s.hidden_pre, &s.grad_mu, &grad_sigma_pre, &mut grads);
            }
            adam.step(&mut model.params, &grads);
            for &v in &items {
                slot[v] = usize::MAX;
            }
            step += 1;
        }

        let embeddings = model.embed_all()?;
        let loss = mean_loss(train, &embeddings, config.margin);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, step });
        }
        report.epoch_loss.push(loss);
        report.epoch_train_error.push(triplet_error(train, &embeddings, energy)?);
        report.epochs = epoch + 1;

        if loss < best - MIN_IMPROVEMENT {
            best = loss;
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                report.converged = true;
                break;
            }
        }
    }

    let embeddings = model.embed_all()?;
    if !held_out.is_empty() {
        report.held_out_error = Some(triplet_error(held_out, &embeddings, energy)?);
    }
    Ok(TrainOutcome {
        params: model.params,
        embeddings,
        report,
    })
}

/// Adds `scale · ∂E(a, b)` to the gradients of items in slots `a` and `b`.
fn accumulate_pair(states: &mut [ItemState], a: usize, b: usize, scale: f64) {
    // a != b for valid triplets
    let (sa, sb) = if a < b {
        let (lo, hi) = states.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    } else {
        let (lo, hi) = states.split_at_mut(a);
        (&mut hi[0], &mut lo[b])
    };
    accumulate_w2_grad(
        scale,
        &sa.mu,
        &sa.sigma,
        &sb.mu,
        &sb.sigma,
        &mut sa.grad_mu,
        &mut sa.grad_sigma,
        &mut sb.grad_mu,
        &mut sb.grad_sigma,
    );
}

/// Embeddings produced by trained parameters, with the training clamp.
pub fn embed_all(params: &EncoderParams, config: &TrainConfig) -> Result<Vec<GaussianEmbedding>> {
    Model {
        params: params.clone(),
        config,
    }
    .embed_all()
}
