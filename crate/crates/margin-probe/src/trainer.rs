//! Minibatch SGD training of the LeNet-class model, plus test-set evaluation
//! producing the correctly-classified index set that defines the attack
//! search space.
//!
//! Everything is deterministic given the seed: parameter init, epoch
//! shuffles, and the gradient reduction order. Within a batch, per-chunk
//! gradients are computed in parallel but summed in a fixed order, so the
//! resulting checkpoint is byte-identical no matter how many workers ran.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::network::{NetworkModel, Params, WhiteBoxModel};

/// Fixed number of samples each parallel gradient task owns. Constant so the
/// summation tree does not depend on the worker count.
const GRAD_CHUNK: usize = 16;

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub seed: u64,
    /// 1-based epochs at whose start the learning rate is scaled.
    pub lr_decay_epochs: Vec<usize>,
    pub lr_decay_factor: f64,
    /// Emit a log line every this many steps (plus the last step of each epoch).
    pub log_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 15,
            batch_size: 64,
            learning_rate: 0.01,
            momentum: 0.9,
            seed: 42,
            lr_decay_epochs: vec![8, 12],
            lr_decay_factor: 0.5,
            log_every: 100,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if self.learning_rate <= 0.0 || self.momentum < 0.0 || self.lr_decay_factor <= 0.0 {
            return Err(Error::Config("learning rate and decay must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalResult {
    pub accuracy: f64,
    /// Sorted ascending; index i appears iff the model's argmax equals the label.
    pub correct_indices: Vec<usize>,
}

/// Kaiming-style fan-in uniform initialization of all weight tensors; biases
/// start at zero. Deterministic given the seed.
pub fn init_model(seed: u64) -> NetworkModel<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = NetworkModel::<f32>::zeros();
    // (tensor index in Params order, fan-in) for the weight tensors only.
    let fan_ins: [(usize, usize); 5] = [(0, 25), (2, 150), (4, 256), (6, 120), (8, 84)];
    let tensors = model.params.tensors_mut();
    for (slot, fan_in) in fan_ins {
        let bound = (6.0 / fan_in as f64).sqrt();
        for v in tensors[slot].data_mut() {
            *v = rng.gen_range(-bound..bound) as f32;
        }
    }
    model
}

/// Trains a fresh model on the given split. Writes `epoch,step,loss,lr`
/// lines to `log` and returns the trained model.
pub fn train<W: Write>(train_set: &Dataset, cfg: &TrainConfig, log: &mut W) -> Result<NetworkModel<f32>> {
    cfg.validate()?;
    let n = train_set.len();
    if n == 0 {
        return Err(Error::Config("training split is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = init_model(cfg.seed);
    let mut velocity = Params::<f32>::zeros();
    let mut lr = cfg.learning_rate;
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 1..=cfg.epochs {
        if cfg.lr_decay_epochs.contains(&epoch) {
            lr *= cfg.lr_decay_factor;
        }
        order.shuffle(&mut rng);
        let steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
        for (step, batch) in order.chunks(cfg.batch_size).enumerate() {
            let chunks: Vec<&[usize]> = batch.chunks(GRAD_CHUNK).collect();
            let partials: Result<Vec<(f64, Params<f32>)>> = chunks
                .par_iter()
                .map(|chunk| {
                    let mut loss_sum = 0.0f64;
                    let mut grads = Params::<f32>::zeros();
                    for &idx in *chunk {
                        let x = train_set.image(idx)?;
                        let (loss, g, _) = model.loss_gradients(&x, train_set.label(idx))?;
                        loss_sum += loss as f64;
                        grads.add_scaled(&g, 1.0);
                    }
                    Ok((loss_sum, grads))
                })
                .collect();
            let partials = partials?;

            let inv = 1.0 / batch.len() as f32;
            let mut batch_grads = Params::<f32>::zeros();
            let mut batch_loss = 0.0f64;
            for (loss_sum, grads) in &partials {
                batch_loss += loss_sum;
                batch_grads.add_scaled(grads, 1.0);
            }
            batch_grads.scale(inv);
            let mean_loss = batch_loss / batch.len() as f64;
            if !mean_loss.is_finite() {
                return Err(Error::Numeric(format!(
                    "loss diverged at epoch {epoch}, step {step}"
                )));
            }

            velocity.scale(cfg.momentum as f32);
            velocity.add_scaled(&batch_grads, 1.0);
            model.params.add_scaled(&velocity, -(lr as f32));

            if step % cfg.log_every == 0 || step + 1 == steps_per_epoch {
                writeln!(log, "{epoch},{step},{mean_loss:.6},{lr}")?;
            }
        }
    }
    Ok(model)
}

/// Pure evaluation: accuracy and the sorted list of correctly classified
/// test indices.
pub fn evaluate<M: WhiteBoxModel>(model: &M, dataset: &Dataset) -> Result<EvalResult> {
    let n = dataset.len();
    let verdicts: Result<Vec<bool>> = (0..n)
        .into_par_iter()
        .map(|i| Ok(model.predict(&dataset.image(i)?)? == dataset.label(i)))
        .collect();
    let verdicts = verdicts?;
    let correct_indices: Vec<usize> =
        verdicts.iter().enumerate().filter_map(|(i, &ok)| ok.then_some(i)).collect();
    Ok(EvalResult { accuracy: correct_indices.len() as f64 / n as f64, correct_indices })
}
