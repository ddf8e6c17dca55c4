//! Probability-space loss, the SPSA + Adam training loop, evaluation and the
//! classical RNN baseline.

mod classical;
mod optim;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use classical::ClassicalRnn;
pub use optim::{adam_step, spsa_gradient, AdamState};

use crate::error::{Error, Result};
use crate::qrnn::{sequence_probability, EncodedSequence, Execution, QrnnModel};
use crate::simulator::NoiseSpec;

/// `(x − min) / (max − min)`.
pub fn target_probability(x: f64, min: f64, max: f64) -> Result<f64> {
    if !(max > min) {
        return Err(Error::DegenerateBounds { min, max });
    }
    Ok((x - min) / (max - min))
}

/// Mean squared difference between predicted and target probabilities.
pub fn mse_loss(predicted: &[f64], target: &[f64]) -> Result<f64> {
    if predicted.len() != target.len() {
        return Err(Error::DimensionMismatch {
            expected: target.len(),
            got: predicted.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::Empty("loss inputs"));
    }
    Ok(predicted
        .iter()
        .zip(target)
        .map(|(p, x)| (p - x) * (p - x))
        .sum::<f64>()
        / predicted.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub spsa_step: f64,
    pub epochs: usize,
    /// SPSA directions averaged per epoch.
    pub spsa_directions: usize,
    pub execution: Execution,
    pub seeds: Vec<u64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.03,
            spsa_step: 0.001,
            epochs: 100,
            spsa_directions: 1,
            execution: Execution::Shots(1024),
            seeds: vec![0, 1, 2, 3, 4],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.spsa_step > 0.0) {
            return Err(Error::Config(format!(
                "spsa_step must be positive, got {}",
                self.spsa_step
            )));
        }
        if self.spsa_directions == 0 {
            return Err(Error::Config("spsa_directions must be at least 1".into()));
        }
        if self.execution == Execution::Shots(0) {
            return Err(Error::ZeroShots);
        }
        Ok(())
    }
}

/// A model mapping one input sequence to an outcome probability under a given
/// parameter vector.
pub trait Forecaster: Sync {
    type Input: Sync;

    fn params(&self) -> &[f64];
    fn set_params(&mut self, params: Vec<f64>);
    /// `seed` drives finite-shot sampling; deterministic models ignore it.
    fn probability(&self, params: &[f64], input: &Self::Input, seed: u64) -> Result<f64>;
}

/// A QRNN together with how its circuits are executed.
#[derive(Debug, Clone)]
pub struct QrnnForecaster {
    pub model: QrnnModel,
    pub execution: Execution,
    pub noise: Option<NoiseSpec>,
}

impl Forecaster for QrnnForecaster {
    type Input = EncodedSequence;

    fn params(&self) -> &[f64] {
        &self.model.params
    }

    fn set_params(&mut self, params: Vec<f64>) {
        self.model.params = params;
    }

    fn probability(&self, params: &[f64], input: &EncodedSequence, seed: u64) -> Result<f64> {
        sequence_probability(
            &self.model.config,
            params,
            input,
            self.execution,
            self.noise.as_ref(),
            seed,
        )
    }
}

/// SplitMix64 finalizer; derives independent per-evaluation seeds.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Predicted probabilities for every input, evaluated in parallel.
pub fn predict_all<F: Forecaster>(
    model: &F,
    params: &[f64],
    inputs: &[F::Input],
    seed: u64,
) -> Result<Vec<f64>> {
    inputs
        .par_iter()
        .enumerate()
        .map(|(i, x)| model.probability(params, x, mix_seed(seed, i as u64)))
        .collect()
}

fn batch_loss<F: Forecaster>(
    model: &F,
    params: &[f64],
    inputs: &[F::Input],
    targets: &[f64],
    seed: u64,
) -> Result<f64> {
    mse_loss(&predict_all(model, params, inputs, seed)?, targets)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    /// Full-batch loss at the start of every epoch.
    pub curve: Vec<f64>,
    /// Loss after the final update.
    pub final_loss: f64,
}

/// Full-batch training: each epoch records the loss, draws the configured
/// number of SPSA directions (two loss evaluations each) and takes one Adam
/// step. Deterministic for a given `seed`.
pub fn train<F: Forecaster>(
    model: &mut F,
    inputs: &[F::Input],
    targets: &[f64],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if inputs.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if inputs.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: inputs.len(),
            got: targets.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = model.params().to_vec();
    let mut adam = AdamState::new(params.len());
    let mut curve = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        log::debug!("epoch {epoch}");
        curve.push(batch_loss(model, &params, inputs, targets, rng.random())?);
        let mut grad = vec![0.0; params.len()];
        for _ in 0..cfg.spsa_directions {
            let eval_seed: u64 = rng.random();
            let mut call = 0u64;
            let g = spsa_gradient(
                |p| {
                    call += 1;
                    batch_loss(model, p, inputs, targets, mix_seed(eval_seed, call))
                },
                &params,
                cfg.spsa_step,
                &mut rng,
            )?;
            for (a, b) in grad.iter_mut().zip(g) {
                *a += b / cfg.spsa_directions as f64;
            }
        }
        adam.step(&mut params, &grad, cfg.learning_rate)?;
    }
    let final_loss = batch_loss(model, &params, inputs, targets, rng.random())?;
    model.set_params(params);
    Ok(TrainOutcome { curve, final_loss })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub mse: f64,
    /// `mse · (max − min)²`, the error in the target's own units.
    pub return_mse: f64,
}

pub fn evaluate<F: Forecaster>(
    model: &F,
    inputs: &[F::Input],
    targets: &[f64],
    bounds: (f64, f64),
    seed: u64,
) -> Result<Evaluation> {
    if inputs.is_empty() {
        return Err(Error::Empty("test set"));
    }
    let (min, max) = bounds;
    if !(max > min) {
        return Err(Error::DegenerateBounds { min, max });
    }
    let mse = batch_loss(model, model.params(), inputs, targets, seed)?;
    Ok(Evaluation {
        mse,
        return_mse: mse * (max - min).powi(2),
    })
}
