use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DataSource, DatasetConfig, ExperimentConfig, ModelKind};
use crate::data::{
    compute_features, load_csv, purge_overlap, split, synthetic, windowize, FeatureSpec, OhlcRecord,
};
use crate::encoding::{normalize_l2, AmplitudeAugmenter, MinMaxScaler, Preprocessing, ScaleMode};
use crate::enqode::{EnqodeConfig, EnqodeModel};
use crate::error::{Error, Result};
use crate::qrnn::{
    encode_sequence, AmplitudeEncoder, AngleEncoder, Checkpoint, EncodedSequence, EncodingKind,
    EnqodeEncoder, FeatureEncoder, QrnnConfig, QrnnModel,
};
use crate::training::{
    evaluate, target_probability, train, ClassicalRnn, Evaluation, QrnnForecaster,
};

pub fn load_records(source: &DataSource, spec: FeatureSpec) -> Result<Vec<OhlcRecord>> {
    match source {
        DataSource::Synthetic {
            seed,
            n_days,
            params,
        } => synthetic(*seed, *n_days, params),
        DataSource::Csv { path } => load_csv(path, spec),
    }
}

/// How each feature row is turned into an encoder input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowTransform {
    /// MinMax-scaled features.
    Scaled,
    /// MinMax-scaled, negatives clipped to 0, optional norm column, L2-normalized.
    Amplitude(Preprocessing),
}

/// Windows with encoder-ready inputs and probability-space targets.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub feature_names: Vec<String>,
    /// Width of each transformed input row.
    pub width: usize,
    /// Target feature bounds fitted on the training rows.
    pub bounds: (f64, f64),
    pub train_inputs: Vec<Vec<Vec<f64>>>,
    pub train_targets: Vec<f64>,
    pub test_inputs: Vec<Vec<Vec<f64>>>,
    pub test_targets: Vec<f64>,
    /// Transformed rows feeding the training windows, in time order.
    pub train_rows: Vec<Vec<f64>>,
}

pub fn prepare(
    records: &[OhlcRecord],
    cfg: &DatasetConfig,
    transform: RowTransform,
) -> Result<PreparedData> {
    let matrix = compute_features(records, cfg.features)?;
    let windows = windowize(&matrix.rows, cfg.window, cfg.target_index)?;
    let mut parts = split(windows, cfg.test_ratio)?;
    if cfg.purge_overlap {
        parts = purge_overlap(parts);
    }
    if parts.train.is_empty() {
        return Err(Error::Empty("training windows"));
    }
    let last_train_row = parts
        .train
        .iter()
        .map(|w| w.target_row())
        .max()
        .unwrap_or(0);
    let fit_rows = &matrix.rows[..=last_train_row];
    let scaler = MinMaxScaler::fit(fit_rows)?;
    let scaled: Vec<Vec<f64>> = matrix
        .rows
        .iter()
        .map(|r| scaler.transform(r, ScaleMode::MinMax))
        .collect::<Result<_>>()?;

    let processed: Vec<Vec<f64>> = match transform {
        RowTransform::Scaled => scaled,
        RowTransform::Amplitude(mode) => {
            let clipped: Vec<Vec<f64>> = scaled
                .iter()
                .map(|r| r.iter().map(|v| v.max(0.0)).collect())
                .collect();
            let augmenter = AmplitudeAugmenter::fit(&clipped[..=last_train_row], mode)?;
            clipped
                .iter()
                .map(|r| {
                    let aug: Vec<f64> = augmenter.apply(r)?.iter().map(|v| v.max(0.0)).collect();
                    match normalize_l2(&aug) {
                        Ok(unit) => Ok(unit),
                        Err(Error::ZeroNorm) => {
                            log::warn!("all-zero feature row; encoding the uniform state instead");
                            let u = 1.0 / (aug.len() as f64).sqrt();
                            Ok(vec![u; aug.len()])
                        }
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<_>>()?
        }
    };
    let bounds = (scaler.min(cfg.target_index), scaler.max(cfg.target_index));
    let gather = |ws: &[crate::data::Window]| -> Result<Gathered> {
        let inputs = ws
            .iter()
            .map(|w| processed[w.start..w.target_row()].to_vec())
            .collect();
        let targets = ws
            .iter()
            .map(|w| target_probability(w.target, bounds.0, bounds.1))
            .collect::<Result<_>>()?;
        Ok((inputs, targets))
    };
    let (train_inputs, train_targets) = gather(&parts.train)?;
    let (test_inputs, test_targets) = gather(&parts.test)?;
    let first_train = parts.train.iter().map(|w| w.start).min().unwrap_or(0);
    let last_input = parts
        .train
        .iter()
        .map(|w| w.last_input_row())
        .max()
        .unwrap_or(0);
    Ok(PreparedData {
        feature_names: matrix.names,
        width: processed[0].len(),
        bounds,
        train_inputs,
        train_targets,
        test_inputs,
        test_targets,
        train_rows: processed[first_train..=last_input].to_vec(),
    })
}

/// Inputs and probability-space targets of a set of windows.
type Gathered = (Vec<Vec<Vec<f64>>>, Vec<f64>);

fn transform_for(cfg: &ExperimentConfig) -> RowTransform {
    match (cfg.model.kind, cfg.model.encoding) {
        (ModelKind::Classical, _) | (ModelKind::Qrnn, EncodingKind::Angle) => RowTransform::Scaled,
        _ => RowTransform::Amplitude(cfg.preprocessing),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub curve: Vec<f64>,
    pub final_train_mse: f64,
    pub test_mse: Option<f64>,
    pub test_return_mse: Option<f64>,
}

/// A trained model ready to be written out.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SeedCheckpoint {
    Qrnn(Checkpoint),
    Classical {
        schema_version: u32,
        rnn: ClassicalRnn,
        target_min: f64,
        target_max: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub param_count: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub enqode_fidelity: Option<f64>,
    pub seeds: Vec<(SeedResult, SeedCheckpoint)>,
}

impl RunResult {
    pub fn mean_test_mse(&self) -> Option<f64> {
        let v: Option<Vec<f64>> = self.seeds.iter().map(|(s, _)| s.test_mse).collect();
        v.filter(|v| !v.is_empty())
            .map(|v| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn mean_train_mse(&self) -> f64 {
        self.seeds
            .iter()
            .map(|(s, _)| s.final_train_mse)
            .sum::<f64>()
            / self.seeds.len() as f64
    }
}

fn init_params(n: usize, scale: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            if scale > 0.0 {
                rng.random_range(-scale..=scale)
            } else {
                0.0
            }
        })
        .collect()
}

fn build_encoder(
    cfg: &ExperimentConfig,
    data: &PreparedData,
    n_feature: usize,
) -> Result<(Arc<dyn FeatureEncoder>, Option<f64>)> {
    Ok(match cfg.model.encoding {
        EncodingKind::Angle => (
            Arc::new(AngleEncoder {
                n_features: data.width,
            }),
            None,
        ),
        EncodingKind::AmplitudeExact => (
            Arc::new(AmplitudeEncoder {
                n_qubits: n_feature,
            }),
            None,
        ),
        EncodingKind::Enqode => {
            let ecfg = EnqodeConfig {
                layers: Some(cfg.enqode.layers.unwrap_or(n_feature)),
                ..cfg.enqode.clone()
            };
            let model = EnqodeModel::fit(&data.train_rows, n_feature, &ecfg)?;
            let fidelity = model.mean_fidelity(&data.train_rows, ecfg.refine)?;
            (
                Arc::new(EnqodeEncoder {
                    model: Arc::new(model),
                    refine: ecfg.refine,
                }),
                Some(fidelity),
            )
        }
    })
}

/// Trains and evaluates one model per configured seed.
pub fn run_training(cfg: &ExperimentConfig) -> Result<RunResult> {
    let records = load_records(&cfg.dataset.source, cfg.dataset.features)?;
    let data = prepare(&records, &cfg.dataset, transform_for(cfg))?;
    let tc = &cfg.training;
    let seed_eval = |seed: u64| crate::training::mix_seed(seed, u64::MAX);
    let to_result =
        |seed: u64, out: crate::training::TrainOutcome, test: Option<Evaluation>| SeedResult {
            seed,
            curve: out.curve,
            final_train_mse: out.final_loss,
            test_mse: test.map(|e| e.mse),
            test_return_mse: test.map(|e| e.return_mse),
        };

    match cfg.model.kind {
        ModelKind::Classical => {
            let n_h = cfg.model.n_hidden;
            let seeds = tc
                .seeds
                .par_iter()
                .map(|&seed| {
                    let mut rnn = ClassicalRnn {
                        n_hidden: n_h,
                        n_inputs: data.width,
                        params: init_params(ClassicalRnn::param_count(n_h, data.width), 0.5, seed),
                    };
                    let out = train(&mut rnn, &data.train_inputs, &data.train_targets, tc, seed)?;
                    let test = (!data.test_inputs.is_empty())
                        .then(|| {
                            evaluate(
                                &rnn,
                                &data.test_inputs,
                                &data.test_targets,
                                data.bounds,
                                seed_eval(seed),
                            )
                        })
                        .transpose()?;
                    let ck = SeedCheckpoint::Classical {
                        schema_version: 1,
                        rnn,
                        target_min: data.bounds.0,
                        target_max: data.bounds.1,
                        seed,
                    };
                    Ok((to_result(seed, out, test), ck))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RunResult {
                param_count: ClassicalRnn::param_count(n_h, data.width),
                n_train: data.train_inputs.len(),
                n_test: data.test_inputs.len(),
                enqode_fidelity: None,
                seeds,
            })
        }
        ModelKind::Qrnn => {
            let qcfg = QrnnConfig {
                ansatz_reps: cfg.model.ansatz_reps,
                entanglement: cfg.model.entanglement,
                ..QrnnConfig::for_features(
                    data.width,
                    cfg.model.n_hidden,
                    cfg.model.encoding,
                    cfg.model.structure,
                    cfg.dataset.target_index,
                )?
            };
            let (encoder, enqode_fidelity) = build_encoder(cfg, &data, qcfg.n_feature)?;
            let encode = |inputs: &[Vec<Vec<f64>>]| -> Result<Vec<EncodedSequence>> {
                inputs
                    .par_iter()
                    .map(|s| encode_sequence(encoder.as_ref(), s))
                    .collect()
            };
            let train_enc = encode(&data.train_inputs)?;
            let test_enc = encode(&data.test_inputs)?;
            let seeds = tc
                .seeds
                .par_iter()
                .map(|&seed| {
                    let model = QrnnModel::new(
                        qcfg.clone(),
                        init_params(qcfg.param_count(), cfg.model.init_scale, seed),
                        data.bounds.0,
                        data.bounds.1,
                    )?;
                    let mut f = QrnnForecaster {
                        model,
                        execution: tc.execution,
                        noise: cfg.noise,
                    };
                    let out = train(&mut f, &train_enc, &data.train_targets, tc, seed)?;
                    let test = (!test_enc.is_empty())
                        .then(|| {
                            evaluate(
                                &f,
                                &test_enc,
                                &data.test_targets,
                                data.bounds,
                                seed_eval(seed),
                            )
                        })
                        .transpose()?;
                    Ok((
                        to_result(seed, out, test),
                        SeedCheckpoint::Qrnn(Checkpoint::new(&f.model, seed)),
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RunResult {
                param_count: qcfg.param_count(),
                n_train: train_enc.len(),
                n_test: test_enc.len(),
                enqode_fidelity,
                seeds,
            })
        }
    }
}
