//! QRNN circuit construction and prediction.
//!
//! Register layout: hidden qubits `0..n_H`, then the feature register
//! (`n_H..n_H+n_F`). The alternating structure adds a second feature register
//! at `n_H+n_F..n_H+2·n_F`; odd steps use the first, even steps the second.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::encoding::{amplitude_qsp, amplitude_qubits, angle_feature_map};
use crate::enqode::EnqodeModel;
use crate::error::{Error, Result};
use crate::simulator::{
    run_density, sample, sample_distribution, Circuit, Gate, NoiseSpec, DEFAULT_MAX_DENSITY_QUBITS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingKind {
    Angle,
    AmplitudeExact,
    Enqode,
}

impl EncodingKind {
    pub fn name(self) -> &'static str {
        match self {
            EncodingKind::Angle => "angle",
            EncodingKind::AmplitudeExact => "amplitude_exact",
            EncodingKind::Enqode => "enqode",
        }
    }

    pub fn is_amplitude(self) -> bool {
        !matches!(self, EncodingKind::Angle)
    }

    /// Feature-register width needed for `features` inputs.
    pub fn register_width(self, features: usize) -> usize {
        match self {
            EncodingKind::Angle => features,
            _ => amplitude_qubits(features),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    Canonical,
    AlternatingF,
}

impl Structure {
    pub fn name(self) -> &'static str {
        match self {
            Structure::Canonical => "canonical",
            Structure::AlternatingF => "alternating_f",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entanglement {
    Linear,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QrnnConfig {
    pub n_hidden: usize,
    pub n_feature: usize,
    pub encoding: EncodingKind,
    pub structure: Structure,
    pub ansatz_reps: usize,
    pub entanglement: Entanglement,
    pub target_index: usize,
}

impl QrnnConfig {
    /// Config for data with `features` inputs per step; the feature-register
    /// width follows from the encoding.
    pub fn for_features(
        features: usize,
        n_hidden: usize,
        encoding: EncodingKind,
        structure: Structure,
        target_index: usize,
    ) -> Result<Self> {
        let cfg = QrnnConfig {
            n_hidden,
            n_feature: encoding.register_width(features),
            encoding,
            structure,
            ansatz_reps: 1,
            entanglement: Entanglement::Full,
            target_index,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_hidden == 0 {
            return Err(Error::Config("n_hidden must be at least 1".into()));
        }
        if self.n_feature == 0 {
            return Err(Error::Config("n_feature must be at least 1".into()));
        }
        if self.ansatz_reps == 0 {
            return Err(Error::Config("ansatz_reps must be at least 1".into()));
        }
        let limit = self.outcome_limit();
        if self.target_index >= limit {
            return Err(Error::Config(format!(
                "target index {} out of range for {} encoding on {} feature qubits (limit {limit})",
                self.target_index,
                self.encoding.name(),
                self.n_feature
            )));
        }
        Ok(())
    }

    /// Checks that `features` inputs per step fit this config.
    pub fn check_features(&self, features: usize) -> Result<()> {
        let expected = self.encoding.register_width(features);
        if expected != self.n_feature {
            return Err(Error::Config(format!(
                "{} encoding of {features} features needs {expected} feature qubits, config has {}",
                self.encoding.name(),
                self.n_feature
            )));
        }
        Ok(())
    }

    fn outcome_limit(&self) -> usize {
        match self.encoding {
            EncodingKind::Angle => self.n_feature,
            _ => 1 << self.n_feature,
        }
    }

    pub fn ansatz_qubits(&self) -> usize {
        self.n_hidden + self.n_feature
    }

    pub fn width(&self) -> usize {
        match self.structure {
            Structure::Canonical => self.n_hidden + self.n_feature,
            Structure::AlternatingF => self.n_hidden + 2 * self.n_feature,
        }
    }

    pub fn param_count(&self) -> usize {
        param_count(self)
    }

    pub fn ansatz(&self) -> AnsatzTemplate {
        AnsatzTemplate {
            n_qubits: self.ansatz_qubits(),
            reps: self.ansatz_reps,
            entanglement: self.entanglement,
        }
    }
}

/// `2·(n_H + n_F)·(reps + 1)` for both structures.
pub fn param_count(config: &QrnnConfig) -> usize {
    2 * config.ansatz_qubits() * (config.ansatz_reps + 1)
}

/// Efficient-SU2 style ansatz: `reps + 1` rotation layers (RY on every qubit,
/// then RZ on every qubit) separated by CX entangling blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzTemplate {
    pub n_qubits: usize,
    pub reps: usize,
    pub entanglement: Entanglement,
}

impl AnsatzTemplate {
    pub fn param_count(&self) -> usize {
        2 * self.n_qubits * (self.reps + 1)
    }

    fn entangling_pairs(&self) -> Vec<(usize, usize)> {
        match self.entanglement {
            Entanglement::Linear => (0..self.n_qubits.saturating_sub(1))
                .map(|q| (q, q + 1))
                .collect(),
            Entanglement::Full => (0..self.n_qubits)
                .flat_map(|p| (p + 1..self.n_qubits).map(move |q| (p, q)))
                .collect(),
        }
    }

    /// Gates on local qubits `0..n_qubits`; parameters are consumed layer by
    /// layer, RY angles for every qubit before the RZ angles.
    pub fn bind(&self, params: &[f64]) -> Result<Circuit> {
        if params.len() != self.param_count() {
            return Err(Error::DimensionMismatch {
                expected: self.param_count(),
                got: params.len(),
            });
        }
        let n = self.n_qubits;
        let pairs = self.entangling_pairs();
        let mut c = Circuit::new(n);
        for (layer, chunk) in params.chunks(2 * n).enumerate() {
            if layer > 0 {
                for &(a, b) in &pairs {
                    c.push(Gate::cx(a, b))?;
                }
            }
            for q in 0..n {
                c.push(Gate::ry(q, chunk[q]))?;
            }
            for q in 0..n {
                c.push(Gate::rz(q, chunk[n + q]))?;
            }
        }
        Ok(c)
    }
}

pub fn build_ansatz(
    n_qubits: usize,
    reps: usize,
    entanglement: Entanglement,
) -> Result<AnsatzTemplate> {
    if n_qubits < 2 {
        return Err(Error::Config("ansatz needs at least two qubits".into()));
    }
    Ok(AnsatzTemplate {
        n_qubits,
        reps,
        entanglement,
    })
}

/// Turns one step's preprocessed feature vector into a feature-map circuit.
pub trait FeatureEncoder: Send + Sync {
    fn kind(&self) -> EncodingKind;
    fn n_qubits(&self) -> usize;
    fn encode(&self, x: &[f64]) -> Result<Circuit>;
}

/// One RY per feature.
#[derive(Debug, Clone)]
pub struct AngleEncoder {
    pub n_features: usize,
}

impl FeatureEncoder for AngleEncoder {
    fn kind(&self) -> EncodingKind {
        EncodingKind::Angle
    }
    fn n_qubits(&self) -> usize {
        self.n_features
    }
    fn encode(&self, x: &[f64]) -> Result<Circuit> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        angle_feature_map(x)
    }
}

/// Exact multiplexed-rotation state preparation.
#[derive(Debug, Clone)]
pub struct AmplitudeEncoder {
    pub n_qubits: usize,
}

impl FeatureEncoder for AmplitudeEncoder {
    fn kind(&self) -> EncodingKind {
        EncodingKind::AmplitudeExact
    }
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }
    fn encode(&self, x: &[f64]) -> Result<Circuit> {
        if x.len() > 1 << self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n_qubits,
                got: x.len(),
            });
        }
        let mut padded = x.to_vec();
        padded.resize(1 << self.n_qubits, 0.0);
        amplitude_qsp(&padded)
    }
}

/// Nearest-centroid approximate preparation.
#[derive(Debug, Clone)]
pub struct EnqodeEncoder {
    pub model: Arc<EnqodeModel>,
    pub refine: bool,
}

impl FeatureEncoder for EnqodeEncoder {
    fn kind(&self) -> EncodingKind {
        EncodingKind::Enqode
    }
    fn n_qubits(&self) -> usize {
        self.model.n_qubits()
    }
    fn encode(&self, x: &[f64]) -> Result<Circuit> {
        Ok(self.model.encode_sample(x, self.refine)?.circuit)
    }
}

/// Feature-map circuits for every step of one sequence. Encoding does not
/// depend on the ansatz parameters, so training encodes each sequence once.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSequence {
    pub kind: EncodingKind,
    pub steps: Vec<Circuit>,
}

pub fn encode_sequence(encoder: &dyn FeatureEncoder, seq: &[Vec<f64>]) -> Result<EncodedSequence> {
    if seq.is_empty() {
        return Err(Error::Empty("sequence"));
    }
    Ok(EncodedSequence {
        kind: encoder.kind(),
        steps: seq
            .iter()
            .map(|x| encoder.encode(x))
            .collect::<Result<_>>()?,
    })
}

fn check_encoded(config: &QrnnConfig, encoded: &EncodedSequence) -> Result<()> {
    if encoded.kind != config.encoding {
        return Err(Error::Config(format!(
            "encoder produces {} circuits but the model expects {}",
            encoded.kind.name(),
            config.encoding.name()
        )));
    }
    if encoded.steps.is_empty() {
        return Err(Error::Empty("sequence"));
    }
    for step in &encoded.steps {
        if step.n_qubits() != config.n_feature {
            return Err(Error::DimensionMismatch {
                expected: config.n_feature,
                got: step.n_qubits(),
            });
        }
    }
    Ok(())
}

/// Canonical layout: per step, feature map on F, ansatz on H∪F, reset F
/// (except after the last step). Measures F.
pub fn build_canonical_encoded(
    config: &QrnnConfig,
    params: &[f64],
    encoded: &EncodedSequence,
) -> Result<Circuit> {
    check_encoded(config, encoded)?;
    let ansatz = config.ansatz().bind(params)?;
    let (nh, nf) = (config.n_hidden, config.n_feature);
    let f: Vec<usize> = (nh..nh + nf).collect();
    let ansatz_map: Vec<usize> = (0..nh + nf).collect();
    let mut c = Circuit::new(config.width());
    let last = encoded.steps.len() - 1;
    for (t, step) in encoded.steps.iter().enumerate() {
        c.append_mapped(step, &f)?;
        c.append_mapped(&ansatz, &ansatz_map)?;
        if t < last {
            for &q in &f {
                c.push(Gate::reset(q))?;
            }
        }
    }
    c.set_measured(f)?;
    Ok(c)
}

/// Alternating layout: the next step's feature map is prepared on the idle
/// register while the ansatz acts on H plus the active register; the consumed
/// register is reset right after its ansatz block. Measures the register
/// active at the last step.
pub fn build_alternating_encoded(
    config: &QrnnConfig,
    params: &[f64],
    encoded: &EncodedSequence,
) -> Result<Circuit> {
    check_encoded(config, encoded)?;
    let ansatz = config.ansatz().bind(params)?;
    let (nh, nf) = (config.n_hidden, config.n_feature);
    let registers: [Vec<usize>; 2] = [(nh..nh + nf).collect(), (nh + nf..nh + 2 * nf).collect()];
    let hidden: Vec<usize> = (0..nh).collect();
    let mut c = Circuit::new(config.width());
    let steps = &encoded.steps;
    let last = steps.len() - 1;
    c.append_mapped(&steps[0], &registers[0])?;
    for t in 0..steps.len() {
        let active = &registers[t % 2];
        if t < last {
            c.append_mapped(&steps[t + 1], &registers[(t + 1) % 2])?;
        }
        let map: Vec<usize> = hidden.iter().chain(active.iter()).copied().collect();
        c.append_mapped(&ansatz, &map)?;
        if t < last {
            for &q in active {
                c.push(Gate::reset(q))?;
            }
        }
    }
    c.set_measured(registers[last % 2].clone())?;
    Ok(c)
}

pub fn build_encoded(
    config: &QrnnConfig,
    params: &[f64],
    encoded: &EncodedSequence,
) -> Result<Circuit> {
    match config.structure {
        Structure::Canonical => build_canonical_encoded(config, params, encoded),
        Structure::AlternatingF => build_alternating_encoded(config, params, encoded),
    }
}

fn check_encoder(config: &QrnnConfig, encoder: &dyn FeatureEncoder) -> Result<()> {
    if encoder.kind() != config.encoding || encoder.n_qubits() != config.n_feature {
        return Err(Error::Config(format!(
            "encoder ({} on {} qubits) does not match model ({} on {} qubits)",
            encoder.kind().name(),
            encoder.n_qubits(),
            config.encoding.name(),
            config.n_feature
        )));
    }
    Ok(())
}

pub fn build_canonical(
    model: &QrnnModel,
    seq: &[Vec<f64>],
    encoder: &dyn FeatureEncoder,
) -> Result<Circuit> {
    check_encoder(&model.config, encoder)?;
    build_canonical_encoded(
        &model.config,
        &model.params,
        &encode_sequence(encoder, seq)?,
    )
}

pub fn build_alternating(
    model: &QrnnModel,
    seq: &[Vec<f64>],
    encoder: &dyn FeatureEncoder,
) -> Result<Circuit> {
    check_encoder(&model.config, encoder)?;
    build_alternating_encoded(
        &model.config,
        &model.params,
        &encode_sequence(encoder, seq)?,
    )
}

/// How circuit outcome probabilities are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    /// Exact probabilities (density-matrix evolution, noise applied exactly).
    Exact,
    /// Finite-shot sampling: shots drawn from the exact distribution, or one
    /// trajectory per shot when the circuit is too wide for density evolution.
    Shots(usize),
}

/// Probability `p` that maps to the prediction, read from a distribution over
/// the measured feature register.
pub fn readout_probability(config: &QrnnConfig, dist: &[f64]) -> f64 {
    match config.encoding {
        EncodingKind::Angle => dist
            .iter()
            .enumerate()
            .filter(|(outcome, _)| (outcome >> config.target_index) & 1 == 1)
            .map(|(_, p)| p)
            .sum(),
        _ => dist[config.target_index],
    }
}

/// Outcome probability for one encoded sequence.
pub fn sequence_probability(
    config: &QrnnConfig,
    params: &[f64],
    encoded: &EncodedSequence,
    execution: Execution,
    noise: Option<&NoiseSpec>,
    seed: u64,
) -> Result<f64> {
    let circuit = build_encoded(config, params, encoded)?;
    let dist = match execution {
        Execution::Exact => run_density(&circuit, noise)?,
        Execution::Shots(shots) if circuit.n_qubits() <= DEFAULT_MAX_DENSITY_QUBITS => {
            sample_distribution(&run_density(&circuit, noise)?, shots, seed)?.frequencies()
        }
        Execution::Shots(shots) => sample(&circuit, shots, seed, noise)?.frequencies(),
    };
    Ok(readout_probability(config, &dist))
}

/// Inverse min-max mapping `y = min + p·(max − min)`, written so that both
/// endpoints are reproduced exactly.
pub fn probability_to_value(p: f64, min: f64, max: f64) -> f64 {
    (1.0 - p) * min + p * max
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QrnnModel {
    pub config: QrnnConfig,
    pub params: Vec<f64>,
    pub target_min: f64,
    pub target_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub probability: f64,
    pub value: f64,
}

impl QrnnModel {
    pub fn new(
        config: QrnnConfig,
        params: Vec<f64>,
        target_min: f64,
        target_max: f64,
    ) -> Result<Self> {
        config.validate()?;
        if params.len() != config.param_count() {
            return Err(Error::DimensionMismatch {
                expected: config.param_count(),
                got: params.len(),
            });
        }
        if !(target_max > target_min) {
            return Err(Error::DegenerateBounds {
                min: target_min,
                max: target_max,
            });
        }
        Ok(QrnnModel {
            config,
            params,
            target_min,
            target_max,
        })
    }

    pub fn predict(
        &self,
        seq: &[Vec<f64>],
        encoder: &dyn FeatureEncoder,
        execution: Execution,
        noise: Option<&NoiseSpec>,
        seed: u64,
    ) -> Result<Prediction> {
        check_encoder(&self.config, encoder)?;
        let encoded = encode_sequence(encoder, seq)?;
        let p = sequence_probability(&self.config, &self.params, &encoded, execution, noise, seed)?;
        Ok(Prediction {
            probability: p,
            value: probability_to_value(p, self.target_min, self.target_max),
        })
    }
}

/// Serialized model checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    pub config: QrnnConfig,
    pub params: Vec<f64>,
    pub target_min: f64,
    pub target_max: f64,
    pub seed: u64,
}

impl Checkpoint {
    pub fn new(model: &QrnnModel, seed: u64) -> Self {
        Checkpoint {
            schema_version: 1,
            config: model.config.clone(),
            params: model.params.clone(),
            target_min: model.target_min,
            target_max: model.target_max,
            seed,
        }
    }

    pub fn into_model(self) -> Result<QrnnModel> {
        QrnnModel::new(self.config, self.params, self.target_min, self.target_max)
    }
}
