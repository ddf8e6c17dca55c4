use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::data::{FeatureSpec, SyntheticSpec};
use crate::depth::ScanConfig;
use crate::encoding::Preprocessing;
use crate::enqode::EnqodeConfig;
use crate::error::{Error, Result};
use crate::qrnn::{EncodingKind, Entanglement, Structure};
use crate::simulator::NoiseSpec;
use crate::training::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Synthetic {
        seed: u64,
        n_days: usize,
        #[serde(default)]
        params: SyntheticSpec,
    },
    Csv {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub source: DataSource,
    pub features: FeatureSpec,
    pub window: usize,
    pub test_ratio: f64,
    pub target_index: usize,
    /// Drop test windows whose inputs overlap training targets.
    pub purge_overlap: bool,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            source: DataSource::Synthetic {
                seed: 0,
                n_days: 260,
                params: SyntheticSpec::default(),
            },
            features: FeatureSpec::Yahoo3,
            window: 8,
            test_ratio: 0.2,
            target_index: 0,
            purge_overlap: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Qrnn,
    Classical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub encoding: EncodingKind,
    pub structure: Structure,
    pub n_hidden: usize,
    pub ansatz_reps: usize,
    pub entanglement: Entanglement,
    /// Half-width of the uniform initial-parameter distribution.
    pub init_scale: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            kind: ModelKind::Qrnn,
            encoding: EncodingKind::AmplitudeExact,
            structure: Structure::Canonical,
            n_hidden: 3,
            ansatz_reps: 1,
            entanglement: Entanglement::Full,
            init_scale: std::f64::consts::PI,
        }
    }
}

/// One JSON document describing an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub model: ModelConfig,
    pub preprocessing: Preprocessing,
    pub training: TrainConfig,
    pub noise: Option<NoiseSpec>,
    pub enqode: EnqodeConfig,
    pub depth_scan: ScanConfig,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetConfig::default(),
            model: ModelConfig::default(),
            preprocessing: Preprocessing::MaxMin,
            training: TrainConfig::default(),
            noise: None,
            enqode: EnqodeConfig::default(),
            depth_scan: ScanConfig::default(),
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let d = &self.dataset;
        match &d.source {
            DataSource::Csv { path } => {
                if !path.is_file() {
                    return Err(Error::Config(format!(
                        "data file {} does not exist",
                        path.display()
                    )));
                }
            }
            DataSource::Synthetic { n_days, params, .. } => {
                params.validate()?;
                if *n_days < d.window + 2 {
                    return Err(Error::Config(format!(
                        "synthetic n_days = {n_days} is too small for window {}",
                        d.window
                    )));
                }
            }
        }
        if d.window == 0 {
            return Err(Error::Config("dataset.window must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&d.test_ratio) {
            return Err(Error::Config(format!(
                "dataset.test_ratio must lie in [0, 1), got {}",
                d.test_ratio
            )));
        }
        if d.target_index >= d.features.width() {
            return Err(Error::Config(format!(
                "dataset.target_index {} out of range for {} ({} features)",
                d.target_index,
                d.features.name(),
                d.features.width()
            )));
        }
        let m = &self.model;
        if m.n_hidden == 0 || m.ansatz_reps == 0 {
            return Err(Error::Config(
                "model.n_hidden and model.ansatz_reps must be at least 1".into(),
            ));
        }
        if !(m.init_scale >= 0.0) {
            return Err(Error::Config(
                "model.init_scale must be non-negative".into(),
            ));
        }
        self.training.validate()?;
        if self.training.seeds.is_empty() {
            return Err(Error::Config("training.seeds must not be empty".into()));
        }
        if let Some(n) = &self.noise {
            n.validate()?;
        }
        if self.enqode.layers == Some(0) || self.enqode.k == Some(0) {
            return Err(Error::Config(
                "enqode.layers and enqode.k must be at least 1".into(),
            ));
        }
        self.depth_scan.validate()
    }
}

/// Sets `path` (dot-separated) in a JSON tree. The value is parsed as JSON and
/// falls back to a plain string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment.split_once('=').ok_or_else(|| {
        Error::Config(format!(
            "override `{assignment}` is not of the form key=value"
        ))
    })?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!(
            "override path `{path}` has an empty segment"
        )));
    }
    let mut node = root;
    for key in &keys[..keys.len() - 1] {
        if !node.is_object() {
            *node = Value::Object(Default::default());
        }
        node = node
            .as_object_mut()
            .expect("object")
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
    }
    match node {
        Value::Object(map) => {
            map.insert(keys[keys.len() - 1].to_string(), value);
            Ok(())
        }
        _ => Err(Error::Config(format!(
            "override path `{path}` crosses a non-object value"
        ))),
    }
}

/// Reads the config file (if any), applies overrides and validates. Missing
/// fields take their defaults; unknown fields are rejected.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut tree = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| {
                Error::Config(format!("config {} is not valid JSON: {e}", p.display()))
            })?
        }
        None => Value::Object(Default::default()),
    };
    // Start from the defaults so overrides can reach into unset sections.
    let mut merged = serde_json::to_value(ExperimentConfig::default())?;
    merge(&mut merged, std::mem::take(&mut tree));
    for o in overrides {
        apply_override(&mut merged, o)?;
    }
    let cfg: ExperimentConfig =
        serde_json::from_value(merged).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Recursive object merge; `patch` wins. Enum-valued sections (externally
/// tagged objects with a different tag) are replaced wholesale.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            let replace = p.len() == 1 && b.len() == 1 && p.keys().next() != b.keys().next();
            if replace {
                *b = p;
                return;
            }
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
