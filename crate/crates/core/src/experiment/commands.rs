use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use super::config::{ExperimentConfig, ModelKind};
use super::pipeline::{load_records, run_training, RunResult};
use crate::data::{compute_features, FeatureMatrix, FeatureSpec, OhlcRecord};
use crate::depth::{depth_scan, write_depth_csv};
use crate::encoding::{
    augment_amplitude_feature, normalize_l2, MinMaxScaler, Preprocessing, ScaleMode,
};
use crate::enqode::{EnqodeConfig, EnqodeModel};
use crate::error::{Error, Result};
use crate::qrnn::EncodingKind;

/// Version of the `summary.json` layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Train,
    AblatePreprocessing,
    CompareEncoding,
    DepthScan,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Train => "train",
            Command::AblatePreprocessing => "ablate-preprocessing",
            Command::CompareEncoding => "compare-encoding",
            Command::DepthScan => "depth-scan",
        }
    }

    /// Command-specific configuration requirements, checked before any compute.
    pub fn check(self, cfg: &ExperimentConfig) -> Result<()> {
        let amplitude = cfg.model.kind == ModelKind::Qrnn && cfg.model.encoding.is_amplitude();
        match self {
            Command::AblatePreprocessing if !amplitude => Err(Error::Config(
                "ablate-preprocessing needs a QRNN with an amplitude-family encoding".into(),
            )),
            Command::CompareEncoding if cfg.model.kind != ModelKind::Qrnn => Err(Error::Config(
                "compare-encoding needs model.kind = qrnn".into(),
            )),
            _ => Ok(()),
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn write_curve(path: &Path, curve: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["epoch", "loss"])?;
    for (epoch, loss) in curve.iter().enumerate() {
        w.write_record([epoch.to_string(), loss.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Curves and checkpoints for every seed, plus a JSON fragment summarizing the run.
fn write_run(dir: &Path, run: &RunResult) -> Result<serde_json::Value> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut seeds = Vec::new();
    for (result, checkpoint) in &run.seeds {
        write_curve(
            &dir.join(format!("curve_seed{}.csv", result.seed)),
            &result.curve,
        )?;
        write_json(
            &dir.join(format!("checkpoint_seed{}.json", result.seed)),
            checkpoint,
        )?;
        seeds.push(json!({
            "seed": result.seed,
            "initial_train_mse": result.curve.first(),
            "final_train_mse": result.final_train_mse,
            "test_mse": result.test_mse,
            "test_return_mse": result.test_return_mse,
        }));
    }
    Ok(json!({
        "param_count": run.param_count,
        "n_train": run.n_train,
        "n_test": run.n_test,
        "enqode_mean_fidelity": run.enqode_fidelity,
        "seeds": seeds,
        "mean_train_mse": run.mean_train_mse(),
        "mean_test_mse": run.mean_test_mse(),
    }))
}

fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn ratio(value: Option<f64>, reference: Option<f64>) -> Option<f64> {
    match (value, reference) {
        (Some(v), Some(r)) if r > 0.0 => Some(v / r),
        _ => None,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Runs `cmd` and writes its outputs into `out`. Wall time goes to
/// `timing.json` so every other file is reproducible bit for bit.
pub fn run_command(cmd: Command, cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    cmd.check(cfg)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let start = Instant::now();
    let mut summary = json!({
        "schema_version": SCHEMA_VERSION,
        "command": cmd.name(),
        "config": cfg,
    });
    match cmd {
        Command::Train => {
            let run = run_training(cfg)?;
            let part = write_run(out, &run)?;
            merge_into(&mut summary, part);
        }
        Command::AblatePreprocessing => {
            let mut rows = Vec::new();
            let mut variants = serde_json::Map::new();
            let mut reference = None;
            for mode in Preprocessing::ALL {
                let variant = ExperimentConfig {
                    preprocessing: mode,
                    ..cfg.clone()
                };
                let run = run_training(&variant)?;
                let mse = run.mean_test_mse();
                if mode == Preprocessing::None {
                    reference = mse;
                }
                variants.insert(mode.name().into(), write_run(&out.join(mode.name()), &run)?);
                rows.push(vec![
                    mode.name().to_string(),
                    opt(mse),
                    opt(ratio(mse, reference)),
                ]);
            }
            write_table(
                &out.join("table.csv"),
                &["mode", "mean_mse", "ratio"],
                &rows,
            )?;
            summary["variants"] = variants.into();
        }
        Command::CompareEncoding => {
            let noise = cfg.noise.unwrap_or_default();
            let mut rows = Vec::new();
            let mut variants = serde_json::Map::new();
            let mut reference = None;
            for noisy in [false, true] {
                for encoding in [EncodingKind::AmplitudeExact, EncodingKind::Enqode] {
                    let mut variant = cfg.clone();
                    variant.model.encoding = encoding;
                    variant.noise = noisy.then_some(noise);
                    let run = run_training(&variant)?;
                    let mse = run.mean_test_mse();
                    if !noisy && encoding == EncodingKind::AmplitudeExact {
                        reference = mse;
                    }
                    let label = if noisy { "noisy" } else { "noiseless" };
                    let name = format!("{}_{label}", encoding.name());
                    variants.insert(name.clone(), write_run(&out.join(&name), &run)?);
                    rows.push(vec![
                        encoding.name().to_string(),
                        label.to_string(),
                        opt(mse),
                        opt(ratio(mse, reference)),
                        opt(run.enqode_fidelity),
                    ]);
                }
            }
            write_table(
                &out.join("table.csv"),
                &["feature_map", "noise", "mse", "ratio", "enqode_fidelity"],
                &rows,
            )?;
            summary["variants"] = variants.into();
            summary["noise_spec"] = serde_json::to_value(noise)?;
        }
        Command::DepthScan => {
            let rows = depth_scan(&cfg.depth_scan)?;
            write_depth_csv(&out.join("depth.csv"), &rows)?;
            let records = load_records(&cfg.dataset.source, FeatureSpec::Oxford7)?;
            let fidelity = fidelity_table(
                &records,
                cfg.depth_scan.n_f_min,
                cfg.depth_scan.n_f_max,
                &cfg.enqode,
            )?;
            write_table(
                &out.join("fidelity.csv"),
                &["qubits", "features", "layers", "mean_fidelity"],
                &fidelity
                    .iter()
                    .map(|r| {
                        vec![
                            r.qubits.to_string(),
                            r.features.to_string(),
                            r.layers.to_string(),
                            r.mean_fidelity.to_string(),
                        ]
                    })
                    .collect::<Vec<_>>(),
            )?;
            summary["depth"] = serde_json::to_value(&rows)?;
            summary["fidelity"] = serde_json::to_value(&fidelity)?;
        }
    }
    write_json(&out.join("summary.json"), &summary)?;
    write_json(
        &out.join("timing.json"),
        &json!({ "wall_seconds": start.elapsed().as_secs_f64() }),
    )
}

fn merge_into(target: &mut serde_json::Value, part: serde_json::Value) {
    if let (Some(t), serde_json::Value::Object(p)) = (target.as_object_mut(), part) {
        t.extend(p);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityRow {
    pub qubits: usize,
    pub features: usize,
    pub layers: usize,
    pub mean_fidelity: f64,
}

/// Feature matrix with `2^n − 1` columns: the three-feature set for two
/// qubits, otherwise the seven-feature set, lagged as needed and truncated.
pub fn fidelity_features(records: &[OhlcRecord], n_qubits: usize) -> Result<FeatureMatrix> {
    let width = (1usize << n_qubits) - 1;
    if width == FeatureSpec::Yahoo3.width() {
        return compute_features(records, FeatureSpec::Yahoo3);
    }
    let base = compute_features(records, FeatureSpec::Oxford7)?;
    let lags = width.div_ceil(base.width()).saturating_sub(1);
    base.lagged(lags, width)
}

/// MinMax-scaled rows with a MaxMin norm column, normalized: the unit vectors
/// an amplitude encoder prepares.
pub fn amplitude_rows(matrix: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
    let scaler = MinMaxScaler::fit(&matrix.rows)?;
    let scaled: Vec<Vec<f64>> = matrix
        .rows
        .iter()
        .map(|r| scaler.transform(r, ScaleMode::MinMax))
        .collect::<Result<_>>()?;
    augment_amplitude_feature(&scaled, Preprocessing::MaxMin)?
        .iter()
        .map(|r| normalize_l2(r))
        .collect()
}

/// Mean EnQode fidelity per qubit count, with one layer per qubit unless the
/// config fixes the layer count.
pub fn fidelity_table(
    records: &[OhlcRecord],
    n_min: usize,
    n_max: usize,
    cfg: &EnqodeConfig,
) -> Result<Vec<FidelityRow>> {
    (n_min..=n_max)
        .map(|n| {
            let rows = amplitude_rows(&fidelity_features(records, n)?)?;
            let layers = cfg.layers.unwrap_or(n);
            let model = EnqodeModel::fit(
                &rows,
                n,
                &EnqodeConfig {
                    layers: Some(layers),
                    ..cfg.clone()
                },
            )?;
            Ok(FidelityRow {
                qubits: n,
                features: 1 << n,
                layers,
                mean_fidelity: model.mean_fidelity(&rows, cfg.refine)?,
            })
        })
        .collect()
}
