//! Classical preprocessing and circuit-level feature maps.

mod qsp;
mod scaler;

use serde::{Deserialize, Serialize};

pub use qsp::{amplitude_qsp, NORM_TOLERANCE};
pub use scaler::{apply_scaler, fit_scaler, MinMaxScaler, ScaleMode};

use crate::error::{Error, Result};
use crate::simulator::{Circuit, Gate};

/// How the appended pre-normalization norm column is scaled, if at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preprocessing {
    None,
    MinMax,
    MaxMin,
}

impl Preprocessing {
    pub const ALL: [Preprocessing; 3] = [
        Preprocessing::None,
        Preprocessing::MinMax,
        Preprocessing::MaxMin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preprocessing::None => "none",
            Preprocessing::MinMax => "min_max",
            Preprocessing::MaxMin => "max_min",
        }
    }

    fn scale_mode(self) -> Option<ScaleMode> {
        match self {
            Preprocessing::None => None,
            Preprocessing::MinMax => Some(ScaleMode::MinMax),
            Preprocessing::MaxMin => Some(ScaleMode::MaxMin),
        }
    }
}

/// Appends the Euclidean norm of an (already MinMax-scaled) row as an extra
/// feature, then scales that column with bounds fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeAugmenter {
    mode: Preprocessing,
    norm_scaler: Option<MinMaxScaler>,
}

impl AmplitudeAugmenter {
    pub fn fit<R: AsRef<[f64]>>(train_scaled: &[R], mode: Preprocessing) -> Result<Self> {
        if train_scaled.is_empty() {
            return Err(Error::Empty("matrix to augment"));
        }
        let norm_scaler = match mode {
            Preprocessing::None => None,
            _ => {
                let norms: Vec<[f64; 1]> =
                    train_scaled.iter().map(|r| [l2_norm(r.as_ref())]).collect();
                Some(MinMaxScaler::fit(&norms)?)
            }
        };
        Ok(AmplitudeAugmenter { mode, norm_scaler })
    }

    pub fn mode(&self) -> Preprocessing {
        self.mode
    }

    /// Output width for an input of `width` features.
    pub fn output_width(&self, width: usize) -> usize {
        match self.mode {
            Preprocessing::None => width,
            _ => width + 1,
        }
    }

    pub fn apply(&self, row: &[f64]) -> Result<Vec<f64>> {
        let (Some(scaler), Some(mode)) = (&self.norm_scaler, self.mode.scale_mode()) else {
            return Ok(row.to_vec());
        };
        let mut out = row.to_vec();
        out.push(scaler.transform(&[l2_norm(row)], mode)?[0]);
        Ok(out)
    }
}

/// Augments every row of `matrix`, fitting the norm-column scaler on `matrix` itself.
pub fn augment_amplitude_feature<R: AsRef<[f64]>>(
    matrix: &[R],
    mode: Preprocessing,
) -> Result<Vec<Vec<f64>>> {
    let aug = AmplitudeAugmenter::fit(matrix, mode)?;
    matrix.iter().map(|r| aug.apply(r.as_ref())).collect()
}

pub(crate) fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `x / ‖x‖₂`; the zero vector has no amplitude encoding.
pub fn normalize_l2(x: &[f64]) -> Result<Vec<f64>> {
    let norm = l2_norm(x);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroNorm);
    }
    Ok(x.iter().map(|v| v / norm).collect())
}

/// One RY(x̂_i) on qubit i. Values outside [0, 1] are encoded as given with a warning.
pub fn angle_feature_map(scaled: &[f64]) -> Result<Circuit> {
    if scaled.is_empty() {
        return Err(Error::Empty("feature vector"));
    }
    if let Some(v) = scaled.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        log::warn!("angle feature {v} lies outside the fitted [0, 1] range; encoding as-is");
    }
    Circuit::from_gates(
        scaled.len(),
        scaled.iter().enumerate().map(|(q, &v)| Gate::ry(q, v)),
    )
}

/// Number of qubits needed to amplitude-encode `features` values (at least one).
pub fn amplitude_qubits(features: usize) -> usize {
    features.next_power_of_two().max(2).trailing_zeros() as usize
}
