use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Direction of a min-max scaling. `MaxMin` is the reflection `1 − MinMax`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    MinMax,
    MaxMin,
}

/// Per-feature bounds fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl MinMaxScaler {
    /// Fits bounds over `rows`. A constant column is an error naming the column.
    pub fn fit<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or(Error::Empty("training matrix"))?
            .as_ref();
        let width = first.len();
        if width == 0 {
            return Err(Error::Empty("feature vector"));
        }
        let mut mins = vec![f64::INFINITY; width];
        let mut maxs = vec![f64::NEG_INFINITY; width];
        for row in rows {
            let row = row.as_ref();
            if row.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    got: row.len(),
                });
            }
            for (i, &v) in row.iter().enumerate() {
                mins[i] = mins[i].min(v);
                maxs[i] = maxs[i].max(v);
            }
        }
        let scaler = MinMaxScaler { mins, maxs };
        scaler.check_nondegenerate()?;
        Ok(scaler)
    }

    pub fn from_bounds(mins: Vec<f64>, maxs: Vec<f64>) -> Result<Self> {
        if mins.len() != maxs.len() {
            return Err(Error::DimensionMismatch {
                expected: mins.len(),
                got: maxs.len(),
            });
        }
        let scaler = MinMaxScaler { mins, maxs };
        scaler.check_nondegenerate()?;
        Ok(scaler)
    }

    fn check_nondegenerate(&self) -> Result<()> {
        for (index, (&lo, &hi)) in self.mins.iter().zip(&self.maxs).enumerate() {
            if !(hi > lo) {
                return Err(Error::ConstantFeature { index, value: lo });
            }
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.mins.len()
    }

    pub fn min(&self, feature: usize) -> f64 {
        self.mins[feature]
    }

    pub fn max(&self, feature: usize) -> f64 {
        self.maxs[feature]
    }

    pub fn transform(&self, x: &[f64], mode: ScaleMode) -> Result<Vec<f64>> {
        if x.len() != self.width() {
            return Err(Error::DimensionMismatch {
                expected: self.width(),
                got: x.len(),
            });
        }
        Ok(x.iter()
            .enumerate()
            .map(|(i, &v)| {
                let s = (v - self.mins[i]) / (self.maxs[i] - self.mins[i]);
                match mode {
                    ScaleMode::MinMax => s,
                    ScaleMode::MaxMin => 1.0 - s,
                }
            })
            .collect())
    }

    pub fn inverse(&self, scaled: &[f64], mode: ScaleMode) -> Result<Vec<f64>> {
        if scaled.len() != self.width() {
            return Err(Error::DimensionMismatch {
                expected: self.width(),
                got: scaled.len(),
            });
        }
        Ok(scaled
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let s = match mode {
                    ScaleMode::MinMax => s,
                    ScaleMode::MaxMin => 1.0 - s,
                };
                self.mins[i] + s * (self.maxs[i] - self.mins[i])
            })
            .collect())
    }
}

/// Fits on `rows` and scales every row with `mode`.
pub fn fit_scaler<R: AsRef<[f64]>>(rows: &[R]) -> Result<MinMaxScaler> {
    MinMaxScaler::fit(rows)
}

pub fn apply_scaler(scaler: &MinMaxScaler, x: &[f64], mode: ScaleMode) -> Result<Vec<f64>> {
    scaler.transform(x, mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(values: &[f64]) -> Vec<Vec<f64>> {
        values.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn midpoint_examples() {
        let s = fit_scaler(&column(&[2.0, 4.0, 6.0])).unwrap();
        assert_eq!(
            apply_scaler(&s, &[4.0], ScaleMode::MinMax).unwrap(),
            vec![0.5]
        );
        assert_eq!(
            apply_scaler(&s, &[4.0], ScaleMode::MaxMin).unwrap(),
            vec![0.5]
        );
    }

    #[test]
    fn endpoint_examples() {
        let s = fit_scaler(&column(&[0.0, 10.0])).unwrap();
        assert_eq!(s.transform(&[10.0], ScaleMode::MinMax).unwrap(), vec![1.0]);
        assert_eq!(s.transform(&[10.0], ScaleMode::MaxMin).unwrap(), vec![0.0]);
    }

    #[test]
    fn constant_feature_names_its_index() {
        let rows = vec![vec![1.0, 3.0], vec![2.0, 3.0]];
        match fit_scaler(&rows) {
            Err(Error::ConstantFeature { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_matrix_errors() {
        let rows: Vec<Vec<f64>> = vec![];
        assert!(matches!(fit_scaler(&rows), Err(Error::Empty(_))));
    }
}
