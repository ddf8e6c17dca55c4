//! Approximate amplitude encoding: cluster the normalized data, train one
//! shallow ansatz per centroid, and encode new samples with the nearest
//! centroid's parameters, optionally refined with the stored Jacobian.

mod ansatz;
mod kmeans;

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use ansatz::EnqodeAnsatz;
pub use kmeans::{kmeans, nearest, KMeansResult};

use crate::encoding::NORM_TOLERANCE;
use crate::error::{Error, Result};
use crate::simulator::{Circuit, StateVector};
use crate::training::AdamState;

/// Damping for the one-step least-squares refinement.
pub const REFINE_DAMPING: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CentroidTraining {
    pub steps: usize,
    pub learning_rate: f64,
    /// Stop once `1 − fidelity` drops below this.
    pub tolerance: f64,
    /// Independent random initializations; the best is kept.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for CentroidTraining {
    fn default() -> Self {
        CentroidTraining {
            steps: 500,
            learning_rate: 0.05,
            tolerance: 1e-4,
            restarts: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainedCentroid {
    pub params: Vec<f64>,
    pub fidelity: f64,
    pub jacobian: Vec<Vec<Complex64>>,
    pub steps_taken: usize,
}

/// Maximizes |⟨centroid|ψ(θ)⟩|² with full-gradient Adam on parameter-shift
/// derivatives. `init`, when given, seeds the first restart.
pub fn train_centroid(
    centroid: &[f64],
    ansatz: &EnqodeAnsatz,
    cfg: &CentroidTraining,
    init: Option<&[f64]>,
) -> Result<TrainedCentroid> {
    if centroid.len() != ansatz.dim() {
        return Err(Error::DimensionMismatch {
            expected: ansatz.dim(),
            got: centroid.len(),
        });
    }
    train_to_state(&StateVector::from_real(centroid)?, ansatz, cfg, init)
}

/// [`train_centroid`] for an arbitrary (complex) target state.
pub fn train_to_state(
    target: &StateVector,
    ansatz: &EnqodeAnsatz,
    cfg: &CentroidTraining,
    init: Option<&[f64]>,
) -> Result<TrainedCentroid> {
    if target.n_qubits() != ansatz.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: ansatz.n_qubits,
            got: target.n_qubits(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(Vec<f64>, f64, usize)> = None;
    for restart in 0..cfg.restarts.max(1) {
        let mut params: Vec<f64> = match (restart, init) {
            (0, Some(p)) => p.to_vec(),
            _ => (0..ansatz.param_count())
                .map(|_| rng.random_range(-PI..PI))
                .collect(),
        };
        let mut adam = AdamState::new(params.len());
        let mut fid = ansatz.fidelity(&params, target)?;
        let mut steps = 0;
        while steps < cfg.steps && 1.0 - fid >= cfg.tolerance {
            // ascend the fidelity = descend 1 − fidelity
            let grad: Vec<f64> = ansatz
                .fidelity_gradient(&params, target)?
                .into_iter()
                .map(|g| -g)
                .collect();
            adam.step(&mut params, &grad, cfg.learning_rate)?;
            fid = ansatz.fidelity(&params, target)?;
            steps += 1;
        }
        if best.as_ref().is_none_or(|b| fid > b.1) {
            best = Some((params, fid, steps));
        }
        if 1.0 - fid < cfg.tolerance {
            break;
        }
    }
    let (params, fidelity, steps_taken) = best.expect("at least one restart");
    let jacobian = ansatz.jacobian(&params)?;
    Ok(TrainedCentroid {
        params,
        fidelity,
        jacobian,
        steps_taken,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnqodeConfig {
    /// Ansatz layers; `None` means one layer per qubit.
    pub layers: Option<usize>,
    /// Cluster count; `None` means `min(32, 2·⌈√rows⌉)`.
    pub k: Option<usize>,
    pub kmeans_iters: usize,
    pub seed: u64,
    pub refine: bool,
    pub training: CentroidTraining,
}

impl Default for EnqodeConfig {
    fn default() -> Self {
        EnqodeConfig {
            layers: None,
            k: None,
            kmeans_iters: 100,
            seed: 0,
            refine: true,
            training: CentroidTraining::default(),
        }
    }
}

pub fn default_k(rows: usize) -> usize {
    let root = (rows as f64).sqrt().ceil() as usize;
    (2 * root).min(32).min(rows).max(1)
}

/// Fitted centroids with their trained ansatz parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnqodeModel {
    pub ansatz: EnqodeAnsatz,
    pub centroids: Vec<Vec<f64>>,
    pub params: Vec<Vec<f64>>,
    pub train_fidelities: Vec<f64>,
    #[serde(skip)]
    jacobians: Vec<Vec<Vec<Complex64>>>,
}

/// Result of encoding one sample.
#[derive(Debug, Clone)]
pub struct EncodedSample {
    pub circuit: Circuit,
    pub params: Vec<f64>,
    pub centroid: usize,
    pub fidelity: f64,
}

impl EnqodeModel {
    /// Clusters `rows` (unit vectors, zero-padded to `2^n_qubits`) and trains every centroid.
    pub fn fit(rows: &[Vec<f64>], n_qubits: usize, cfg: &EnqodeConfig) -> Result<Self> {
        let ansatz = EnqodeAnsatz::new(n_qubits, cfg.layers.unwrap_or(n_qubits))?;
        if rows.is_empty() {
            return Err(Error::Empty("EnQode training rows"));
        }
        let padded: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| pad_unit(r, ansatz.dim()))
            .collect::<Result<_>>()?;
        let k = cfg.k.unwrap_or_else(|| default_k(padded.len()));
        let clusters = kmeans(&padded, k, cfg.seed, cfg.kmeans_iters)?;

        let trained: Vec<TrainedCentroid> = clusters
            .centroids
            .par_iter()
            .enumerate()
            .map(|(i, c)| {
                let mut t = cfg.training.clone();
                t.seed = cfg.training.seed.wrapping_add(i as u64);
                train_centroid(c, &ansatz, &t, None)
            })
            .collect::<Result<_>>()?;

        let mut model = EnqodeModel {
            ansatz,
            centroids: clusters.centroids,
            params: Vec::with_capacity(k),
            train_fidelities: Vec::with_capacity(k),
            jacobians: Vec::with_capacity(k),
        };
        for t in trained {
            model.params.push(t.params);
            model.train_fidelities.push(t.fidelity);
            model.jacobians.push(t.jacobian);
        }
        Ok(model)
    }

    pub fn n_qubits(&self) -> usize {
        self.ansatz.n_qubits
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Nearest-centroid encoding of `x`. With `refine`, a damped least-squares
    /// step on the stored Jacobian moves the parameters so the prepared state
    /// follows `x − centroid` to first order; the step is kept only if it does
    /// not lower the fidelity.
    pub fn encode_sample(&self, x: &[f64], refine: bool) -> Result<EncodedSample> {
        let x = pad_unit(x, self.ansatz.dim())?;
        let (centroid, _) = nearest(&self.centroids, &x);
        let target = StateVector::from_real(&x)?;
        let base = &self.params[centroid];
        let base_fid = self.ansatz.fidelity(base, &target)?;
        let mut params = base.clone();
        let mut fidelity = base_fid;
        if refine {
            let delta = self.refinement_step(centroid, &x)?;
            if delta.iter().any(|d| *d != 0.0) {
                let cand: Vec<f64> = base.iter().zip(&delta).map(|(p, d)| p + d).collect();
                let cand_fid = self.ansatz.fidelity(&cand, &target)?;
                if cand_fid >= base_fid {
                    params = cand;
                    fidelity = cand_fid;
                }
            }
        }
        Ok(EncodedSample {
            circuit: self.ansatz.circuit(&params)?,
            params,
            centroid,
            fidelity,
        })
    }

    fn refinement_step(&self, centroid: usize, x: &[f64]) -> Result<Vec<f64>> {
        let psi = self.ansatz.state(&self.params[centroid])?;
        let target = &self.centroids[centroid];
        // Align the global phase so the prepared state overlaps the centroid positively.
        let w = StateVector::from_real(target)?.inner(&psi)?;
        let phase = if w.norm() > 0.0 {
            w.conj() / w.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let jac = &self.jacobians[centroid];
        let p = jac.len();
        let dim = x.len();
        // A = [Re(phase·J); Im(phase·J)], b = [x − c; 0]
        let cols: Vec<Vec<f64>> = jac
            .iter()
            .map(|col| {
                let mut v = Vec::with_capacity(2 * dim);
                v.extend(col.iter().map(|z| (z * phase).re));
                v.extend(col.iter().map(|z| (z * phase).im));
                v
            })
            .collect();
        let mut b = vec![0.0; 2 * dim];
        for i in 0..dim {
            b[i] = x[i] - target[i];
        }
        let mut normal = vec![vec![0.0; p]; p];
        let mut rhs = vec![0.0; p];
        for a in 0..p {
            rhs[a] = dot(&cols[a], &b);
            for c in a..p {
                let v = dot(&cols[a], &cols[c]);
                normal[a][c] = v;
                normal[c][a] = v;
            }
            normal[a][a] += REFINE_DAMPING;
        }
        solve_linear(normal, rhs)
    }

    /// Mean fidelity of [`Self::encode_sample`] over `rows`.
    pub fn mean_fidelity(&self, rows: &[Vec<f64>], refine: bool) -> Result<f64> {
        if rows.is_empty() {
            return Err(Error::Empty("fidelity dataset"));
        }
        let fids: Vec<f64> = rows
            .par_iter()
            .map(|r| self.encode_sample(r, refine).map(|e| e.fidelity))
            .collect::<Result<_>>()?;
        Ok(fids.iter().sum::<f64>() / fids.len() as f64)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses a saved model and recomputes the Jacobians.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut model: EnqodeModel = serde_json::from_str(text)?;
        if model.centroids.len() != model.params.len()
            || model.centroids.len() != model.train_fidelities.len()
        {
            return Err(Error::Config(
                "EnQode model has inconsistent centroid/parameter counts".into(),
            ));
        }
        model.jacobians = model
            .params
            .iter()
            .map(|p| model.ansatz.jacobian(p))
            .collect::<Result<_>>()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn pad_unit(x: &[f64], dim: usize) -> Result<Vec<f64>> {
    if x.len() > dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm });
    }
    let mut out = x.to_vec();
    out.resize(dim, 0.0);
    Ok(out)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting for a small dense system.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::Config("singular refinement system".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}
