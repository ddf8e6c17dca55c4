use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Forecaster;
use crate::error::{Error, Result};

/// Elman RNN baseline: `h_t = tanh(V·x_t + W·h_{t−1} + b)`, `h_0 = 0`,
/// `p = logistic(U·h_T)`.
///
/// Flat parameter layout: `V` (row-major, `n_h × N`), `W` (row-major,
/// `n_h × n_h`), `b` (`n_h`), `U` (`n_h`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalRnn {
    pub n_hidden: usize,
    pub n_inputs: usize,
    pub params: Vec<f64>,
}

impl ClassicalRnn {
    pub fn param_count(n_hidden: usize, n_inputs: usize) -> usize {
        n_hidden * n_inputs + n_hidden * n_hidden + 2 * n_hidden
    }

    pub fn zeros(n_hidden: usize, n_inputs: usize) -> Self {
        ClassicalRnn {
            n_hidden,
            n_inputs,
            params: vec![0.0; Self::param_count(n_hidden, n_inputs)],
        }
    }

    /// Weights drawn uniformly from `[−scale, scale]`.
    pub fn random(n_hidden: usize, n_inputs: usize, scale: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = (0..Self::param_count(n_hidden, n_inputs))
            .map(|_| rng.random_range(-scale..=scale))
            .collect();
        ClassicalRnn {
            n_hidden,
            n_inputs,
            params,
        }
    }

    pub fn forward(&self, seq: &[Vec<f64>]) -> Result<f64> {
        self.forward_with(&self.params, seq)
    }

    fn forward_with(&self, params: &[f64], seq: &[Vec<f64>]) -> Result<f64> {
        let (nh, ni) = (self.n_hidden, self.n_inputs);
        if params.len() != Self::param_count(nh, ni) {
            return Err(Error::DimensionMismatch {
                expected: Self::param_count(nh, ni),
                got: params.len(),
            });
        }
        if seq.is_empty() {
            return Err(Error::Empty("sequence"));
        }
        let (v, rest) = params.split_at(nh * ni);
        let (w, rest) = rest.split_at(nh * nh);
        let (b, u) = rest.split_at(nh);
        let mut h = vec![0.0; nh];
        let mut next = vec![0.0; nh];
        for x in seq {
            if x.len() != ni {
                return Err(Error::DimensionMismatch {
                    expected: ni,
                    got: x.len(),
                });
            }
            for (i, out) in next.iter_mut().enumerate() {
                let mut a = b[i];
                a += v[i * ni..(i + 1) * ni]
                    .iter()
                    .zip(x)
                    .map(|(p, q)| p * q)
                    .sum::<f64>();
                a += w[i * nh..(i + 1) * nh]
                    .iter()
                    .zip(&h)
                    .map(|(p, q)| p * q)
                    .sum::<f64>();
                *out = a.tanh();
            }
            std::mem::swap(&mut h, &mut next);
        }
        let z: f64 = u.iter().zip(&h).map(|(p, q)| p * q).sum();
        Ok(1.0 / (1.0 + (-z).exp()))
    }
}

impl Forecaster for ClassicalRnn {
    type Input = Vec<Vec<f64>>;

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn set_params(&mut self, params: Vec<f64>) {
        self.params = params;
    }

    fn probability(&self, params: &[f64], input: &Vec<Vec<f64>>, _seed: u64) -> Result<f64> {
        self.forward_with(params, input)
    }
}
