use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bias-corrected Adam state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        AdamState {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One in-place update of `params` along `-grad`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) -> Result<()> {
        if grad.len() != params.len() || self.m.len() != params.len() {
            return Err(Error::DimensionMismatch {
                expected: params.len(),
                got: if grad.len() != params.len() {
                    grad.len()
                } else {
                    self.m.len()
                },
            });
        }
        self.t += 1;
        let t = self.t as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

/// Functional form of [`AdamState::step`].
pub fn adam_step(
    state: &AdamState,
    grad: &[f64],
    params: &[f64],
    lr: f64,
) -> Result<(Vec<f64>, AdamState)> {
    let mut state = state.clone();
    let mut params = params.to_vec();
    state.step(&mut params, grad, lr)?;
    Ok((params, state))
}

/// Two-point simultaneous-perturbation gradient estimate with a Rademacher
/// direction Δ: `[L(θ + cΔ) − L(θ − cΔ)] / (2c) · Δ` (Δ⁻¹ = Δ for ±1 entries).
/// Calls `loss` exactly twice.
pub fn spsa_gradient<F, R>(mut loss: F, params: &[f64], c: f64, rng: &mut R) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
    R: Rng + ?Sized,
{
    if !(c > 0.0) {
        return Err(Error::Config(format!(
            "SPSA step must be positive, got {c}"
        )));
    }
    let delta: Vec<f64> = (0..params.len())
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let plus: Vec<f64> = params.iter().zip(&delta).map(|(p, d)| p + c * d).collect();
    let minus: Vec<f64> = params.iter().zip(&delta).map(|(p, d)| p - c * d).collect();
    let diff = (loss(&plus)? - loss(&minus)?) / (2.0 * c);
    Ok(delta.iter().map(|d| diff * d).collect())
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let (p, _) = adam_step(&AdamState::new(2), &[0.0, 0.0], &[1.0, -2.0], 0.03).unwrap();
        assert_eq!(p, vec![1.0, -2.0]);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let (p, _) = adam_step(&AdamState::new(1), &[1.0], &[0.0], 0.03).unwrap();
        // m̂ = 1, v̂ = 1 → Δ = 0.03 / (1 + 1e-8)
        assert!((p[0] + 0.03 / (1.0 + 1e-8)).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch() {
        assert!(adam_step(&AdamState::new(2), &[1.0], &[0.0, 0.0], 0.1).is_err());
    }

    #[test]
    fn spsa_constant_loss_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = spsa_gradient(|_| Ok(3.0), &[0.1, 0.2, 0.3], 1e-3, &mut rng).unwrap();
        assert_eq!(g, vec![0.0; 3]);
    }

    #[test]
    fn spsa_exact_in_one_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let g = spsa_gradient(|p| Ok(2.5 * p[0]), &[0.7], 1e-3, &mut rng).unwrap();
            assert!((g[0] - 2.5).abs() < 1e-9);
        }
    }

    #[test]
    fn spsa_calls_loss_twice() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut calls = 0;
        spsa_gradient(
            |_| {
                calls += 1;
                Ok(0.0)
            },
            &[0.0; 4],
            0.01,
            &mut rng,
        )
        .unwrap();
        assert_eq!(calls, 2);
    }

    #[test]
    fn spsa_rejects_nonpositive_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(spsa_gradient(|_| Ok(0.0), &[0.0], 0.0, &mut rng).is_err());
    }
}
