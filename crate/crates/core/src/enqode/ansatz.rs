use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::{fidelity, Circuit, Gate, StateVector};

/// Shallow state-preparation ansatz:
///
/// ```text
/// RX(−π/2) on every qubit
/// repeat `layers` times: RZ(θ[ℓ][q]) on every qubit, then CY(q → q+1) for q = 0..n−2
/// RX(−π/2) then RY(−π/2) on every qubit
/// ```
///
/// Parameters are indexed layer-major: `θ[ℓ·n + q]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnqodeAnsatz {
    pub n_qubits: usize,
    pub layers: usize,
}

impl EnqodeAnsatz {
    pub fn new(n_qubits: usize, layers: usize) -> Result<Self> {
        if n_qubits == 0 || layers == 0 {
            return Err(Error::Config(format!(
                "ansatz needs at least one qubit and one layer (got {n_qubits} qubits, {layers} layers)"
            )));
        }
        Ok(EnqodeAnsatz { n_qubits, layers })
    }

    pub fn param_count(&self) -> usize {
        self.n_qubits * self.layers
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn circuit(&self, params: &[f64]) -> Result<Circuit> {
        self.check_len(params)?;
        let n = self.n_qubits;
        let mut c = Circuit::new(n);
        for q in 0..n {
            c.push(Gate::rx(q, -FRAC_PI_2))?;
        }
        for layer in params.chunks(n) {
            for (q, &theta) in layer.iter().enumerate() {
                c.push(Gate::rz(q, theta))?;
            }
            for q in 0..n.saturating_sub(1) {
                c.push(Gate::cy(q, q + 1))?;
            }
        }
        for q in 0..n {
            c.push(Gate::rx(q, -FRAC_PI_2))?;
        }
        for q in 0..n {
            c.push(Gate::ry(q, -FRAC_PI_2))?;
        }
        Ok(c)
    }

    pub fn state(&self, params: &[f64]) -> Result<StateVector> {
        self.circuit(params)?.statevector()
    }

    /// ∂ψ/∂θ_k for every parameter. Since RZ(θ ± π) = RZ(θ)·(∓iZ), the shift
    /// rule `[ψ(θ + π) − ψ(θ − π)] / 4` is exact.
    pub fn jacobian(&self, params: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        self.check_len(params)?;
        let mut shifted = params.to_vec();
        (0..params.len())
            .map(|k| {
                shifted[k] = params[k] + PI;
                let plus = self.state(&shifted)?;
                shifted[k] = params[k] - PI;
                let minus = self.state(&shifted)?;
                shifted[k] = params[k];
                Ok(plus
                    .amplitudes()
                    .iter()
                    .zip(minus.amplitudes())
                    .map(|(a, b)| (a - b) * 0.25)
                    .collect())
            })
            .collect()
    }

    /// |⟨target|ψ(θ)⟩|².
    pub fn fidelity(&self, params: &[f64], target: &StateVector) -> Result<f64> {
        fidelity(&self.state(params)?, target)
    }

    /// Parameter-shift gradient of the fidelity: `[f(θ + π/2) − f(θ − π/2)] / 2`.
    pub fn fidelity_gradient(&self, params: &[f64], target: &StateVector) -> Result<Vec<f64>> {
        self.check_len(params)?;
        let mut shifted = params.to_vec();
        (0..params.len())
            .map(|k| {
                shifted[k] = params[k] + FRAC_PI_2;
                let plus = self.fidelity(&shifted, target)?;
                shifted[k] = params[k] - FRAC_PI_2;
                let minus = self.fidelity(&shifted, target)?;
                shifted[k] = params[k];
                Ok((plus - minus) / 2.0)
            })
            .collect()
    }

    fn check_len(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::DimensionMismatch {
                expected: self.param_count(),
                got: params.len(),
            });
        }
        Ok(())
    }
}
