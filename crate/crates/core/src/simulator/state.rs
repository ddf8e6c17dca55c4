use num_complex::Complex64;

use super::gate::{Gate, GateKind, Matrix2};
use crate::error::{Error, Result};

/// Pure state of `n_qubits` qubits. Qubit `q` is bit `q` of the basis index
/// (qubit 0 is the least-significant bit).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// |0…0⟩ on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        StateVector {
            n_qubits,
            amplitudes,
        }
    }

    /// Wraps raw amplitudes; the length must be a power of two. No normalization check.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: len.max(1).next_power_of_two(),
                got: len,
            });
        }
        Ok(StateVector {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    /// Real amplitude vector, zero-padded up to the next power of two.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("amplitude vector"));
        }
        let dim = values.len().next_power_of_two().max(2);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        for (a, &v) in amplitudes.iter_mut().zip(values) {
            *a = Complex64::new(v, 0.0);
        }
        Self::from_amplitudes(amplitudes)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Applies a unitary gate in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        for &q in gate.qubits() {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    width: self.n_qubits,
                });
            }
        }
        if gate.kind().is_rotation() && gate.angle().is_none() {
            return Err(Error::MissingAngle(gate.kind().name()));
        }
        let matrix = gate.matrix().ok_or(Error::ResetInUnitary)?;
        apply_gate_matrix(&mut self.amplitudes, gate, &matrix);
        Ok(())
    }

    /// Distribution over the basis states of `qubits`; outcome bit `j` is `qubits[j]`.
    pub fn marginal(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        for &q in qubits {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    width: self.n_qubits,
                });
            }
        }
        let mut dist = vec![0.0; 1 << qubits.len()];
        for (index, amp) in self.amplitudes.iter().enumerate() {
            dist[gather_bits(index, qubits)] += amp.norm_sqr();
        }
        Ok(dist)
    }
}

/// Applies `gate` as a state-vector operation using `matrix` as its (target) block.
pub(crate) fn apply_gate_matrix(amps: &mut [Complex64], gate: &Gate, matrix: &Matrix2) {
    let qs = gate.qubits();
    match gate.kind() {
        GateKind::Cx | GateKind::Cy | GateKind::Cz => apply_controlled(amps, qs[0], qs[1], matrix),
        GateKind::Rz => apply_diagonal(amps, qs[0], matrix[0][0], matrix[1][1]),
        _ => apply_single(amps, qs[0], matrix),
    }
}

pub(crate) fn apply_single(amps: &mut [Complex64], q: usize, m: &Matrix2) {
    let stride = 1usize << q;
    for base in (0..amps.len()).step_by(stride << 1) {
        for i in base..base + stride {
            let a0 = amps[i];
            let a1 = amps[i + stride];
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[i + stride] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

fn apply_diagonal(amps: &mut [Complex64], q: usize, d0: Complex64, d1: Complex64) {
    let bit = 1usize << q;
    for (i, a) in amps.iter_mut().enumerate() {
        *a *= if i & bit == 0 { d0 } else { d1 };
    }
}

pub(crate) fn apply_controlled(amps: &mut [Complex64], control: usize, target: usize, m: &Matrix2) {
    let cbit = 1usize << control;
    let tbit = 1usize << target;
    for i in 0..amps.len() {
        if i & cbit != 0 && i & tbit == 0 {
            let j = i | tbit;
            let a0 = amps[i];
            let a1 = amps[j];
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[j] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

/// Packs bits `qubits[j]` of `index` into bit `j` of the result.
pub(crate) fn gather_bits(index: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &q)| acc | (((index >> q) & 1) << j))
}

/// |⟨a|b⟩|² for two states of equal width.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().clamp(0.0, 1.0))
}

/// Applies `gate` to a copy of `state`.
pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn probs(s: &StateVector) -> Vec<f64> {
        s.probabilities()
    }

    #[test]
    fn ry_pi_flips_zero_to_one() {
        let s = apply_gate(&StateVector::zero(1), &Gate::ry(0, PI)).unwrap();
        let p = probs(&s);
        assert!(p[0].abs() < 1e-15 && (p[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rz_leaves_zero_probabilities_unchanged() {
        let s = apply_gate(&StateVector::zero(1), &Gate::rz(0, 1.234)).unwrap();
        assert_eq!(probs(&s), vec![1.0, 0.0]);
    }

    #[test]
    fn cy_with_set_control_flips_target() {
        // control qubit 0 in |1>, target qubit 1 in |0>: index 0b01.
        let mut s = StateVector::zero(2);
        s.apply(&Gate::x(0)).unwrap();
        s.apply(&Gate::cy(0, 1)).unwrap();
        // By hand: CY|1,0> = i|1,1>, i.e. amplitude i at index 0b11.
        assert!((s.amplitudes()[3] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((s.marginal(&[1]).unwrap()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cy_with_clear_control_is_identity() {
        let mut s = StateVector::zero(2);
        s.apply(&Gate::cy(0, 1)).unwrap();
        assert_eq!(s, StateVector::zero(2));
    }

    #[test]
    fn fidelity_examples() {
        let zero = StateVector::zero(1);
        let one = apply_gate(&zero, &Gate::x(0)).unwrap();
        let plus = apply_gate(&zero, &Gate::h(0)).unwrap();
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-15);
        assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            fidelity(&zero, &StateVector::zero(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn out_of_range_gate_is_rejected() {
        let mut s = StateVector::zero(2);
        assert!(matches!(
            s.apply(&Gate::cx(0, 2)),
            Err(Error::QubitOutOfRange { index: 2, width: 2 })
        ));
        assert!(matches!(
            s.apply(&Gate::reset(0)),
            Err(Error::ResetInUnitary)
        ));
    }

    #[test]
    fn deserialized_rotation_without_angle_errors() {
        let g: Gate = serde_json::from_str(r#"{"kind":"RY","qubits":[0,0],"angle":null}"#).unwrap();
        let mut s = StateVector::zero(1);
        assert!(matches!(s.apply(&g), Err(Error::MissingAngle("RY"))));
    }

    #[test]
    fn marginal_orders_bits_by_requested_qubits() {
        // |q2 q1 q0> = |1 0 0>
        let mut s = StateVector::zero(3);
        s.apply(&Gate::x(2)).unwrap();
        assert_eq!(s.marginal(&[2, 0]).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(s.marginal(&[0, 2]).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
    }
}
