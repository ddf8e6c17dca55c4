//! Exact outcome distributions for circuits with mid-circuit resets.
//!
//! Two engines are provided. [`run_exact`] keeps a single pure state and models
//! each reset by retiring the qubit and routing later gates to a fresh |0⟩
//! ancilla, so the width grows by one per reset. [`run_density`] evolves the
//! vectorized density matrix with the same state-vector kernel (`U` on the row
//! qubits, `U*` on the column qubits) and supports depolarizing noise exactly;
//! its width is twice the live register and does not grow with resets.

use num_complex::Complex64;

use super::circuit::Circuit;
use super::gate::{conj, GateKind};
use super::noise::NoiseSpec;
use super::state::{apply_gate_matrix, gather_bits, StateVector};
use crate::error::{Error, Result};

/// Default cap on the purified register width.
pub const DEFAULT_MAX_PURIFIED_WIDTH: usize = 24;
/// Default cap on the live register width for the density engine (2n ≤ 26).
pub const DEFAULT_MAX_DENSITY_QUBITS: usize = 13;

/// Probabilities below this are floating-point dust and are zeroed.
pub const PROBABILITY_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactLimits {
    pub max_purified_width: usize,
    pub max_density_qubits: usize,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits {
            max_purified_width: DEFAULT_MAX_PURIFIED_WIDTH,
            max_density_qubits: DEFAULT_MAX_DENSITY_QUBITS,
        }
    }
}

/// Exact distribution over `circuit.measured()` using fresh-qubit purification.
pub fn run_exact(circuit: &Circuit) -> Result<Vec<f64>> {
    run_exact_with(circuit, &ExactLimits::default())
}

pub fn run_exact_with(circuit: &Circuit, limits: &ExactLimits) -> Result<Vec<f64>> {
    if circuit.measured().is_empty() {
        return Err(Error::NothingMeasured);
    }
    let resets = circuit.count_kind(GateKind::Reset);
    let width = circuit.n_qubits() + resets;
    if width > limits.max_purified_width {
        return Err(Error::WidthExceeded {
            required: width,
            max: limits.max_purified_width,
        });
    }

    // logical qubit -> physical slot in the purified register
    let mut slot: Vec<usize> = (0..circuit.n_qubits()).collect();
    let mut next_fresh = circuit.n_qubits();
    let mut state = StateVector::zero(width);
    for gate in circuit.gates() {
        if gate.kind() == GateKind::Reset {
            slot[gate.qubits()[0]] = next_fresh;
            next_fresh += 1;
            continue;
        }
        state.apply(&gate.remap(|q| slot[q]))?;
    }
    let physical: Vec<usize> = circuit.measured().iter().map(|&q| slot[q]).collect();
    Ok(clean_distribution(state.marginal(&physical)?))
}

/// Exact distribution over `circuit.measured()` by density-matrix evolution,
/// optionally with a depolarizing channel after every unitary gate.
pub fn run_density(circuit: &Circuit, noise: Option<&NoiseSpec>) -> Result<Vec<f64>> {
    run_density_with(circuit, noise, &ExactLimits::default())
}

pub fn run_density_with(
    circuit: &Circuit,
    noise: Option<&NoiseSpec>,
    limits: &ExactLimits,
) -> Result<Vec<f64>> {
    if circuit.measured().is_empty() {
        return Err(Error::NothingMeasured);
    }
    if let Some(n) = noise {
        n.validate()?;
    }
    let mut rho = DensityMatrix::zero(circuit.n_qubits(), limits)?;
    for gate in circuit.gates() {
        if gate.kind() == GateKind::Reset {
            rho.reset(gate.qubits()[0]);
            continue;
        }
        rho.apply(gate)?;
        if let Some(noise) = noise {
            let p = noise.probability_for(gate.kind());
            if p > 0.0 {
                rho.depolarize(gate.qubits(), p);
            }
        }
    }
    rho.marginal(circuit.measured())
}

/// Vectorized density matrix: entry (row, col) lives at `row | col << n`.
struct DensityMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    fn zero(n: usize, limits: &ExactLimits) -> Result<Self> {
        if n > limits.max_density_qubits {
            return Err(Error::WidthExceeded {
                required: n,
                max: limits.max_density_qubits,
            });
        }
        let mut entries = vec![Complex64::new(0.0, 0.0); 1 << (2 * n)];
        entries[0] = Complex64::new(1.0, 0.0);
        Ok(DensityMatrix { n, entries })
    }

    fn apply(&mut self, gate: &super::gate::Gate) -> Result<()> {
        for &q in gate.qubits() {
            if q >= self.n {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    width: self.n,
                });
            }
        }
        if gate.kind().is_rotation() && gate.angle().is_none() {
            return Err(Error::MissingAngle(gate.kind().name()));
        }
        let m = gate.matrix().ok_or(Error::ResetInUnitary)?;
        apply_gate_matrix(&mut self.entries, gate, &m);
        let n = self.n;
        apply_gate_matrix(&mut self.entries, &gate.remap(|q| q + n), &conj(&m));
        Ok(())
    }

    /// ρ → |0⟩⟨0|_q ⊗ Tr_q ρ
    fn reset(&mut self, q: usize) {
        let r = 1usize << q;
        let c = 1usize << (q + self.n);
        for idx in 0..self.entries.len() {
            if idx & (r | c) == 0 {
                let folded = self.entries[idx] + self.entries[idx | r | c];
                self.entries[idx] = folded;
                self.entries[idx | r] = Complex64::new(0.0, 0.0);
                self.entries[idx | c] = Complex64::new(0.0, 0.0);
                self.entries[idx | r | c] = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// ρ → I/2 ⊗ Tr_q ρ
    fn fully_mix(&mut self, q: usize) {
        let r = 1usize << q;
        let c = 1usize << (q + self.n);
        let zero = Complex64::new(0.0, 0.0);
        for idx in 0..self.entries.len() {
            if idx & (r | c) == 0 {
                let half = (self.entries[idx] + self.entries[idx | r | c]) * 0.5;
                self.entries[idx] = half;
                self.entries[idx | r | c] = half;
                self.entries[idx | r] = zero;
                self.entries[idx | c] = zero;
            }
        }
    }

    /// Depolarizing channel with total error probability `p` spread uniformly over
    /// the non-identity Paulis on `qubits`. With d = 4^k Paulis,
    /// ρ → (1 − p·d/(d−1))·ρ + p·d/(d−1)·(I/2^k ⊗ Tr ρ).
    fn depolarize(&mut self, qubits: &[usize], p: f64) {
        let d = (1usize << (2 * qubits.len())) as f64;
        let w = p * d / (d - 1.0);
        let original = self.entries.clone();
        for &q in qubits {
            self.fully_mix(q);
        }
        for (e, o) in self.entries.iter_mut().zip(&original) {
            *e = *o * (1.0 - w) + *e * w;
        }
    }

    fn marginal(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        for &q in qubits {
            if q >= self.n {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    width: self.n,
                });
            }
        }
        let dim = 1usize << self.n;
        let mut dist = vec![0.0; 1 << qubits.len()];
        for row in 0..dim {
            dist[gather_bits(row, qubits)] += self.entries[row | (row << self.n)].re;
        }
        Ok(clean_distribution(dist))
    }
}

/// Zeroes dust below [`PROBABILITY_FLOOR`] and renormalizes.
pub(crate) fn clean_distribution(mut dist: Vec<f64>) -> Vec<f64> {
    for p in dist.iter_mut() {
        if *p < PROBABILITY_FLOOR {
            *p = 0.0;
        }
    }
    let total: f64 = dist.iter().sum();
    if total > 0.0 {
        for p in dist.iter_mut() {
            *p /= total;
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::gate::Gate;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn hadamard_is_balanced() {
        let c = Circuit::from_gates(1, [Gate::h(0)])
            .unwrap()
            .with_measured(vec![0])
            .unwrap();
        assert!(close(&run_exact(&c).unwrap(), &[0.5, 0.5], 1e-15));
        assert!(close(&run_density(&c, None).unwrap(), &[0.5, 0.5], 1e-15));
    }

    #[test]
    fn empty_circuit_measures_zero() {
        let c = Circuit::new(1).with_measured(vec![0]).unwrap();
        assert_eq!(run_exact(&c).unwrap(), vec![1.0, 0.0]);
        assert_eq!(run_density(&c, None).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn reset_of_entangled_partner_leaves_mixed_marginal() {
        // Oracle: Bell pair ρ = |Φ+⟩⟨Φ+|; tracing out qubit 0 gives I/2 on qubit 1,
        // and a reset of qubit 0 does not touch qubit 1's reduced state.
        let c = Circuit::from_gates(2, [Gate::h(0), Gate::cx(0, 1), Gate::reset(0)])
            .unwrap()
            .with_measured(vec![1])
            .unwrap();
        assert!(close(&run_exact(&c).unwrap(), &[0.5, 0.5], 1e-15));
        assert!(close(&run_density(&c, None).unwrap(), &[0.5, 0.5], 1e-15));
    }

    #[test]
    fn reset_returns_qubit_to_zero() {
        let c = Circuit::from_gates(1, [Gate::x(0), Gate::reset(0)])
            .unwrap()
            .with_measured(vec![0])
            .unwrap();
        assert_eq!(run_exact(&c).unwrap(), vec![1.0, 0.0]);
        assert_eq!(run_density(&c, None).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn purified_width_is_capped() {
        let mut c = Circuit::new(2);
        for _ in 0..30 {
            c.push(Gate::reset(0)).unwrap();
        }
        let c = c.with_measured(vec![0]).unwrap();
        assert!(matches!(
            run_exact(&c),
            Err(Error::WidthExceeded {
                required: 32,
                max: 24
            })
        ));
        assert!(run_density(&c, None).is_ok());
    }

    #[test]
    fn unmeasured_circuit_is_rejected() {
        let c = Circuit::new(1);
        assert!(matches!(run_exact(&c), Err(Error::NothingMeasured)));
    }

    #[test]
    fn full_depolarizing_on_one_qubit_gives_uniform() {
        // p = 3/4 is the completely depolarizing point for one qubit.
        let c = Circuit::from_gates(1, [Gate::x(0)])
            .unwrap()
            .with_measured(vec![0])
            .unwrap();
        let noise = NoiseSpec { p1: 0.75, p2: 0.0 };
        assert!(close(
            &run_density(&c, Some(&noise)).unwrap(),
            &[0.5, 0.5],
            1e-12
        ));
    }

    #[test]
    fn depolarizing_matches_pauli_average() {
        // X on |0> then error with p: P(1) = (1-p) + p·(1/3 [X→0] + 1/3 [Y→0] + 1/3 [Z→1])
        let p = 0.3;
        let c = Circuit::from_gates(1, [Gate::x(0)])
            .unwrap()
            .with_measured(vec![0])
            .unwrap();
        let dist = run_density(&c, Some(&NoiseSpec { p1: p, p2: 0.0 })).unwrap();
        let expect_one = (1.0 - p) + p / 3.0;
        assert!((dist[1] - expect_one).abs() < 1e-12);
    }
}
