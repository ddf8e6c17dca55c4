use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::circuit::Circuit;
use super::gate::{pauli, Gate, GateKind};
use super::noise::NoiseSpec;
use super::state::{apply_single, StateVector};
use crate::error::{Error, Result};

/// Outcome histogram over the measured qubits. Outcome index bit `j` is
/// `measured[j]`; bitstrings print the last measured qubit first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    width: usize,
    counts: Vec<u64>,
}

impl Counts {
    fn new(width: usize) -> Self {
        Counts {
            width,
            counts: vec![0; 1 << width],
        }
    }

    pub fn get(&self, outcome: usize) -> u64 {
        self.counts.get(outcome).copied().unwrap_or(0)
    }

    /// Count for a bitstring such as `"01"` (leftmost character = highest outcome bit).
    pub fn get_bitstring(&self, bits: &str) -> Option<u64> {
        if bits.len() != self.width {
            return None;
        }
        usize::from_str_radix(bits, 2).ok().map(|i| self.get(i))
    }

    pub fn shots(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.counts
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let total = self.shots() as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    pub fn bitstring(&self, outcome: usize) -> String {
        format!("{:0width$b}", outcome, width = self.width)
    }
}

/// Shot-based execution. Each shot is an independent trajectory: a reset
/// measures the qubit in the computational basis and flips it back to |0⟩ on
/// outcome 1; noise inserts a random non-identity Pauli after a gate with the
/// configured probability. Fully determined by `(circuit, shots, seed, noise)`.
pub fn sample(
    circuit: &Circuit,
    shots: usize,
    seed: u64,
    noise: Option<&NoiseSpec>,
) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    if circuit.measured().is_empty() {
        return Err(Error::NothingMeasured);
    }
    if let Some(n) = noise {
        n.validate()?;
    }
    let noisy = noise.is_some_and(|n| n.p1 > 0.0 || n.p2 > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Counts::new(circuit.measured().len());

    if !noisy && !circuit.has_reset() {
        // Every trajectory ends in the same pure state.
        let dist = circuit.statevector()?.marginal(circuit.measured())?;
        for _ in 0..shots {
            counts.counts[draw(&dist, &mut rng)] += 1;
        }
        return Ok(counts);
    }

    for _ in 0..shots {
        let state = trajectory(circuit, noise.filter(|_| noisy), &mut rng)?;
        let dist = state.marginal(circuit.measured())?;
        counts.counts[draw(&dist, &mut rng)] += 1;
    }
    Ok(counts)
}

/// Draws `shots` outcomes from a known distribution over `2^width` outcomes.
/// Counts follow the same multinomial law as [`sample`] on any circuit whose
/// measured-register distribution is `dist`.
pub fn sample_distribution(dist: &[f64], shots: usize, seed: u64) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    if dist.len() < 2 || !dist.len().is_power_of_two() {
        return Err(Error::DimensionMismatch {
            expected: dist.len().next_power_of_two().max(2),
            got: dist.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Counts::new(dist.len().trailing_zeros() as usize);
    for _ in 0..shots {
        counts.counts[draw(dist, &mut rng)] += 1;
    }
    Ok(counts)
}

fn trajectory(
    circuit: &Circuit,
    noise: Option<&NoiseSpec>,
    rng: &mut ChaCha8Rng,
) -> Result<StateVector> {
    let mut state = StateVector::zero(circuit.n_qubits());
    for gate in circuit.gates() {
        if gate.kind() == GateKind::Reset {
            let q = gate.qubits()[0];
            if measure_and_collapse(&mut state, q, rng) {
                state.apply(&Gate::x(q))?;
            }
            continue;
        }
        state.apply(gate)?;
        if let Some(noise) = noise {
            let p = noise.probability_for(gate.kind());
            if p > 0.0 && rng.random::<f64>() < p {
                let qs = gate.qubits();
                // uniform over the 4^k − 1 non-identity Paulis
                let choice = rng.random_range(1..(1usize << (2 * qs.len())));
                for (slot, &q) in qs.iter().enumerate() {
                    if let Some(m) = pauli((choice >> (2 * slot)) & 3) {
                        apply_single(state.amplitudes_mut(), q, &m);
                    }
                }
            }
        }
    }
    Ok(state)
}

/// Projective Z measurement of `q`; returns the outcome.
fn measure_and_collapse(state: &mut StateVector, q: usize, rng: &mut ChaCha8Rng) -> bool {
    let bit = 1usize << q;
    let p_one: f64 = state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| i & bit != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    let outcome = rng.random::<f64>() < p_one;
    let keep = if outcome { p_one } else { 1.0 - p_one };
    let scale = 1.0 / keep.sqrt();
    for (i, a) in state.amplitudes_mut().iter_mut().enumerate() {
        if ((i & bit) != 0) == outcome {
            *a *= scale;
        } else {
            *a = Complex64::new(0.0, 0.0);
        }
    }
    outcome
}

fn draw(dist: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random::<f64>() * dist.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, &p) in dist.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // u landed on the rounding tail; return the last outcome with mass
    dist.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}
