use serde::{Deserialize, Serialize};

use super::gate::{Gate, GateKind};
use super::state::StateVector;
use crate::error::{Error, Result};

/// Ordered gate list over a fixed register, plus the qubits read out at the end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    measured: Vec<usize>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
            measured: Vec::new(),
        }
    }

    pub fn from_gates(n_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Circuit::new(n_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn measured(&self) -> &[usize] {
        &self.measured
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        self.check(gate.qubits())?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn set_measured(&mut self, qubits: Vec<usize>) -> Result<()> {
        self.check(&qubits)?;
        let mut seen = qubits.clone();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateQubit {
                kind: "measure",
                qubit: w[0],
            });
        }
        self.measured = qubits;
        Ok(())
    }

    pub fn with_measured(mut self, qubits: Vec<usize>) -> Result<Self> {
        self.set_measured(qubits)?;
        Ok(self)
    }

    /// Appends the gates of `other`, relabelling its qubit `j` as `map[j]`.
    pub fn append_mapped(&mut self, other: &Circuit, map: &[usize]) -> Result<()> {
        if map.len() < other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: other.n_qubits,
                got: map.len(),
            });
        }
        for g in &other.gates {
            self.push(g.remap(|q| map[q]))?;
        }
        Ok(())
    }

    pub fn count_kind(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind() == kind).count()
    }

    pub fn has_reset(&self) -> bool {
        self.gates.iter().any(|g| g.kind() == GateKind::Reset)
    }

    /// Final pure state from |0…0⟩. Fails if the circuit contains a reset.
    pub fn statevector(&self) -> Result<StateVector> {
        let mut state = StateVector::zero(self.n_qubits);
        for g in &self.gates {
            state.apply(g)?;
        }
        Ok(state)
    }

    fn check(&self, qubits: &[usize]) -> Result<()> {
        match qubits.iter().find(|&&q| q >= self.n_qubits) {
            Some(&q) => Err(Error::QubitOutOfRange {
                index: q,
                width: self.n_qubits,
            }),
            None => Ok(()),
        }
    }
}
