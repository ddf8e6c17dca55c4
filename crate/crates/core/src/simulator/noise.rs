use serde::{Deserialize, Serialize};

use super::gate::GateKind;
use crate::error::{Error, Result};

/// Gate-count depolarizing noise: after every 1-qubit (2-qubit) unitary a
/// non-identity Pauli is inserted with total probability `p1` (`p2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub p1: f64,
    pub p2: f64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidProbability { name, value });
            }
        }
        Ok(())
    }

    /// Error probability after a gate of this kind. Resets are noiseless.
    pub fn probability_for(&self, kind: GateKind) -> f64 {
        match kind {
            GateKind::Reset => 0.0,
            k if k.is_two_qubit() => self.p2,
            _ => self.p1,
        }
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec { p1: 1e-3, p2: 1e-2 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(NoiseSpec { p1: -0.1, p2: 0.0 }.validate().is_err());
        assert!(NoiseSpec { p1: 0.0, p2: 1.5 }.validate().is_err());
        assert!(NoiseSpec { p1: 0.0, p2: 1.0 }.validate().is_ok());
    }
}
