//! Statevector simulation: gates, circuits, exact reset-aware runners, shot
//! sampling with optional depolarizing noise.
//!
//! Qubit 0 is the least-significant bit of every basis-state index, and the
//! outcome index of a measurement over `[q_0, q_1, …]` has `q_j` as bit `j`.

mod circuit;
mod exact;
mod gate;
mod noise;
mod sample;
mod state;

pub use circuit::Circuit;
pub use exact::{
    run_density, run_density_with, run_exact, run_exact_with, ExactLimits,
    DEFAULT_MAX_DENSITY_QUBITS, DEFAULT_MAX_PURIFIED_WIDTH, PROBABILITY_FLOOR,
};
pub use gate::{Gate, GateKind, Matrix2};
pub use noise::NoiseSpec;
pub use sample::{sample, sample_distribution, Counts};
pub use state::{apply_gate, fidelity, StateVector};
