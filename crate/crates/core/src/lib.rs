//! Quantum recurrent neural networks for time-series forecasting.
//!
//! The crate bundles a statevector simulator, classical preprocessing and
//! quantum feature maps (angle, exact amplitude, and EnQode approximate
//! amplitude encoding), canonical and alternating-feature-register QRNN circuit
//! builders, SPSA + Adam training with a classical RNN baseline, a circuit-depth
//! analyzer, market-data ingestion, and the experiment drivers behind the
//! `qrnn-forge` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod data;
pub mod depth;
pub mod encoding;
pub mod enqode;
pub mod error;
pub mod experiment;
pub mod qrnn;
pub mod simulator;
pub mod training;

pub use error::{Error, Result};
