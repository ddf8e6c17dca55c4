//! Basis decomposition, linear-chain routing and circuit depth.
//!
//! The basis is `{RZ, SX, X, CZ}`; RESET passes through. No cancellation or
//! peephole optimization is performed.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{amplitude_qsp, angle_feature_map, normalize_l2};
use crate::enqode::EnqodeAnsatz;
use crate::error::{Error, Result};
use crate::qrnn::{
    build_encoded, EncodedSequence, EncodingKind, Entanglement, QrnnConfig, Structure,
};
use crate::simulator::{Circuit, Gate, GateKind};

/// Gate kinds allowed after decomposition.
pub const BASIS: [GateKind; 4] = [GateKind::Rz, GateKind::Sx, GateKind::X, GateKind::Cz];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    AllToAll,
    LinearChain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthCount {
    AllGates,
    TwoQubitOnly,
}

/// `U(θ, φ, λ)` up to global phase, in time order.
fn euler(out: &mut Vec<Gate>, q: usize, theta: f64, phi: f64, lambda: f64) {
    out.push(Gate::rz(q, lambda));
    out.push(Gate::sx(q));
    out.push(Gate::rz(q, theta + PI));
    out.push(Gate::sx(q));
    out.push(Gate::rz(q, phi + PI));
}

fn hadamard(out: &mut Vec<Gate>, q: usize) {
    out.push(Gate::rz(q, FRAC_PI_2));
    out.push(Gate::sx(q));
    out.push(Gate::rz(q, FRAC_PI_2));
}

fn cx(out: &mut Vec<Gate>, c: usize, t: usize) {
    hadamard(out, t);
    out.push(Gate::cz(c, t));
    hadamard(out, t);
}

fn decompose_gate(g: &Gate, out: &mut Vec<Gate>) {
    let q = g.qubits();
    let angle = g.angle().unwrap_or(0.0);
    match g.kind() {
        GateKind::Rz | GateKind::Sx | GateKind::X | GateKind::Cz | GateKind::Reset => out.push(*g),
        GateKind::Ry => euler(out, q[0], angle, 0.0, 0.0),
        GateKind::Rx => euler(out, q[0], angle, -FRAC_PI_2, FRAC_PI_2),
        GateKind::H => hadamard(out, q[0]),
        GateKind::Y => {
            out.push(Gate::rz(q[0], PI));
            out.push(Gate::x(q[0]));
        }
        GateKind::Cx => cx(out, q[0], q[1]),
        GateKind::Cy => {
            out.push(Gate::rz(q[1], -FRAC_PI_2));
            cx(out, q[0], q[1]);
            out.push(Gate::rz(q[1], FRAC_PI_2));
        }
    }
}

/// Rewrites every gate into the basis; equal to the input up to global phase.
pub fn decompose(circuit: &Circuit) -> Result<Circuit> {
    let mut gates = Vec::with_capacity(circuit.len() * 5);
    for g in circuit.gates() {
        decompose_gate(g, &mut gates);
    }
    Circuit::from_gates(circuit.n_qubits(), gates)?.with_measured(circuit.measured().to_vec())
}

/// A routed circuit and the final position of every logical qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct Routed {
    pub circuit: Circuit,
    /// `layout[logical] = physical` after the last gate.
    pub layout: Vec<usize>,
    pub swaps: usize,
}

fn swap(out: &mut Vec<Gate>, a: usize, b: usize) {
    cx(out, a, b);
    cx(out, b, a);
    cx(out, a, b);
}

/// Greedy nearest-neighbour routing. Before each two-qubit gate on
/// non-adjacent positions, SWAPs move the control toward the target. Measured
/// qubits are mapped to their final physical positions.
pub fn route(circuit: &Circuit, coupling: Coupling) -> Result<Routed> {
    let n = circuit.n_qubits();
    if coupling == Coupling::AllToAll {
        return Ok(Routed {
            circuit: circuit.clone(),
            layout: (0..n).collect(),
            swaps: 0,
        });
    }
    let mut layout: Vec<usize> = (0..n).collect();
    let mut at: Vec<usize> = (0..n).collect(); // at[physical] = logical
    let mut gates = Vec::with_capacity(circuit.len());
    let mut swaps = 0;
    for g in circuit.gates() {
        if g.kind().is_two_qubit() {
            let (c, t) = (g.qubits()[0], g.qubits()[1]);
            while layout[c].abs_diff(layout[t]) > 1 {
                let from = layout[c];
                let to = if layout[t] > from { from + 1 } else { from - 1 };
                swap(&mut gates, from, to);
                swaps += 1;
                let other = at[to];
                at.swap(from, to);
                layout[c] = to;
                layout[other] = from;
            }
        }
        gates.push(g.remap(|q| layout[q]));
    }
    let measured = circuit.measured().iter().map(|&q| layout[q]).collect();
    Ok(Routed {
        circuit: Circuit::from_gates(n, gates)?.with_measured(measured)?,
        layout,
        swaps,
    })
}

/// Longest qubit-wise dependency chain. In `TwoQubitOnly` mode single-qubit
/// gates and resets are not counted and do not advance any qubit.
pub fn circuit_depth(circuit: &Circuit, count: DepthCount) -> usize {
    let mut level = vec![0usize; circuit.n_qubits()];
    let mut depth = 0;
    for g in circuit.gates() {
        if count == DepthCount::TwoQubitOnly && !g.kind().is_two_qubit() {
            continue;
        }
        let next = g.qubits().iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
        for &q in g.qubits() {
            level[q] = next;
        }
        depth = depth.max(next);
    }
    depth
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanConfig {
    pub n_f_min: usize,
    pub n_f_max: usize,
    pub encodings: Vec<EncodingKind>,
    pub structures: Vec<Structure>,
    pub steps: usize,
    pub n_hidden: usize,
    pub ansatz_reps: usize,
    pub entanglement: Entanglement,
    pub coupling: Coupling,
    /// EnQode layers per feature qubit (layers = `enqode_layers_per_qubit · n_F`).
    pub enqode_layers_per_qubit: usize,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            n_f_min: 2,
            n_f_max: 5,
            encodings: vec![EncodingKind::AmplitudeExact, EncodingKind::Enqode],
            structures: vec![Structure::Canonical, Structure::AlternatingF],
            steps: 2,
            n_hidden: 1,
            ansatz_reps: 1,
            entanglement: Entanglement::Linear,
            coupling: Coupling::AllToAll,
            enqode_layers_per_qubit: 1,
            seed: 0,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_f_min == 0 || self.n_f_min > self.n_f_max {
            return Err(Error::Config(format!(
                "invalid n_F range {}..={}",
                self.n_f_min, self.n_f_max
            )));
        }
        if self.steps == 0 || self.n_hidden == 0 || self.ansatz_reps == 0 {
            return Err(Error::Config(
                "steps, n_hidden and ansatz_reps must be at least 1".into(),
            ));
        }
        if self.enqode_layers_per_qubit == 0 {
            return Err(Error::Config(
                "enqode_layers_per_qubit must be at least 1".into(),
            ));
        }
        if self.encodings.is_empty() || self.structures.is_empty() {
            return Err(Error::Config(
                "scan needs at least one encoding and one structure".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthRow {
    pub n_f: usize,
    pub features: usize,
    pub encoding: String,
    pub structure: String,
    pub depth: usize,
    pub two_qubit_depth: usize,
}

pub const DEPTH_CSV_HEADER: [&str; 6] = [
    "n_f",
    "features",
    "encoding",
    "structure",
    "depth",
    "two_qubit_depth",
];

fn feature_circuit(
    encoding: EncodingKind,
    n_f: usize,
    layers: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Circuit> {
    match encoding {
        EncodingKind::Angle => {
            let x: Vec<f64> = (0..n_f).map(|_| rng.random()).collect();
            angle_feature_map(&x)
        }
        EncodingKind::AmplitudeExact => {
            let x: Vec<f64> = (0..1usize << n_f)
                .map(|_| rng.random::<f64>() + 0.01)
                .collect();
            amplitude_qsp(&normalize_l2(&x)?)
        }
        EncodingKind::Enqode => {
            let a = EnqodeAnsatz::new(n_f, layers)?;
            let theta: Vec<f64> = (0..a.param_count())
                .map(|_| rng.random_range(-PI..PI))
                .collect();
            a.circuit(&theta)
        }
    }
}

/// Representative QRNN circuit for one scan point, before decomposition.
pub fn scan_circuit(
    cfg: &ScanConfig,
    n_f: usize,
    encoding: EncodingKind,
    structure: Structure,
) -> Result<Circuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (n_f as u64) << 32);
    let steps = (0..cfg.steps)
        .map(|_| feature_circuit(encoding, n_f, cfg.enqode_layers_per_qubit * n_f, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let qcfg = QrnnConfig {
        n_hidden: cfg.n_hidden,
        n_feature: n_f,
        encoding,
        structure,
        ansatz_reps: cfg.ansatz_reps,
        entanglement: cfg.entanglement,
        target_index: 0,
    };
    let params: Vec<f64> = (0..qcfg.param_count())
        .map(|_| rng.random_range(-PI..PI))
        .collect();
    build_encoded(
        &qcfg,
        &params,
        &EncodedSequence {
            kind: encoding,
            steps,
        },
    )
}

/// Decomposed (and routed) depth of every (n_F, encoding, structure) point,
/// ordered by n_F, then encoding, then structure.
pub fn depth_scan(cfg: &ScanConfig) -> Result<Vec<DepthRow>> {
    cfg.validate()?;
    let mut points = Vec::new();
    for n_f in cfg.n_f_min..=cfg.n_f_max {
        for &e in &cfg.encodings {
            for &s in &cfg.structures {
                points.push((n_f, e, s));
            }
        }
    }
    points
        .par_iter()
        .map(|&(n_f, encoding, structure)| {
            let raw = scan_circuit(cfg, n_f, encoding, structure)?;
            let routed = route(&decompose(&raw)?, cfg.coupling)?.circuit;
            Ok(DepthRow {
                n_f,
                features: match encoding {
                    EncodingKind::Angle => n_f,
                    _ => 1 << n_f,
                },
                encoding: encoding.name().to_string(),
                structure: structure.name().to_string(),
                depth: circuit_depth(&routed, DepthCount::AllGates),
                two_qubit_depth: circuit_depth(&routed, DepthCount::TwoQubitOnly),
            })
        })
        .collect()
}

pub fn write_depth_csv(path: &Path, rows: &[DepthRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(DEPTH_CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.n_f.to_string(),
            r.features.to_string(),
            r.encoding.clone(),
            r.structure.clone(),
            r.depth.to_string(),
            r.two_qubit_depth.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
