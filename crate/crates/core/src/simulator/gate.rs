use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2x2 complex matrix in row-major order.
pub type Matrix2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    X,
    Y,
    Sx,
    H,
    Cx,
    Cy,
    Cz,
    Reset,
}

impl GateKind {
    pub const ALL: [GateKind; 11] = [
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::X,
        GateKind::Y,
        GateKind::Sx,
        GateKind::H,
        GateKind::Cx,
        GateKind::Cy,
        GateKind::Cz,
        GateKind::Reset,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Sx => "SX",
            GateKind::H => "H",
            GateKind::Cx => "CX",
            GateKind::Cy => "CY",
            GateKind::Cz => "CZ",
            GateKind::Reset => "RESET",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cx | GateKind::Cy | GateKind::Cz => 2,
            _ => 1,
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }

    pub fn is_two_qubit(self) -> bool {
        self.arity() == 2
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A single circuit instruction. Two-qubit kinds store the control first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    kind: GateKind,
    qubits: [usize; 2],
    angle: Option<f64>,
}

impl Gate {
    /// Validating constructor for arbitrary (kind, qubits, angle) triples.
    pub fn new(kind: GateKind, qubits: &[usize], angle: Option<f64>) -> Result<Self> {
        if qubits.len() != kind.arity() {
            return Err(Error::GateArity {
                kind: kind.name(),
                expected: kind.arity(),
                got: qubits.len(),
            });
        }
        if kind.arity() == 2 && qubits[0] == qubits[1] {
            return Err(Error::DuplicateQubit {
                kind: kind.name(),
                qubit: qubits[0],
            });
        }
        match (kind.is_rotation(), angle) {
            (true, None) => return Err(Error::MissingAngle(kind.name())),
            (false, Some(_)) => return Err(Error::UnexpectedAngle(kind.name())),
            _ => {}
        }
        let mut q = [qubits[0], 0];
        if kind.arity() == 2 {
            q[1] = qubits[1];
        }
        Ok(Gate {
            kind,
            qubits: q,
            angle,
        })
    }

    fn one(kind: GateKind, q: usize, angle: Option<f64>) -> Self {
        Gate {
            kind,
            qubits: [q, 0],
            angle,
        }
    }

    fn two(kind: GateKind, control: usize, target: usize) -> Self {
        assert_ne!(control, target, "{kind} control and target must differ");
        Gate {
            kind,
            qubits: [control, target],
            angle: None,
        }
    }

    pub fn rx(q: usize, theta: f64) -> Self {
        Self::one(GateKind::Rx, q, Some(theta))
    }
    pub fn ry(q: usize, theta: f64) -> Self {
        Self::one(GateKind::Ry, q, Some(theta))
    }
    pub fn rz(q: usize, theta: f64) -> Self {
        Self::one(GateKind::Rz, q, Some(theta))
    }
    pub fn x(q: usize) -> Self {
        Self::one(GateKind::X, q, None)
    }
    pub fn y(q: usize) -> Self {
        Self::one(GateKind::Y, q, None)
    }
    pub fn sx(q: usize) -> Self {
        Self::one(GateKind::Sx, q, None)
    }
    pub fn h(q: usize) -> Self {
        Self::one(GateKind::H, q, None)
    }
    pub fn reset(q: usize) -> Self {
        Self::one(GateKind::Reset, q, None)
    }
    pub fn cx(control: usize, target: usize) -> Self {
        Self::two(GateKind::Cx, control, target)
    }
    pub fn cy(control: usize, target: usize) -> Self {
        Self::two(GateKind::Cy, control, target)
    }
    pub fn cz(control: usize, target: usize) -> Self {
        Self::two(GateKind::Cz, control, target)
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }

    pub fn angle(&self) -> Option<f64> {
        self.angle
    }

    /// Same gate acting on relabelled qubits.
    pub fn remap(&self, map: impl Fn(usize) -> usize) -> Self {
        let mut g = *self;
        for q in &mut g.qubits[..self.kind.arity()] {
            *q = map(*q);
        }
        g
    }

    /// The inverse gate (negated angle, or the gate itself for Pauli/Clifford kinds
    /// that are self-inverse). `None` for SX and RESET.
    pub fn inverse(&self) -> Option<Self> {
        match self.kind {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => {
                Some(Self::one(self.kind, self.qubits[0], self.angle.map(|a| -a)))
            }
            GateKind::Sx | GateKind::Reset => None,
            _ => Some(*self),
        }
    }

    /// Matrix of the single-qubit action (the target block for controlled kinds).
    pub fn matrix(&self) -> Option<Matrix2> {
        let theta = self.angle.unwrap_or(0.0);
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let m = match self.kind {
            GateKind::Rx => [
                [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
            ],
            GateKind::Ry => [
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
            ],
            GateKind::Rz => [[Complex64::new(c, -s), ZERO], [ZERO, Complex64::new(c, s)]],
            GateKind::X | GateKind::Cx => [[ZERO, ONE], [ONE, ZERO]],
            GateKind::Y | GateKind::Cy => [[ZERO, -I], [I, ZERO]],
            GateKind::Cz => [[ONE, ZERO], [ZERO, -ONE]],
            GateKind::Sx => {
                let a = Complex64::new(0.5, 0.5);
                let b = Complex64::new(0.5, -0.5);
                [[a, b], [b, a]]
            }
            GateKind::H => {
                let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
                [[h, h], [h, -h]]
            }
            GateKind::Reset => return None,
        };
        Some(m)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(a) = self.angle {
            write!(f, "({a:.6})")?;
        }
        let qs: Vec<String> = self.qubits().iter().map(|q| q.to_string()).collect();
        write!(f, " q[{}]", qs.join(","))
    }
}

pub(crate) fn conj(m: &Matrix2) -> Matrix2 {
    [
        [m[0][0].conj(), m[0][1].conj()],
        [m[1][0].conj(), m[1][1].conj()],
    ]
}

/// The Pauli matrices X, Y, Z (index 1, 2, 3; 0 is identity).
pub(crate) fn pauli(index: usize) -> Option<Matrix2> {
    match index {
        1 => Gate::x(0).matrix(),
        2 => Gate::y(0).matrix(),
        3 => Some([[ONE, ZERO], [ZERO, -ONE]]),
        _ => None,
    }
}
