//! Circuit intermediate representation over a flat qubit index space.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

/// Logical qubit index within a circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitId(pub usize);

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// Rotations repeat after 4π; a 2π shift only flips the global sign.
pub const ANGLE_PERIOD: f64 = 4.0 * PI;

/// Canonical angle in [0, 4π).
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(ANGLE_PERIOD);
    if r >= ANGLE_PERIOD {
        0.0
    } else {
        r
    }
}

/// Angle equality modulo the 4π period, at tolerance 1e-12.
pub fn angles_equal(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(ANGLE_PERIOD);
    d.abs() < 1e-12 || (ANGLE_PERIOD - d).abs() < 1e-12
}

/// True when a rotation by `a` is the identity up to global phase
/// (a ≡ 0 mod 2π; the 2π case is the global sign flip).
pub fn angle_is_trivial(a: f64) -> bool {
    let d = a.rem_euclid(2.0 * PI);
    d.abs() < 1e-12 || (2.0 * PI - d).abs() < 1e-12
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    /// exp(iθ σx/2)
    Rx(f64),
    /// exp(iθ σy/2)
    Ry(f64),
    /// exp(iθ (cos φ σx + sin φ σy)/2)
    R { phi: f64, theta: f64 },
    /// exp(iθ σx⊗σx/2)
    Rxx(f64),
    /// A builtin gate that has not been lowered yet.
    Named { name: String, params: Vec<f64> },
    Measure { cbit: usize },
    Barrier,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub qubits: Vec<QubitId>,
}

impl GateOp {
    pub fn rx(theta: f64, q: usize) -> GateOp {
        GateOp { kind: GateKind::Rx(theta), qubits: vec![QubitId(q)] }
    }

    pub fn ry(theta: f64, q: usize) -> GateOp {
        GateOp { kind: GateKind::Ry(theta), qubits: vec![QubitId(q)] }
    }

    pub fn r(phi: f64, theta: f64, q: usize) -> GateOp {
        GateOp { kind: GateKind::R { phi, theta }, qubits: vec![QubitId(q)] }
    }

    pub fn rxx(theta: f64, a: usize, b: usize) -> GateOp {
        GateOp { kind: GateKind::Rxx(theta), qubits: vec![QubitId(a), QubitId(b)] }
    }

    pub fn named(name: &str, params: &[f64], qubits: &[usize]) -> GateOp {
        GateOp {
            kind: GateKind::Named { name: name.to_string(), params: params.to_vec() },
            qubits: qubits.iter().map(|&q| QubitId(q)).collect(),
        }
    }

    pub fn measure(q: usize, cbit: usize) -> GateOp {
        GateOp { kind: GateKind::Measure { cbit }, qubits: vec![QubitId(q)] }
    }

    pub fn barrier(qubits: &[usize]) -> GateOp {
        GateOp { kind: GateKind::Barrier, qubits: qubits.iter().map(|&q| QubitId(q)).collect() }
    }

    /// Native means directly executable: a hardware rotation, or one of the
    /// pass-through operations (measure, barrier).
    pub fn is_native(&self) -> bool {
        !matches!(self.kind, GateKind::Named { .. })
    }

    pub fn is_rotation(&self) -> bool {
        matches!(
            self.kind,
            GateKind::Rx(_) | GateKind::Ry(_) | GateKind::R { .. } | GateKind::Rxx(_)
        )
    }

    pub fn is_single_qubit_rotation(&self) -> bool {
        matches!(self.kind, GateKind::Rx(_) | GateKind::Ry(_) | GateKind::R { .. })
    }

    pub fn validate(&self, num_qubits: usize, num_clbits: usize) -> Result<(), CircuitError> {
        for q in &self.qubits {
            if q.0 >= num_qubits {
                return Err(CircuitError::OperandOutOfRange { qubit: q.0, num_qubits });
            }
        }
        for (i, a) in self.qubits.iter().enumerate() {
            if self.qubits[i + 1..].contains(a) {
                return Err(CircuitError::DuplicateOperand { qubit: a.0 });
            }
        }
        let arity = match &self.kind {
            GateKind::Rx(_) | GateKind::Ry(_) | GateKind::R { .. } => Some(1),
            GateKind::Rxx(_) => Some(2),
            GateKind::Measure { .. } => Some(1),
            GateKind::Named { .. } | GateKind::Barrier => None,
        };
        if let Some(a) = arity {
            if self.qubits.len() != a {
                return Err(CircuitError::ArityMismatch { expected: a, got: self.qubits.len() });
            }
        }
        if let GateKind::Measure { cbit } = self.kind {
            if cbit >= num_clbits {
                return Err(CircuitError::ClbitOutOfRange { cbit, num_clbits });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("operand q{qubit} out of range for {num_qubits} qubits")]
    OperandOutOfRange { qubit: usize, num_qubits: usize },
    #[error("duplicate operand q{qubit}")]
    DuplicateOperand { qubit: usize },
    #[error("operand count {got} does not match gate arity {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("classical bit c{cbit} out of range for {num_clbits} bits")]
    ClbitOutOfRange { cbit: usize, num_clbits: usize },
}

/// Ordered gate list over `num_qubits` qubits and `num_clbits` classical bits.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Circuit {
    pub num_qubits: usize,
    pub num_clbits: usize,
    pub gates: Vec<GateOp>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Circuit {
        Circuit { num_qubits, num_clbits, gates: Vec::new() }
    }

    pub fn push(&mut self, g: GateOp) -> Result<(), CircuitError> {
        g.validate(self.num_qubits, self.num_clbits)?;
        self.gates.push(g);
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        for g in &self.gates {
            g.validate(self.num_qubits, self.num_clbits)?;
        }
        Ok(())
    }

    pub fn is_native(&self) -> bool {
        self.gates.iter().all(GateOp::is_native)
    }

    pub fn has_measurement(&self) -> bool {
        self.gates.iter().any(|g| matches!(g.kind, GateKind::Measure { .. }))
    }

    pub fn rxx_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g.kind, GateKind::Rxx(_))).count()
    }

    /// Rotation gates only (excludes measure and barrier).
    pub fn rotation_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_rotation()).count()
    }
}
