//! Rewrites builtin gates into the native set {RX, RY, R, RXX}.
//!
//! Every rule below is frozen against the unitary oracle: the +i exponent
//! convention of the native rotations flips signs relative to the usual
//! published tables, so the sign patterns were fixed once by search (see the
//! `cx_rule_is_first_sign_search_hit` regression test) and are re-checked by
//! oracle equality tests.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use thiserror::Error;

use crate::circuit::{Circuit, GateKind, GateOp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LoweringError {
    #[error("no lowering rule for gate {name:?} at position {position}")]
    UnknownGate { name: String, position: usize },
}

/// rz(θ) = RY(−π/2)·RX(θ)·RY(π/2) exactly (matrix order), i.e. the circuit
/// sequence RY(π/2), RX(θ), RY(−π/2).
fn rz_seq(theta: f64, q: usize) -> Vec<GateOp> {
    vec![GateOp::ry(FRAC_PI_2, q), GateOp::rx(theta, q), GateOp::ry(-FRAC_PI_2, q)]
}

/// Frozen CX sign pattern: circuit sequence
/// RY(s0·π/2) c, RXX(s1·π/2), RX(s2·π/2) c, RX(s3·π/2) t, RY(−s0·π/2) c.
pub(crate) const CX_SIGNS: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];

pub(crate) fn cx_seq_with_signs(signs: [f64; 4], c: usize, t: usize) -> Vec<GateOp> {
    vec![
        GateOp::ry(signs[0] * FRAC_PI_2, c),
        GateOp::rxx(signs[1] * FRAC_PI_2, c, t),
        GateOp::rx(signs[2] * FRAC_PI_2, c),
        GateOp::rx(signs[3] * FRAC_PI_2, t),
        GateOp::ry(-signs[0] * FRAC_PI_2, c),
    ]
}

fn cx_seq(c: usize, t: usize) -> Vec<GateOp> {
    cx_seq_with_signs(CX_SIGNS, c, t)
}

/// Lowers one gate to a native sequence. Native gates, measurements and
/// barriers pass through unchanged.
pub fn lower_gate(g: &GateOp) -> Result<Vec<GateOp>, LoweringError> {
    let (name, params) = match &g.kind {
        GateKind::Named { name, params } => (name.as_str(), params.as_slice()),
        _ => return Ok(vec![g.clone()]),
    };
    let q = |i: usize| g.qubits[i].0;
    let p = |i: usize| params.get(i).copied().unwrap_or(0.0);
    let seq = match name {
        "rz" | "u1" => rz_seq(p(0), q(0)),
        "x" => vec![GateOp::rx(PI, q(0))],
        "y" => vec![GateOp::ry(PI, q(0))],
        "z" => rz_seq(PI, q(0)),
        "s" => rz_seq(FRAC_PI_2, q(0)),
        "sdg" => rz_seq(-FRAC_PI_2, q(0)),
        "t" => rz_seq(FRAC_PI_4, q(0)),
        "tdg" => rz_seq(-FRAC_PI_4, q(0)),
        // H = RX(π)·RY(−π/2) up to phase
        "h" => vec![GateOp::ry(-FRAC_PI_2, q(0)), GateOp::rx(PI, q(0))],
        // u3(θ,φ,λ) ≅ rz(λ), then the standard ry(θ) = RY(−θ), then rz(φ)
        "u3" => {
            let mut seq = rz_seq(p(2), q(0));
            seq.push(GateOp::ry(-p(0), q(0)));
            seq.extend(rz_seq(p(1), q(0)));
            seq
        }
        "u2" => {
            return lower_gate(&GateOp::named("u3", &[FRAC_PI_2, p(0), p(1)], &[q(0)]));
        }
        "cx" => cx_seq(q(0), q(1)),
        "cz" => {
            let mut seq = lower_gate(&GateOp::named("h", &[], &[q(1)]))?;
            seq.extend(cx_seq(q(0), q(1)));
            seq.extend(lower_gate(&GateOp::named("h", &[], &[q(1)]))?);
            seq
        }
        "swap" => {
            let mut seq = cx_seq(q(0), q(1));
            seq.extend(cx_seq(q(1), q(0)));
            seq.extend(cx_seq(q(0), q(1)));
            seq
        }
        "ccx" => {
            let (a, b, c) = (q(0), q(1), q(2));
            let mut seq = Vec::new();
            for part in [
                GateOp::named("h", &[], &[c]),
                GateOp::named("cx", &[], &[b, c]),
                GateOp::named("tdg", &[], &[c]),
                GateOp::named("cx", &[], &[a, c]),
                GateOp::named("t", &[], &[c]),
                GateOp::named("cx", &[], &[b, c]),
                GateOp::named("tdg", &[], &[c]),
                GateOp::named("cx", &[], &[a, c]),
                GateOp::named("t", &[], &[b]),
                GateOp::named("t", &[], &[c]),
                GateOp::named("h", &[], &[c]),
                GateOp::named("cx", &[], &[a, b]),
                GateOp::named("t", &[], &[a]),
                GateOp::named("tdg", &[], &[b]),
                GateOp::named("cx", &[], &[a, b]),
            ] {
                seq.extend(lower_gate(&part)?);
            }
            seq
        }
        _ => return Err(LoweringError::UnknownGate { name: name.to_string(), position: 0 }),
    };
    Ok(seq)
}

/// Gate-by-gate lowering of a whole circuit; qubit and clbit counts are
/// preserved, and so is the circuit unitary up to global phase.
pub fn lower_circuit(c: &Circuit) -> Result<Circuit, LoweringError> {
    let mut out = Circuit::new(c.num_qubits, c.num_clbits);
    for (position, g) in c.gates.iter().enumerate() {
        let seq = lower_gate(g).map_err(|e| match e {
            LoweringError::UnknownGate { name, .. } => LoweringError::UnknownGate { name, position },
        })?;
        out.gates.extend(seq);
    }
    Ok(out)
}
