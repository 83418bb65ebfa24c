//! Gate-count reduction on native circuits.
//!
//! Three passes: same-axis merging with commutation-aware cancellation, and
//! the RX(θ1)·RY(θ2)·RX(θ1) → R(φ3,θ3) template. The commutation database is
//! deliberately minimal: RX commutes with RXX on a shared qubit, and gates on
//! disjoint qubit sets always commute. Nothing else is assumed.

use crate::circuit::{angle_is_trivial, angles_equal, normalize_angle, Circuit, GateKind, GateOp};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PassConfig {
    pub enable_merge: bool,
    pub enable_commute_cancel: bool,
    pub enable_template: bool,
    pub max_fixpoint_iters: usize,
}

impl Default for PassConfig {
    fn default() -> Self {
        PassConfig {
            enable_merge: true,
            enable_commute_cancel: true,
            enable_template: true,
            max_fixpoint_iters: 16,
        }
    }
}

/// Fuses RX(θ1)·RY(θ2)·RX(θ1) into a single R(φ3,θ3).
///
/// With c2 = cos(θ2/2) the product's rotation components are
/// (w, x, y) = (cos θ1 · c2, sin θ1 · c2, sin(θ2/2)), giving
/// θ3 = 2·atan2(√(x²+y²), w) and φ3 = atan2(y, x). The replacement is exact,
/// not merely equal up to phase. Degenerate x = y = 0 returns (0, 0).
pub fn fuse_xyx(theta1: f64, theta2: f64) -> (f64, f64) {
    let c2 = (theta2 / 2.0).cos();
    let w = theta1.cos() * c2;
    let x = theta1.sin() * c2;
    let y = (theta2 / 2.0).sin();
    let r = x.hypot(y);
    if r == 0.0 {
        return (0.0, 0.0);
    }
    (y.atan2(x), 2.0 * r.atan2(w))
}

fn shares_qubit(a: &GateOp, b: &GateOp) -> bool {
    // a barrier with an empty operand list fences every qubit
    if (matches!(a.kind, GateKind::Barrier) && a.qubits.is_empty())
        || (matches!(b.kind, GateKind::Barrier) && b.qubits.is_empty())
    {
        return true;
    }
    a.qubits.iter().any(|q| b.qubits.contains(q))
}

/// True when `a` and `b` may be reordered: disjoint operands, or the
/// RX ↔ RXX pair on a shared qubit (when commutation is enabled).
fn commutes(a: &GateOp, b: &GateOp, use_commutation: bool) -> bool {
    if !shares_qubit(a, b) {
        return true;
    }
    if !use_commutation {
        return false;
    }
    matches!(
        (&a.kind, &b.kind),
        (GateKind::Rx(_), GateKind::Rxx(_)) | (GateKind::Rxx(_), GateKind::Rx(_))
    )
}

/// True when `a` and `b` are the same rotation family on the same operands
/// so their angles may be added.
fn same_axis(a: &GateOp, b: &GateOp) -> bool {
    match (&a.kind, &b.kind) {
        (GateKind::Rx(_), GateKind::Rx(_)) | (GateKind::Ry(_), GateKind::Ry(_)) => {
            a.qubits == b.qubits
        }
        (GateKind::R { phi: p1, .. }, GateKind::R { phi: p2, .. }) => {
            a.qubits == b.qubits && angles_equal(*p1, *p2)
        }
        (GateKind::Rxx(_), GateKind::Rxx(_)) => {
            // RXX is symmetric in its operands
            let mut qa = [a.qubits[0], a.qubits[1]];
            let mut qb = [b.qubits[0], b.qubits[1]];
            qa.sort();
            qb.sort();
            qa == qb
        }
        _ => false,
    }
}

fn rotation_angle(g: &GateOp) -> Option<f64> {
    match g.kind {
        GateKind::Rx(t) | GateKind::Ry(t) | GateKind::Rxx(t) | GateKind::R { theta: t, .. } => {
            Some(t)
        }
        _ => None,
    }
}

fn with_angle(g: &GateOp, theta: f64) -> GateOp {
    let mut out = g.clone();
    out.kind = match g.kind {
        GateKind::Rx(_) => GateKind::Rx(theta),
        GateKind::Ry(_) => GateKind::Ry(theta),
        GateKind::Rxx(_) => GateKind::Rxx(theta),
        GateKind::R { phi, .. } => GateKind::R { phi, theta },
        ref other => other.clone(),
    };
    out
}

fn is_trivial_rotation(g: &GateOp) -> bool {
    rotation_angle(g).is_some_and(angle_is_trivial)
}

fn merge_pass(c: &Circuit, use_commutation: bool) -> Circuit {
    let mut gates = c.gates.clone();
    loop {
        gates.retain(|g| !is_trivial_rotation(g));
        let mut merged = false;
        'scan: for i in 0..gates.len() {
            if rotation_angle(&gates[i]).is_none() {
                continue;
            }
            for j in i + 1..gates.len() {
                if same_axis(&gates[i], &gates[j]) {
                    let sum = normalize_angle(
                        rotation_angle(&gates[i]).unwrap() + rotation_angle(&gates[j]).unwrap(),
                    );
                    gates[i] = with_angle(&gates[i], sum);
                    gates.remove(j);
                    merged = true;
                    break 'scan;
                }
                if !commutes(&gates[i], &gates[j], use_commutation) {
                    break;
                }
            }
        }
        if !merged {
            return Circuit { num_qubits: c.num_qubits, num_clbits: c.num_clbits, gates };
        }
    }
}

/// Same-axis merging plus commutation-aware cancellation, run to its own
/// fixpoint. Gates whose merged angle is 0 or 2π (a pure global phase)
/// are deleted.
pub fn merge_and_cancel(c: &Circuit) -> Circuit {
    merge_pass(c, true)
}

/// Per-qubit pattern of the triple rule: RX(a) at `first`, RY(b) at `mid`,
/// RX(a) at `last`, separated only by RXX gates on that qubit's line.
struct TripleMatch {
    first: usize,
    mid: usize,
    last: usize,
    theta1: f64,
    theta2: f64,
}

fn find_triple(gates: &[GateOp], qubit: crate::circuit::QubitId) -> Option<TripleMatch> {
    // indices of gates touching this qubit, in order
    let line: Vec<usize> = gates
        .iter()
        .enumerate()
        .filter(|(_, g)| {
            g.qubits.contains(&qubit)
                || (matches!(g.kind, GateKind::Barrier) && g.qubits.is_empty())
        })
        .map(|(i, _)| i)
        .collect();
    let single = |idx: usize| -> Option<&GateKind> {
        let g = &gates[idx];
        (g.is_single_qubit_rotation() && g.qubits == [qubit]).then_some(&g.kind)
    };
    let crossing_rxx = |idx: usize| matches!(gates[idx].kind, GateKind::Rxx(_));
    for (p0, &first) in line.iter().enumerate() {
        let a = match single(first) {
            Some(GateKind::Rx(a)) => *a,
            _ => continue,
        };
        // walk forward over RXX gates to the next single-qubit gate
        let mut p1 = p0 + 1;
        while p1 < line.len() && crossing_rxx(line[p1]) {
            p1 += 1;
        }
        if p1 >= line.len() {
            continue;
        }
        let b = match single(line[p1]) {
            Some(GateKind::Ry(b)) => *b,
            _ => continue,
        };
        let mut p2 = p1 + 1;
        while p2 < line.len() && crossing_rxx(line[p2]) {
            p2 += 1;
        }
        if p2 >= line.len() {
            continue;
        }
        match single(line[p2]) {
            Some(GateKind::Rx(a2)) if angles_equal(a, *a2) => {
                return Some(TripleMatch {
                    first,
                    mid: line[p1],
                    last: line[p2],
                    theta1: a,
                    theta2: b,
                })
            }
            _ => continue,
        }
    }
    None
}

/// Applies the RX·RY·RX → R template, commuting the outer RX gates through
/// interleaving RXX gates on the same qubit. RY gates block the commutation,
/// so a triple interrupted by an RY is left untouched.
pub fn apply_template(c: &Circuit) -> Circuit {
    let mut gates = c.gates.clone();
    'restart: loop {
        for q in 0..c.num_qubits {
            if let Some(m) = find_triple(&gates, crate::circuit::QubitId(q)) {
                let (phi3, theta3) = fuse_xyx(m.theta1, m.theta2);
                gates[m.mid] = GateOp::r(phi3, theta3, q);
                // remove the outer RX gates, higher index first
                gates.remove(m.last);
                gates.remove(m.first);
                continue 'restart;
            }
        }
        return Circuit { num_qubits: c.num_qubits, num_clbits: c.num_clbits, gates };
    }
}

/// Runs the enabled passes to a fixpoint (or `max_fixpoint_iters`).
pub fn optimize(c: &Circuit, cfg: &PassConfig) -> Circuit {
    let mut current = c.clone();
    for _ in 0..cfg.max_fixpoint_iters.max(1) {
        let mut next = current.clone();
        if cfg.enable_merge || cfg.enable_commute_cancel {
            next = merge_pass(&next, cfg.enable_commute_cancel);
        }
        if cfg.enable_template {
            next = apply_template(&next);
        }
        if next == current {
            return next;
        }
        current = next;
    }
    current
}
