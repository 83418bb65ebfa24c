//! Dense unitary oracle for desk-scale equivalence checking.
//!
//! Builds the matrix of a gate or circuit on up to [`MAX_ORACLE_QUBITS`]
//! qubits, with qubit `i` mapped to bit `i` of the basis index. The native
//! rotations use the +i exponent convention throughout: RX(θ) = exp(iθσx/2).

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{Circuit, GateKind, GateOp, QubitId};

pub type UnitaryMatrix = DMatrix<Complex64>;

pub const MAX_ORACLE_QUBITS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("gate {0:?} has no known matrix")]
    UnknownGate(String),
    #[error("{0} qubits exceed the oracle limit of {MAX_ORACLE_QUBITS}")]
    DimensionTooLarge(usize),
    #[error("circuit contains a measurement")]
    ContainsMeasurement,
    #[error("matrix dimensions differ")]
    DimensionMismatch,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn mat2(entries: [Complex64; 4]) -> UnitaryMatrix {
    UnitaryMatrix::from_row_slice(2, 2, &entries)
}

/// RX(θ) = exp(iθσx/2)
pub fn rx_matrix(theta: f64) -> UnitaryMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    mat2([c(co, 0.0), c(0.0, s), c(0.0, s), c(co, 0.0)])
}

/// RY(θ) = exp(iθσy/2)
pub fn ry_matrix(theta: f64) -> UnitaryMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    mat2([c(co, 0.0), c(s, 0.0), c(-s, 0.0), c(co, 0.0)])
}

/// R(φ,θ) = exp(iθ(cos φ σx + sin φ σy)/2); RX = R(0,·), RY = R(π/2,·).
pub fn r_matrix(phi: f64, theta: f64) -> UnitaryMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    let e_neg = Complex64::from_polar(1.0, -phi);
    let e_pos = Complex64::from_polar(1.0, phi);
    mat2([
        c(co, 0.0),
        c(0.0, s) * e_neg,
        c(0.0, s) * e_pos,
        c(co, 0.0),
    ])
}

/// RXX(θ) = exp(iθ σx⊗σx/2), on the 4-dimensional two-qubit space.
pub fn rxx_matrix(theta: f64) -> UnitaryMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    let mut m = UnitaryMatrix::identity(4, 4) * c(co, 0.0);
    for i in 0..4 {
        m[(i, 3 - i)] = c(0.0, s);
    }
    m
}

/// Matrices of the builtin named gates, standard qelib1 conventions.
/// Within a gate matrix operand `j` is bit `j` of the sub-index.
fn named_matrix(name: &str, params: &[f64]) -> Result<UnitaryMatrix, OracleError> {
    let p = |i: usize| -> f64 { params.get(i).copied().unwrap_or(0.0) };
    let frac = std::f64::consts::FRAC_1_SQRT_2;
    let m = match name {
        "x" => mat2([c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
        "y" => mat2([c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
        "z" => mat2([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
        "h" => mat2([c(frac, 0.0), c(frac, 0.0), c(frac, 0.0), c(-frac, 0.0)]),
        "s" => mat2([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]),
        "sdg" => mat2([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)]),
        "t" => mat2([
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
        ]),
        "tdg" => mat2([
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4),
        ]),
        // rz(θ) = diag(e^{-iθ/2}, e^{iθ/2})
        "rz" => mat2([
            Complex64::from_polar(1.0, -p(0) / 2.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            Complex64::from_polar(1.0, p(0) / 2.0),
        ]),
        "u1" => mat2([
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            Complex64::from_polar(1.0, p(0)),
        ]),
        "u2" => return named_matrix("u3", &[std::f64::consts::FRAC_PI_2, p(0), p(1)]),
        "u3" => {
            let (theta, phi, lam) = (p(0), p(1), p(2));
            let (s, co) = (theta / 2.0).sin_cos();
            mat2([
                c(co, 0.0),
                -Complex64::from_polar(s, lam),
                Complex64::from_polar(s, phi),
                Complex64::from_polar(co, phi + lam),
            ])
        }
        "cx" => {
            // control is operand 0 (bit 0 of the sub-index)
            let mut m = UnitaryMatrix::zeros(4, 4);
            m[(0, 0)] = c(1.0, 0.0);
            m[(2, 2)] = c(1.0, 0.0);
            m[(3, 1)] = c(1.0, 0.0);
            m[(1, 3)] = c(1.0, 0.0);
            m
        }
        "cz" => {
            let mut m = UnitaryMatrix::identity(4, 4);
            m[(3, 3)] = c(-1.0, 0.0);
            m
        }
        "swap" => {
            let mut m = UnitaryMatrix::zeros(4, 4);
            m[(0, 0)] = c(1.0, 0.0);
            m[(3, 3)] = c(1.0, 0.0);
            m[(1, 2)] = c(1.0, 0.0);
            m[(2, 1)] = c(1.0, 0.0);
            m
        }
        "ccx" => {
            // controls are operands 0 and 1, target is operand 2
            let mut m = UnitaryMatrix::identity(8, 8);
            m[(3, 3)] = c(0.0, 0.0);
            m[(7, 7)] = c(0.0, 0.0);
            m[(3, 7)] = c(1.0, 0.0);
            m[(7, 3)] = c(1.0, 0.0);
            m
        }
        _ => return Err(OracleError::UnknownGate(name.to_string())),
    };
    Ok(m)
}

/// Embeds a k-qubit gate matrix on the given operand qubits of an n-qubit
/// space, identity elsewhere.
fn embed(m: &UnitaryMatrix, qubits: &[QubitId], n: usize) -> UnitaryMatrix {
    let k = qubits.len();
    debug_assert_eq!(m.nrows(), 1 << k);
    let dim = 1usize << n;
    let rest: Vec<usize> = (0..n).filter(|i| !qubits.iter().any(|q| q.0 == *i)).collect();
    let mut out = UnitaryMatrix::zeros(dim, dim);
    let scatter = |sub: usize, base: usize| -> usize {
        let mut idx = base;
        for (j, q) in qubits.iter().enumerate() {
            if (sub >> j) & 1 == 1 {
                idx |= 1 << q.0;
            }
        }
        idx
    };
    for r in 0..(1usize << rest.len()) {
        let mut base = 0usize;
        for (j, pos) in rest.iter().enumerate() {
            if (r >> j) & 1 == 1 {
                base |= 1 << pos;
            }
        }
        for a in 0..(1 << k) {
            for b in 0..(1 << k) {
                let v = m[(a, b)];
                if v != Complex64::new(0.0, 0.0) {
                    out[(scatter(a, base), scatter(b, base))] = v;
                }
            }
        }
    }
    out
}

/// Matrix of one gate embedded on its operands in an n-qubit space.
/// Barriers embed as the identity; measurements have no matrix.
pub fn unitary_of_gate(g: &GateOp, n: usize) -> Result<UnitaryMatrix, OracleError> {
    if n > MAX_ORACLE_QUBITS {
        return Err(OracleError::DimensionTooLarge(n));
    }
    let m = match &g.kind {
        GateKind::Rx(t) => rx_matrix(*t),
        GateKind::Ry(t) => ry_matrix(*t),
        GateKind::R { phi, theta } => r_matrix(*phi, *theta),
        GateKind::Rxx(t) => rxx_matrix(*t),
        GateKind::Named { name, params } => named_matrix(name, params)?,
        GateKind::Barrier => return Ok(UnitaryMatrix::identity(1 << n, 1 << n)),
        GateKind::Measure { .. } => return Err(OracleError::ContainsMeasurement),
    };
    Ok(embed(&m, &g.qubits, n))
}

/// Ordered product of the circuit's gate matrices; later gates are applied
/// after earlier ones.
pub fn unitary_of_circuit(c: &Circuit) -> Result<UnitaryMatrix, OracleError> {
    if c.num_qubits > MAX_ORACLE_QUBITS {
        return Err(OracleError::DimensionTooLarge(c.num_qubits));
    }
    let dim = 1usize << c.num_qubits;
    let mut u = UnitaryMatrix::identity(dim, dim);
    for g in &c.gates {
        if matches!(g.kind, GateKind::Barrier) {
            continue;
        }
        u = unitary_of_gate(g, c.num_qubits)? * u;
    }
    Ok(u)
}

/// True iff U = λV for some unit-modulus λ, within `tol` per entry. λ is
/// extracted at the largest-magnitude entry of V to avoid near-zero division.
pub fn equal_up_to_global_phase(
    u: &UnitaryMatrix,
    v: &UnitaryMatrix,
    tol: f64,
) -> Result<bool, OracleError> {
    if u.shape() != v.shape() {
        return Err(OracleError::DimensionMismatch);
    }
    let mut best = (0usize, 0usize);
    let mut best_norm = -1.0f64;
    for i in 0..v.nrows() {
        for j in 0..v.ncols() {
            let n = v[(i, j)].norm();
            if n > best_norm {
                best_norm = n;
                best = (i, j);
            }
        }
    }
    let lambda = if best_norm > 0.0 {
        let l = u[best] / v[best];
        if l.norm() > 0.0 {
            l / l.norm()
        } else {
            return Ok(u.iter().all(|e| e.norm() <= tol));
        }
    } else {
        Complex64::new(1.0, 0.0)
    };
    Ok(u.iter()
        .zip(v.iter())
        .all(|(a, b)| (a - lambda * b).norm() <= tol))
}

/// Max-entry deviation of U†U from the identity.
pub fn unitarity_defect(u: &UnitaryMatrix) -> f64 {
    let p = u.adjoint() * u;
    let id = UnitaryMatrix::identity(u.nrows(), u.ncols());
    (p - id).iter().map(|e| e.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use std::f64::consts::PI;

    /// Independent oracle: exp(iθ σx⊗σx / 2) by power series.
    fn rxx_by_series(theta: f64) -> UnitaryMatrix {
        let mut xx = UnitaryMatrix::zeros(4, 4);
        for i in 0..4 {
            xx[(i, 3 - i)] = Complex64::new(1.0, 0.0);
        }
        let a = xx * Complex64::new(0.0, theta / 2.0);
        let mut sum = UnitaryMatrix::identity(4, 4);
        let mut term = UnitaryMatrix::identity(4, 4);
        for k in 1..40 {
            term = (&term * &a) / Complex64::new(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn rx_zero_is_identity() {
        let g = GateOp::rx(0.0, 0);
        let u = unitary_of_gate(&g, 1).unwrap();
        assert!((u - UnitaryMatrix::identity(2, 2)).iter().all(|e| e.norm() < 1e-12));
    }

    #[test]
    fn rx_pi_is_i_sigma_x() {
        let u = unitary_of_gate(&GateOp::rx(PI, 0), 1).unwrap();
        let x = named_matrix("x", &[]).unwrap();
        let expect = x * Complex64::new(0.0, 1.0);
        assert!((u.clone() - expect).iter().all(|e| e.norm() < 1e-12));
        assert!(equal_up_to_global_phase(&u, &named_matrix("x", &[]).unwrap(), 1e-9).unwrap());
    }

    #[test]
    fn rxx_matches_series_oracle() {
        for theta in [0.0, 0.3, PI / 2.0, 1.7, -2.2, 3.9] {
            let direct = rxx_matrix(theta);
            let series = rxx_by_series(theta);
            assert!(
                (direct - series).iter().all(|e| e.norm() < 1e-10),
                "theta = {theta}"
            );
        }
    }

    #[test]
    fn rxx_on_zero_state() {
        let theta = 1.234;
        let u = rxx_matrix(theta);
        // column of |00>
        let col = u.column(0);
        assert!((col[0] - Complex64::new((theta / 2.0).cos(), 0.0)).norm() < 1e-12);
        assert!((col[3] - Complex64::new(0.0, (theta / 2.0).sin())).norm() < 1e-12);
        assert!(col[1].norm() < 1e-12 && col[2].norm() < 1e-12);
    }

    #[test]
    fn r_specializations_match_exactly() {
        for theta in [0.0, 0.4, -1.3, PI, 2.9] {
            let rx = rx_matrix(theta);
            let r0 = r_matrix(0.0, theta);
            assert!((rx - r0).iter().all(|e| e.norm() < 1e-15));
            let ry = ry_matrix(theta);
            let r90 = r_matrix(PI / 2.0, theta);
            assert!((ry - r90).iter().all(|e| e.norm() < 1e-15));
        }
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c = Circuit::new(2, 0);
        let u = unitary_of_circuit(&c).unwrap();
        assert!((u - UnitaryMatrix::identity(4, 4)).iter().all(|e| e.norm() < 1e-15));
    }

    #[test]
    fn same_axis_rotations_add() {
        let mut c = Circuit::new(1, 0);
        c.push(GateOp::rx(0.7, 0)).unwrap();
        c.push(GateOp::rx(1.1, 0)).unwrap();
        let u = unitary_of_circuit(&c).unwrap();
        let v = rx_matrix(1.8);
        assert!((u - v).iter().all(|e| e.norm() < 1e-12));
    }

    #[test]
    fn measurement_rejected() {
        let mut c = Circuit::new(1, 1);
        c.push(GateOp::measure(0, 0)).unwrap();
        assert_eq!(unitary_of_circuit(&c).unwrap_err(), OracleError::ContainsMeasurement);
    }

    #[test]
    fn global_phase_equality() {
        let id = UnitaryMatrix::identity(2, 2);
        let phased = id.clone() * Complex64::from_polar(1.0, PI / 7.0);
        assert!(equal_up_to_global_phase(&id, &phased, 1e-9).unwrap());
        let rx = rx_matrix(0.3);
        let ry = ry_matrix(0.3);
        assert!(!equal_up_to_global_phase(&rx, &ry, 1e-9).unwrap());
        let small = UnitaryMatrix::identity(4, 4);
        assert_eq!(
            equal_up_to_global_phase(&id, &small, 1e-9).unwrap_err(),
            OracleError::DimensionMismatch
        );
    }

    #[test]
    fn random_gates_are_unitary() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let theta = rng.gen_range(-10.0..10.0);
            let phi = rng.gen_range(-10.0..10.0);
            let g = match rng.gen_range(0..4) {
                0 => GateOp::rx(theta, 0),
                1 => GateOp::ry(theta, 1),
                2 => GateOp::r(phi, theta, 2),
                _ => GateOp::rxx(theta, 0, 2),
            };
            let u = unitary_of_gate(&g, 3).unwrap();
            assert!(unitarity_defect(&u) < 1e-10);
        }
    }

    #[test]
    fn named_gates_are_unitary() {
        for (name, params, nq) in [
            ("x", vec![], 1),
            ("y", vec![], 1),
            ("z", vec![], 1),
            ("h", vec![], 1),
            ("s", vec![], 1),
            ("sdg", vec![], 1),
            ("t", vec![], 1),
            ("tdg", vec![], 1),
            ("rz", vec![0.7], 1),
            ("u1", vec![0.4], 1),
            ("u2", vec![0.4, 1.1], 1),
            ("u3", vec![0.9, 0.4, 1.1], 1),
            ("cx", vec![], 2),
            ("cz", vec![], 2),
            ("swap", vec![], 2),
            ("ccx", vec![], 3),
        ] {
            let qubits: Vec<usize> = (0..nq).collect();
            let g = GateOp::named(name, &params, &qubits);
            let u = unitary_of_gate(&g, nq).unwrap();
            assert!(unitarity_defect(&u) < 1e-12, "{name}");
        }
        assert!(matches!(
            unitary_of_gate(&GateOp::named("bogus", &[], &[0]), 1),
            Err(OracleError::UnknownGate(_))
        ));
    }

    #[test]
    fn concatenation_equals_product() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..20 {
            let n = rng.gen_range(1..=4);
            let mut c = Circuit::new(n, 0);
            for _ in 0..rng.gen_range(0..12) {
                let q = rng.gen_range(0..n);
                let theta = rng.gen_range(-6.0..6.0);
                if n >= 2 && rng.gen_bool(0.3) {
                    let mut p = rng.gen_range(0..n);
                    while p == q {
                        p = rng.gen_range(0..n);
                    }
                    c.push(GateOp::rxx(theta, q, p)).unwrap();
                } else {
                    c.push(GateOp::rx(theta, q)).unwrap();
                }
            }
            let split = rng.gen_range(0..=c.gates.len());
            let mut left = Circuit::new(n, 0);
            left.gates = c.gates[..split].to_vec();
            let mut right = Circuit::new(n, 0);
            right.gates = c.gates[split..].to_vec();
            let whole = unitary_of_circuit(&c).unwrap();
            let parts = unitary_of_circuit(&right).unwrap() * unitary_of_circuit(&left).unwrap();
            assert!((whole - parts).iter().all(|e| e.norm() < 1e-10));
        }
    }

    #[test]
    fn cx_embedding_respects_control_target() {
        // cx with control q1, target q0 on 2 qubits: flips bit 0 when bit 1 set
        let g = GateOp::named("cx", &[], &[1, 0]);
        let u = unitary_of_gate(&g, 2).unwrap();
        // |10> (index 2) -> |11> (index 3)
        assert!((u[(3, 2)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((u[(2, 3)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((u[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((u[(1, 1)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn oracle_dimension_cap() {
        let c = Circuit::new(13, 0);
        assert_eq!(unitary_of_circuit(&c).unwrap_err(), OracleError::DimensionTooLarge(13));
    }
}
