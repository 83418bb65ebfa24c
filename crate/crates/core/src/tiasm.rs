//! TIASM instruction set, text emitter and parser.
//!
//! Grammar, one instruction per line:
//!
//! ```text
//! instr := "QUANTUM_REGISTER" INT | "CLASSICAL_REGISTER" INT
//!        | "MOVE" REG REG | "PREPARE" REG | "MEASURE" "->" "c" INT
//!        | "RX" FLOAT INT | "RY" FLOAT INT | "R" FLOAT FLOAT INT | "RXX" FLOAT
//! REG   := "STORAGE" | "TEMPSTORAGE" | "SPAM" | "COMPUTE"
//! ```
//!
//! `#` starts a comment, blank lines are ignored, files use the `.tiasm`
//! extension. Angles are printed with 12 significant digits; to keep
//! `parse_text ∘ emit_text` the identity, angles are quantized to that
//! precision when instructions are built by the parser or the compiler.

use std::fmt;

use thiserror::Error;

use crate::chip::RegisterId;

/// Rounds an angle to 12 significant digits, the emitter's precision, so a
/// printed program parses back to the identical value.
pub fn quantize_angle(x: f64) -> f64 {
    format!("{x:.11e}").parse().expect("formatted float always parses")
}

fn fmt_angle(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Instruction {
    /// Loads n ions into STORAGE.
    QuantumRegister(usize),
    /// Declares n classical result bits.
    ClassicalRegister(usize),
    Move { from: RegisterId, to: RegisterId },
    Prepare(RegisterId),
    /// Measures the SPAM ion into classical bit `cbit`.
    Measure { cbit: usize },
    /// i_stack 0 is the COMPUTE ion closest to the junction.
    Rx { theta: f64, i_stack: usize },
    Ry { theta: f64, i_stack: usize },
    R { phi: f64, theta: f64, i_stack: usize },
    /// Applies to both COMPUTE ions.
    Rxx { theta: f64 },
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::QuantumRegister(n) => write!(f, "QUANTUM_REGISTER {n}"),
            Instruction::ClassicalRegister(n) => write!(f, "CLASSICAL_REGISTER {n}"),
            Instruction::Move { from, to } => write!(f, "MOVE {from} {to}"),
            Instruction::Prepare(r) => write!(f, "PREPARE {r}"),
            Instruction::Measure { cbit } => write!(f, "MEASURE -> c{cbit}"),
            Instruction::Rx { theta, i_stack } => write!(f, "RX {} {i_stack}", fmt_angle(*theta)),
            Instruction::Ry { theta, i_stack } => write!(f, "RY {} {i_stack}", fmt_angle(*theta)),
            Instruction::R { phi, theta, i_stack } => {
                write!(f, "R {} {} {i_stack}", fmt_angle(*phi), fmt_angle(*theta))
            }
            Instruction::Rxx { theta } => write!(f, "RXX {}", fmt_angle(*theta)),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TiasmError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("instruction {index}: {message}")]
    Invariant { index: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct TiasmProgram {
    pub instructions: Vec<Instruction>,
}

impl TiasmProgram {
    pub fn new(instructions: Vec<Instruction>) -> TiasmProgram {
        TiasmProgram { instructions }
    }

    pub fn num_qubits(&self) -> usize {
        self.instructions
            .iter()
            .find_map(|i| match i {
                Instruction::QuantumRegister(n) => Some(*n),
                _ => None,
            })
            .unwrap_or(0)
    }

    pub fn num_clbits(&self) -> usize {
        self.instructions
            .iter()
            .find_map(|i| match i {
                Instruction::ClassicalRegister(n) => Some(*n),
                _ => None,
            })
            .unwrap_or(0)
    }

    pub fn count_moves(&self) -> usize {
        self.instructions.iter().filter(|i| matches!(i, Instruction::Move { .. })).count()
    }

    /// Structural invariants: one leading QUANTUM_REGISTER, at most one
    /// CLASSICAL_REGISTER directly after it, classical indices in range,
    /// i_stack in {0, 1}, PREPARE only on SPAM or COMPUTE, finite angles.
    pub fn validate(&self) -> Result<(), TiasmError> {
        let err = |index: usize, message: String| Err(TiasmError::Invariant { index, message });
        if !matches!(self.instructions.first(), Some(Instruction::QuantumRegister(_))) {
            return err(0, "program must start with QUANTUM_REGISTER".into());
        }
        let num_clbits = self.num_clbits();
        for (index, instr) in self.instructions.iter().enumerate() {
            match *instr {
                Instruction::QuantumRegister(_) => {
                    if index != 0 {
                        return err(index, "QUANTUM_REGISTER must be the first instruction".into());
                    }
                }
                Instruction::ClassicalRegister(_) => {
                    if index != 1 {
                        return err(
                            index,
                            "CLASSICAL_REGISTER must directly follow QUANTUM_REGISTER".into(),
                        );
                    }
                }
                Instruction::Move { from, to } => {
                    if from == to {
                        return err(index, format!("move from {from} to itself"));
                    }
                }
                Instruction::Prepare(r) => {
                    if !matches!(r, RegisterId::Spam | RegisterId::Compute) {
                        return err(index, format!("PREPARE targets SPAM or COMPUTE, not {r}"));
                    }
                }
                Instruction::Measure { cbit } => {
                    if cbit >= num_clbits {
                        return err(
                            index,
                            format!("classical bit c{cbit} out of range ({num_clbits} declared)"),
                        );
                    }
                }
                Instruction::Rx { theta, i_stack } | Instruction::Ry { theta, i_stack } => {
                    if i_stack > 1 {
                        return err(index, format!("i_stack {i_stack} out of range"));
                    }
                    if !theta.is_finite() {
                        return err(index, "angle must be finite".into());
                    }
                }
                Instruction::R { phi, theta, i_stack } => {
                    if i_stack > 1 {
                        return err(index, format!("i_stack {i_stack} out of range"));
                    }
                    if !phi.is_finite() || !theta.is_finite() {
                        return err(index, "angles must be finite".into());
                    }
                }
                Instruction::Rxx { theta } => {
                    if !theta.is_finite() {
                        return err(index, "angle must be finite".into());
                    }
                }
            }
        }
        Ok(())
    }

    /// One instruction per line, "\n" terminated.
    pub fn emit_text(&self) -> String {
        let mut out = String::new();
        for instr in &self.instructions {
            out.push_str(&instr.to_string());
            out.push('\n');
        }
        out
    }

    /// Inverse of [`emit_text`](Self::emit_text); tolerates blank lines and
    /// `#` comments and validates the program invariants.
    pub fn parse_text(text: &str) -> Result<TiasmProgram, TiasmError> {
        let mut instructions = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let err = |message: String| Err(TiasmError::Parse { line, message });
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            let parse_reg = |tok: &str| -> Result<RegisterId, TiasmError> {
                RegisterId::from_name(tok).ok_or(TiasmError::Parse {
                    line,
                    message: format!("unknown register {tok:?}"),
                })
            };
            let parse_angle = |tok: &str| -> Result<f64, TiasmError> {
                let v: f64 = tok.parse().map_err(|_| TiasmError::Parse {
                    line,
                    message: format!("bad angle {tok:?}"),
                })?;
                if !v.is_finite() {
                    return Err(TiasmError::Parse { line, message: "angle must be finite".into() });
                }
                Ok(quantize_angle(v))
            };
            let parse_int = |tok: &str| -> Result<usize, TiasmError> {
                tok.parse().map_err(|_| TiasmError::Parse {
                    line,
                    message: format!("bad integer {tok:?}"),
                })
            };
            let instr = match (tokens[0], tokens.len()) {
                ("QUANTUM_REGISTER", 2) => Instruction::QuantumRegister(parse_int(tokens[1])?),
                ("CLASSICAL_REGISTER", 2) => Instruction::ClassicalRegister(parse_int(tokens[1])?),
                ("MOVE", 3) => {
                    Instruction::Move { from: parse_reg(tokens[1])?, to: parse_reg(tokens[2])? }
                }
                ("PREPARE", 2) => Instruction::Prepare(parse_reg(tokens[1])?),
                ("MEASURE", 3) if tokens[1] == "->" => {
                    let tok = tokens[2];
                    let Some(number) = tok.strip_prefix('c') else {
                        return err(format!("expected classical bit like c0, found {tok:?}"));
                    };
                    Instruction::Measure { cbit: parse_int(number)? }
                }
                ("RX", 3) => {
                    Instruction::Rx { theta: parse_angle(tokens[1])?, i_stack: parse_int(tokens[2])? }
                }
                ("RY", 3) => {
                    Instruction::Ry { theta: parse_angle(tokens[1])?, i_stack: parse_int(tokens[2])? }
                }
                ("R", 4) => Instruction::R {
                    phi: parse_angle(tokens[1])?,
                    theta: parse_angle(tokens[2])?,
                    i_stack: parse_int(tokens[3])?,
                },
                ("RXX", 2) => Instruction::Rxx { theta: parse_angle(tokens[1])? },
                _ => return err(format!("cannot parse instruction {content:?}")),
            };
            instructions.push(instr);
        }
        let program = TiasmProgram { instructions };
        program.validate()?;
        Ok(program)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_program() -> TiasmProgram {
        TiasmProgram::new(vec![
            Instruction::QuantumRegister(3),
            Instruction::ClassicalRegister(2),
            Instruction::Move { from: RegisterId::Storage, to: RegisterId::Compute },
            Instruction::Prepare(RegisterId::Compute),
            Instruction::Rx { theta: quantize_angle(1.25), i_stack: 0 },
            Instruction::Move { from: RegisterId::Storage, to: RegisterId::Compute },
            Instruction::Prepare(RegisterId::Compute),
            Instruction::R { phi: quantize_angle(0.5), theta: quantize_angle(-0.75), i_stack: 1 },
            Instruction::Rxx { theta: quantize_angle(0.25) },
            Instruction::Move { from: RegisterId::Compute, to: RegisterId::Spam },
            Instruction::Prepare(RegisterId::Spam),
            Instruction::Measure { cbit: 1 },
        ])
    }

    #[test]
    fn emit_forms() {
        assert_eq!(
            TiasmProgram::new(vec![Instruction::QuantumRegister(2)]).emit_text(),
            "QUANTUM_REGISTER 2\n"
        );
        let mv = Instruction::Move { from: RegisterId::Storage, to: RegisterId::Compute };
        assert_eq!(mv.to_string(), "MOVE STORAGE COMPUTE");
        assert_eq!(Instruction::Measure { cbit: 3 }.to_string(), "MEASURE -> c3");
        assert_eq!(
            Instruction::Rx { theta: 1.5, i_stack: 0 }.to_string(),
            "RX 1.50000000000e0 0"
        );
    }

    #[test]
    fn round_trip_sample() {
        let p = sample_program();
        let text = p.emit_text();
        let q = TiasmProgram::parse_text(&text).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn comments_and_blanks_tolerated() {
        let text = "# header\nQUANTUM_REGISTER 1\n\n  # indented comment\nMOVE STORAGE COMPUTE # trailing\n";
        let p = TiasmProgram::parse_text(text).unwrap();
        assert_eq!(p.instructions.len(), 2);
    }

    #[test]
    fn same_register_move_rejected() {
        let err = TiasmProgram::parse_text("QUANTUM_REGISTER 1\nMOVE STORAGE STORAGE\n")
            .unwrap_err();
        assert!(matches!(err, TiasmError::Invariant { index: 1, .. }));
    }

    #[test]
    fn i_stack_out_of_range_rejected() {
        let err = TiasmProgram::parse_text("QUANTUM_REGISTER 1\nRX 1.5 2\n").unwrap_err();
        assert!(matches!(err, TiasmError::Invariant { index: 1, .. }));
    }

    #[test]
    fn header_invariants() {
        assert!(TiasmProgram::parse_text("MOVE STORAGE COMPUTE\n").is_err());
        assert!(
            TiasmProgram::parse_text("QUANTUM_REGISTER 1\nQUANTUM_REGISTER 1\n").is_err()
        );
        assert!(TiasmProgram::parse_text(
            "QUANTUM_REGISTER 1\nMOVE STORAGE SPAM\nCLASSICAL_REGISTER 1\n"
        )
        .is_err());
        // measure needs a declared classical register
        assert!(TiasmProgram::parse_text("QUANTUM_REGISTER 1\nMEASURE -> c0\n").is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = TiasmProgram::parse_text("QUANTUM_REGISTER 1\nWIGGLE 3\n").unwrap_err();
        assert_eq!(err, TiasmError::Parse { line: 2, message: "cannot parse instruction \"WIGGLE 3\"".into() });
        let err = TiasmProgram::parse_text("QUANTUM_REGISTER 1\nPREPARE STORAGE\n").unwrap_err();
        assert!(matches!(err, TiasmError::Invariant { index: 1, .. }));
    }

    #[test]
    fn count_moves_static() {
        assert_eq!(TiasmProgram::new(vec![Instruction::QuantumRegister(1)]).count_moves(), 0);
        assert_eq!(sample_program().count_moves(), 3);
        let round = TiasmProgram::parse_text(&sample_program().emit_text()).unwrap();
        assert_eq!(round.count_moves(), 3);
    }

    #[test]
    fn quantize_is_idempotent() {
        for x in [0.0, 1.0, std::f64::consts::PI, -2.75e-7, 123456.789, f64::MIN_POSITIVE] {
            let q = quantize_angle(x);
            assert_eq!(q, quantize_angle(q));
            assert!((q - x).abs() <= x.abs() * 1e-11 + f64::MIN_POSITIVE);
        }
    }

    fn arb_register() -> impl Strategy<Value = RegisterId> {
        prop::sample::select(RegisterId::ALL.to_vec())
    }

    fn arb_instruction() -> impl Strategy<Value = Instruction> {
        let angle = (-50.0f64..50.0).prop_map(quantize_angle);
        prop_oneof![
            (arb_register(), arb_register())
                .prop_filter("distinct", |(a, b)| a != b)
                .prop_map(|(from, to)| Instruction::Move { from, to }),
            prop::sample::select(vec![RegisterId::Spam, RegisterId::Compute])
                .prop_map(Instruction::Prepare),
            (0usize..4).prop_map(|cbit| Instruction::Measure { cbit }),
            (angle.clone(), 0usize..2).prop_map(|(theta, i_stack)| Instruction::Rx {
                theta,
                i_stack
            }),
            (angle.clone(), 0usize..2).prop_map(|(theta, i_stack)| Instruction::Ry {
                theta,
                i_stack
            }),
            (angle.clone(), angle.clone(), 0usize..2)
                .prop_map(|(phi, theta, i_stack)| Instruction::R { phi, theta, i_stack }),
            angle.prop_map(|theta| Instruction::Rxx { theta }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn parse_emit_identity(instrs in prop::collection::vec(arb_instruction(), 0..40)) {
            let mut all = vec![Instruction::QuantumRegister(5), Instruction::ClassicalRegister(4)];
            all.extend(instrs);
            let p = TiasmProgram::new(all);
            p.validate().unwrap();
            let q = TiasmProgram::parse_text(&p.emit_text()).unwrap();
            prop_assert_eq!(p, q);
        }
    }
}
