//! TIASM virtual machine.
//!
//! Executes a program against the chip model, enforcing move legality, and
//! maintains a state vector over ion-indexed qubits (ion i is bit i of the
//! basis index) for up to 12 ions. Beyond that, use [`check_legality`] which
//! skips amplitudes entirely and works at the full 50-ion scale.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::chip::{ChipConfig, ChipState, IonId, RegisterId};
use crate::tiasm::{Instruction, TiasmProgram};

pub const MAX_SIM_IONS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VmErrorKind {
    IllegalMove,
    GateOutsideCompute,
    RxxArity,
    MeasureEmptySpam,
    ClassicalIndexOutOfRange,
}

impl VmErrorKind {
    pub fn name(self) -> &'static str {
        match self {
            VmErrorKind::IllegalMove => "IllegalMove",
            VmErrorKind::GateOutsideCompute => "GateOutsideCompute",
            VmErrorKind::RxxArity => "RxxArity",
            VmErrorKind::MeasureEmptySpam => "MeasureEmptySpam",
            VmErrorKind::ClassicalIndexOutOfRange => "ClassicalIndexOutOfRange",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VmError {
    pub kind: VmErrorKind,
    /// Index of the failing instruction within the program.
    pub index: usize,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct VmResult {
    pub bits: Vec<u8>,
    /// Chip occupancy when execution stopped.
    pub chip: Option<ChipState>,
    pub moves_executed: usize,
    /// Amplitudes captured just before the first MEASURE (or at program end
    /// when nothing is measured). Only present with `capture_state`.
    pub snapshot: Option<Vec<Complex64>>,
    pub error: Option<VmError>,
}

impl VmResult {
    /// The spec'd result shape: `{bits, moves, error?}`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = json!({
            "bits": self.bits,
            "moves": self.moves_executed,
        });
        if let Some(err) = &self.error {
            obj["error"] = json!({
                "category": err.kind.name(),
                "index": err.index,
                "message": err.message,
            });
        }
        obj
    }
}

/// Number of MOVE instructions in the program text. Programs are straight
/// line, so the static count equals the dynamic count.
pub fn count_moves(p: &TiasmProgram) -> usize {
    p.count_moves()
}

struct Vm {
    chip: Option<ChipState>,
    config: ChipConfig,
    amps: Option<Vec<Complex64>>,
    bits: Vec<u8>,
    moves: usize,
    rng: ChaCha8Rng,
    simulate: bool,
    /// Ion that most recently entered COMPUTE; target of PREPARE COMPUTE.
    last_arrival: Option<IonId>,
}

impl Vm {
    fn ion_bit(&self, ion: IonId) -> usize {
        1 << ion.0
    }

    fn apply_1q(&mut self, ion: IonId, m: [[Complex64; 2]; 2]) {
        let Some(amps) = self.amps.as_mut() else { return };
        let mask = 1usize << ion.0;
        for idx in 0..amps.len() {
            if idx & mask == 0 {
                let a0 = amps[idx];
                let a1 = amps[idx | mask];
                amps[idx] = m[0][0] * a0 + m[0][1] * a1;
                amps[idx | mask] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn apply_rxx(&mut self, a: IonId, b: IonId, theta: f64) {
        let Some(amps) = self.amps.as_mut() else { return };
        let (s, c) = (theta / 2.0).sin_cos();
        let (c, is) = (Complex64::new(c, 0.0), Complex64::new(0.0, s));
        let ma = 1usize << a.0;
        let mb = 1usize << b.0;
        for idx in 0..amps.len() {
            if idx & ma == 0 && idx & mb == 0 {
                let i00 = idx;
                let i11 = idx | ma | mb;
                let i01 = idx | ma;
                let i10 = idx | mb;
                let (a00, a11) = (amps[i00], amps[i11]);
                amps[i00] = c * a00 + is * a11;
                amps[i11] = is * a00 + c * a11;
                let (a01, a10) = (amps[i01], amps[i10]);
                amps[i01] = c * a01 + is * a10;
                amps[i10] = is * a01 + c * a10;
            }
        }
    }

    fn prob_one(&self, ion: IonId) -> f64 {
        let Some(amps) = self.amps.as_ref() else { return 0.0 };
        let mask = 1usize << ion.0;
        amps.iter()
            .enumerate()
            .filter(|(idx, _)| idx & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects `ion` onto `outcome` and renormalizes.
    fn collapse(&mut self, ion: IonId, outcome: u8, p: f64) {
        let Some(amps) = self.amps.as_mut() else { return };
        let mask = 1usize << ion.0;
        let norm = p.sqrt();
        for (idx, a) in amps.iter_mut().enumerate() {
            let bit_set = idx & mask != 0;
            if bit_set == (outcome == 1) {
                *a /= norm;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Born-rule measurement of the ion; returns the outcome bit.
    fn measure_ion(&mut self, ion: IonId) -> u8 {
        if self.amps.is_none() {
            return 0;
        }
        let p1 = self.prob_one(ion).clamp(0.0, 1.0);
        let u: f64 = self.rng.gen();
        let outcome = u8::from(u < p1);
        let p = if outcome == 1 { p1 } else { 1.0 - p1 };
        self.collapse(ion, outcome, p.max(f64::MIN_POSITIVE));
        outcome
    }

    /// Projective reset of the ion to |0⟩: measure, then flip a 1 outcome.
    fn reset_ion(&mut self, ion: IonId) {
        if self.amps.is_none() {
            return;
        }
        let outcome = self.measure_ion(ion);
        if outcome == 1 {
            let zero = Complex64::new(0.0, 0.0);
            let one = Complex64::new(1.0, 0.0);
            self.apply_1q(ion, [[zero, one], [one, zero]]);
        }
    }
}

fn run(
    p: &TiasmProgram,
    config: &ChipConfig,
    seed: u64,
    capture_state: bool,
    simulate: bool,
) -> VmResult {
    let mut vm = Vm {
        chip: None,
        config: config.clone(),
        amps: None,
        bits: Vec::new(),
        moves: 0,
        rng: ChaCha8Rng::seed_from_u64(seed),
        simulate,
        last_arrival: None,
    };
    let mut snapshot: Option<Vec<Complex64>> = None;
    let mut error: Option<VmError> = None;
    let num_clbits = p.num_clbits();

    'program: for (index, instr) in p.instructions.iter().enumerate() {
        let fail = |kind: VmErrorKind, message: String| VmError { kind, index, message };
        match *instr {
            Instruction::QuantumRegister(n) => match ChipState::load(&vm.config, n) {
                Ok(chip) => {
                    vm.chip = Some(chip);
                    if vm.simulate && n <= MAX_SIM_IONS {
                        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
                        amps[0] = Complex64::new(1.0, 0.0);
                        vm.amps = Some(amps);
                    }
                }
                Err(e) => {
                    error = Some(fail(VmErrorKind::IllegalMove, e.to_string()));
                    break 'program;
                }
            },
            Instruction::ClassicalRegister(n) => {
                vm.bits = vec![0; n];
            }
            Instruction::Move { from, to } => {
                let Some(chip) = vm.chip.as_mut() else {
                    error = Some(fail(VmErrorKind::IllegalMove, "no ions loaded".into()));
                    break 'program;
                };
                let arriving = chip.top(from);
                match chip.apply_move(from, to) {
                    Ok(()) => {
                        vm.moves += 1;
                        if to == RegisterId::Compute {
                            vm.last_arrival = arriving;
                        }
                    }
                    Err(e) => {
                        error = Some(fail(VmErrorKind::IllegalMove, e.to_string()));
                        break 'program;
                    }
                }
            }
            Instruction::Prepare(RegisterId::Compute) => {
                let Some(chip) = vm.chip.as_ref() else {
                    error = Some(fail(VmErrorKind::GateOutsideCompute, "no ions loaded".into()));
                    break 'program;
                };
                if chip.occupancy(RegisterId::Compute) == 0 {
                    error = Some(fail(
                        VmErrorKind::GateOutsideCompute,
                        "PREPARE COMPUTE with an empty COMPUTE register".into(),
                    ));
                    break 'program;
                }
                // prepares the most recently arrived ion (top of stack when
                // nothing has moved since).
                let ion = vm
                    .last_arrival
                    .filter(|&i| chip.stack_top_down(RegisterId::Compute).any(|x| x == i))
                    .or_else(|| chip.top(RegisterId::Compute))
                    .unwrap();
                vm.reset_ion(ion);
            }
            // a laser pulse readying the SPAM ion; no state-level effect
            Instruction::Prepare(_) => {}
            Instruction::Rx { theta, i_stack }
            | Instruction::Ry { theta, i_stack }
            | Instruction::R { theta, i_stack, .. } => {
                let Some(chip) = vm.chip.as_ref() else {
                    error = Some(fail(VmErrorKind::GateOutsideCompute, "no ions loaded".into()));
                    break 'program;
                };
                let slot: Vec<IonId> = chip.stack_top_down(RegisterId::Compute).collect();
                let Some(&ion) = slot.get(i_stack) else {
                    error = Some(fail(
                        VmErrorKind::GateOutsideCompute,
                        format!("no ion at COMPUTE slot {i_stack}"),
                    ));
                    break 'program;
                };
                let (s, c) = (theta / 2.0).sin_cos();
                let m = match instr {
                    Instruction::Rx { .. } => [
                        [Complex64::new(c, 0.0), Complex64::new(0.0, s)],
                        [Complex64::new(0.0, s), Complex64::new(c, 0.0)],
                    ],
                    Instruction::Ry { .. } => [
                        [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
                        [Complex64::new(-s, 0.0), Complex64::new(c, 0.0)],
                    ],
                    Instruction::R { phi, .. } => {
                        let en = Complex64::from_polar(1.0, -phi);
                        let ep = Complex64::from_polar(1.0, *phi);
                        [
                            [Complex64::new(c, 0.0), Complex64::new(0.0, s) * en],
                            [Complex64::new(0.0, s) * ep, Complex64::new(c, 0.0)],
                        ]
                    }
                    _ => unreachable!(),
                };
                vm.apply_1q(ion, m);
            }
            Instruction::Rxx { theta } => {
                let Some(chip) = vm.chip.as_ref() else {
                    error = Some(fail(VmErrorKind::RxxArity, "no ions loaded".into()));
                    break 'program;
                };
                let ions: Vec<IonId> = chip.stack_top_down(RegisterId::Compute).collect();
                if ions.len() != 2 {
                    error = Some(fail(
                        VmErrorKind::RxxArity,
                        format!("RXX needs 2 ions in COMPUTE, found {}", ions.len()),
                    ));
                    break 'program;
                }
                vm.apply_rxx(ions[0], ions[1], theta);
            }
            Instruction::Measure { cbit } => {
                if capture_state && snapshot.is_none() {
                    snapshot = vm.amps.clone();
                }
                let Some(chip) = vm.chip.as_ref() else {
                    error = Some(fail(VmErrorKind::MeasureEmptySpam, "no ions loaded".into()));
                    break 'program;
                };
                let Some(ion) = chip.top(RegisterId::Spam) else {
                    error = Some(fail(
                        VmErrorKind::MeasureEmptySpam,
                        "MEASURE with an empty SPAM register".into(),
                    ));
                    break 'program;
                };
                if cbit >= num_clbits {
                    error = Some(fail(
                        VmErrorKind::ClassicalIndexOutOfRange,
                        format!("classical bit c{cbit} out of range"),
                    ));
                    break 'program;
                }
                let outcome = vm.measure_ion(ion);
                vm.bits[cbit] = outcome;
            }
        }
    }

    if capture_state && snapshot.is_none() && error.is_none() {
        snapshot = vm.amps.clone();
    }
    VmResult {
        bits: vm.bits,
        chip: vm.chip,
        moves_executed: vm.moves,
        snapshot,
        error,
    }
}

/// Executes a program with the default chip. The state vector is maintained
/// for programs of at most [`MAX_SIM_IONS`] ions; larger programs run with
/// legality checking only.
pub fn execute(p: &TiasmProgram, seed: u64, capture_state: bool) -> VmResult {
    execute_with_config(p, &ChipConfig::default(), seed, capture_state)
}

pub fn execute_with_config(
    p: &TiasmProgram,
    config: &ChipConfig,
    seed: u64,
    capture_state: bool,
) -> VmResult {
    run(p, config, seed, capture_state, true)
}

/// Chip-legality check without amplitude simulation; works at full scale.
pub fn check_legality(p: &TiasmProgram) -> Result<(), VmError> {
    check_legality_with_config(p, &ChipConfig::default())
}

pub fn check_legality_with_config(p: &TiasmProgram, config: &ChipConfig) -> Result<(), VmError> {
    match run(p, config, 0, false, false).error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tiasm::quantize_angle;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn parse(text: &str) -> TiasmProgram {
        TiasmProgram::parse_text(text).unwrap()
    }

    fn norm(amps: &[Complex64]) -> f64 {
        amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn rxx_on_fresh_pair_gives_bell_like_state() {
        // series-expansion expectation: cos(π/4)|00> + i sin(π/4)|11>
        let text = format!(
            "QUANTUM_REGISTER 2\nMOVE STORAGE COMPUTE\nPREPARE COMPUTE\n\
             MOVE STORAGE COMPUTE\nPREPARE COMPUTE\nRXX {}\n",
            quantize_angle(FRAC_PI_2)
        );
        let r = execute(&parse(&text), 7, true);
        assert!(r.error.is_none());
        let amps = r.snapshot.unwrap();
        let c = Complex64::new((PI / 4.0).cos(), 0.0);
        let is = Complex64::new(0.0, (PI / 4.0).sin());
        assert!((amps[0] - c).norm() < 1e-9);
        assert!((amps[3] - is).norm() < 1e-9);
        assert!(amps[1].norm() < 1e-12 && amps[2].norm() < 1e-12);
        assert!((norm(&amps) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rxx_arity_enforced() {
        let text = "QUANTUM_REGISTER 2\nMOVE STORAGE COMPUTE\nPREPARE COMPUTE\nRXX 0.5\n";
        let r = execute(&parse(text), 0, false);
        let err = r.error.unwrap();
        assert_eq!(err.kind, VmErrorKind::RxxArity);
        assert_eq!(err.index, 3);
    }

    #[test]
    fn illegal_moves_halt_without_partial_effects() {
        let text = "QUANTUM_REGISTER 1\nMOVE STORAGE COMPUTE\nMOVE STORAGE COMPUTE\n";
        let r = execute(&parse(text), 0, false);
        let err = r.error.unwrap();
        assert_eq!(err.kind, VmErrorKind::IllegalMove);
        assert_eq!(err.index, 2);
        assert_eq!(r.moves_executed, 1);
        let chip = r.chip.unwrap();
        assert_eq!(chip.occupancy(RegisterId::Compute), 1);
        assert_eq!(chip.occupancy(RegisterId::Storage), 0);
    }

    #[test]
    fn gate_outside_compute() {
        let text = "QUANTUM_REGISTER 2\nMOVE STORAGE COMPUTE\nPREPARE COMPUTE\nRX 0.5 1\n";
        let r = execute(&parse(text), 0, false);
        assert_eq!(r.error.unwrap().kind, VmErrorKind::GateOutsideCompute);
    }

    #[test]
    fn measure_empty_spam() {
        let text = "QUANTUM_REGISTER 1\nCLASSICAL_REGISTER 1\nMEASURE -> c0\n";
        let r = execute(&parse(text), 0, false);
        assert_eq!(r.error.unwrap().kind, VmErrorKind::MeasureEmptySpam);
    }

    #[test]
    fn deterministic_measurement_of_flipped_ion() {
        // RX(π) sends |0> to i|1>; the measurement must read 1 for any seed
        let text = format!(
            "QUANTUM_REGISTER 1\nCLASSICAL_REGISTER 1\nMOVE STORAGE COMPUTE\nPREPARE COMPUTE\n\
             RX {} 0\nMOVE COMPUTE SPAM\nPREPARE SPAM\nMEASURE -> c0\nMOVE SPAM STORAGE\n",
            quantize_angle(PI)
        );
        for seed in 0..20 {
            let r = execute(&parse(&text), seed, false);
            assert!(r.error.is_none(), "{:?}", r.error);
            assert_eq!(r.bits, vec![1]);
            assert_eq!(r.moves_executed, 3);
        }
    }

    #[test]
    fn measurement_statistics_on_equal_superposition() {
        // RX(π/2)|0> = (|0> + i|1>)/√2: outcome-1 frequency near one half
        let text = format!(
            "QUANTUM_REGISTER 1\nCLASSICAL_REGISTER 1\nMOVE STORAGE COMPUTE\nPREPARE COMPUTE\n\
             RX {} 0\nMOVE COMPUTE SPAM\nPREPARE SPAM\nMEASURE -> c0\n",
            quantize_angle(FRAC_PI_2)
        );
        let p = parse(&text);
        let ones: usize = (0..10000u64).map(|seed| execute(&p, seed, false).bits[0] as usize).sum();
        let freq = ones as f64 / 10000.0;
        assert!((0.47..=0.53).contains(&freq), "freq = {freq}");
    }

    #[test]
    fn prepare_compute_resets_most_recent_arrival() {
        // flip ion 0, move it out and back: PREPARE must reset it to |0>
        let text = format!(
            "QUANTUM_REGISTER 2\nCLASSICAL_REGISTER 1\nMOVE STORAGE COMPUTE\nPREPARE COMPUTE\n\
             RX {} 0\nMOVE COMPUTE TEMPSTORAGE\nMOVE TEMPSTORAGE COMPUTE\nPREPARE COMPUTE\n\
             MOVE COMPUTE SPAM\nPREPARE SPAM\nMEASURE -> c0\n",
            quantize_angle(PI)
        );
        for seed in 0..10 {
            let r = execute(&parse(&text), seed, false);
            assert!(r.error.is_none());
            assert_eq!(r.bits, vec![0], "seed {seed}");
        }
    }

    #[test]
    fn norm_preserved_through_program() {
        let text = format!(
            "QUANTUM_REGISTER 3\nMOVE STORAGE COMPUTE\nPREPARE COMPUTE\nRX {a} 0\n\
             MOVE STORAGE COMPUTE\nPREPARE COMPUTE\nRY {b} 0\nR {a} {b} 1\nRXX {c}\n",
            a = quantize_angle(0.7),
            b = quantize_angle(-1.2),
            c = quantize_angle(2.1)
        );
        let r = execute(&parse(&text), 0, true);
        assert!(r.error.is_none());
        assert!((norm(&r.snapshot.unwrap()) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ion_relabeling_commutes_with_execution() {
        // program A: ion0 gets RX(a) (slot at bottom), ion1 gets RY(b);
        // program B swaps the fetch order so the roles of the ions swap.
        let (a, b) = (quantize_angle(0.9), quantize_angle(-0.4));
        let prog_a = format!(
            "QUANTUM_REGISTER 2\nMOVE STORAGE COMPUTE\nPREPARE COMPUTE\n\
             MOVE STORAGE COMPUTE\nPREPARE COMPUTE\nRX {a} 1\nRY {b} 0\nRXX 0.6\n"
        );
        // moving ion0 to TEMPSTORAGE first reverses the arrival order, so the
        // same slot indices now address the other ion: RX lands on ion1
        let prog_b = format!(
            "QUANTUM_REGISTER 2\nMOVE STORAGE TEMPSTORAGE\nMOVE STORAGE COMPUTE\nPREPARE COMPUTE\n\
             MOVE TEMPSTORAGE COMPUTE\nPREPARE COMPUTE\nRX {a} 1\nRY {b} 0\nRXX 0.6\n"
        );
        let ra = execute(&parse(&prog_a), 0, true);
        let rb = execute(&parse(&prog_b), 0, true);
        let sa = ra.snapshot.unwrap();
        let sb = rb.snapshot.unwrap();
        // in program A ion0 carries RX; in program B ion1 does: permute bits
        for idx in 0..4 {
            let swapped = ((idx & 1) << 1) | ((idx >> 1) & 1);
            assert!((sa[idx] - sb[swapped]).norm() < 1e-10, "idx {idx}");
        }
    }

    #[test]
    fn legality_only_mode_handles_many_ions() {
        let mut text = String::from("QUANTUM_REGISTER 50\n");
        for _ in 0..25 {
            text.push_str("MOVE STORAGE TEMPSTORAGE\n");
        }
        let p = parse(&text);
        check_legality(&p).unwrap();
        let r = execute(&p, 0, true);
        assert!(r.error.is_none());
        assert!(r.snapshot.is_none(), "no amplitudes beyond the sim cap");
        assert_eq!(r.moves_executed, 25);
    }

    #[test]
    fn snapshot_taken_before_first_measure() {
        let text = format!(
            "QUANTUM_REGISTER 1\nCLASSICAL_REGISTER 1\nMOVE STORAGE COMPUTE\nPREPARE COMPUTE\n\
             RX {} 0\nMOVE COMPUTE SPAM\nPREPARE SPAM\nMEASURE -> c0\n",
            quantize_angle(FRAC_PI_2)
        );
        let r = execute(&parse(&text), 3, true);
        let snap = r.snapshot.unwrap();
        // superposition is intact in the snapshot even though the measurement collapsed it
        assert!((snap[0].norm() - (0.5f64).sqrt()).abs() < 1e-9);
        assert!((snap[1].norm() - (0.5f64).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn result_json_shape() {
        let text = "QUANTUM_REGISTER 1\nMOVE STORAGE SPAM\n";
        let r = execute(&parse(text), 0, false);
        let v = r.to_json();
        assert_eq!(v["moves"], 1);
        assert!(v.get("error").is_none());
        let bad = execute(&parse("QUANTUM_REGISTER 1\nRXX 0.1\n"), 0, false);
        let v = bad.to_json();
        assert_eq!(v["error"]["category"], "RxxArity");
        assert_eq!(v["error"]["index"], 1);
    }
}
