//! Backend compiler, assembly language and virtual machine for a
//! single-junction QCCD trapped-ion chip.
//!
//! The pipeline turns an OpenQASM 2.0 circuit into TIASM assembly:
//!
//! 1. [`qasm`] parses the source into a [`circuit::Circuit`].
//! 2. [`lowering`] rewrites every gate into the native set
//!    {RX, RY, R, RXX}.
//! 3. [`optimizer`] merges rotations, cancels inverses and applies the
//!    RX·RY·RX → R template.
//! 4. [`depgraph`] builds the gate-dependency DAG and enumerates circuit
//!    paths through it.
//! 5. [`orchestrator`] scores candidate paths by simulated shuttle count,
//!    routes ions with the configured heuristics and emits [`tiasm`]
//!    instructions.
//!
//! The [`vm`] executes TIASM programs (chip legality plus a state vector for
//! up to 12 ions) and is used to prove compiled programs equivalent to their
//! source circuits. [`bench`] generates random-circuit datasets and runs the
//! strategy comparison matrices.

pub mod bench;
pub mod chip;
pub mod circuit;
pub mod depgraph;
pub mod lowering;
pub mod optimizer;
pub mod orchestrator;
pub mod qasm;
pub mod tiasm;
pub mod unitary;
pub mod vm;

pub use chip::{ChipConfig, ChipError, ChipState, IonId, RegisterId};
pub use circuit::{Circuit, CircuitError, GateKind, GateOp, QubitId};
pub use orchestrator::{compile, CompileError, CompileStats, HeuristicFlags, Mode, StrategyConfig};
pub use tiasm::{Instruction, TiasmProgram};
