//! Chip model: four trap registers joined by a single X-junction.
//!
//! Every register behaves as a stack whose top element is the ion closest to
//! the junction. A move pops the source top and pushes it onto the
//! destination; ions can never swap places inside a register.

use std::fmt;
use std::path::Path;

use thiserror::Error;

/// The four trap zones of the chip.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegisterId {
    Storage,
    TempStorage,
    Spam,
    Compute,
}

impl RegisterId {
    pub const ALL: [RegisterId; 4] = [
        RegisterId::Storage,
        RegisterId::TempStorage,
        RegisterId::Spam,
        RegisterId::Compute,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RegisterId::Storage => "STORAGE",
            RegisterId::TempStorage => "TEMPSTORAGE",
            RegisterId::Spam => "SPAM",
            RegisterId::Compute => "COMPUTE",
        }
    }

    pub fn from_name(s: &str) -> Option<RegisterId> {
        match s {
            "STORAGE" => Some(RegisterId::Storage),
            "TEMPSTORAGE" => Some(RegisterId::TempStorage),
            "SPAM" => Some(RegisterId::Spam),
            "COMPUTE" => Some(RegisterId::Compute),
            _ => None,
        }
    }

    /// The storage register paired with this one for blocker shuffling.
    pub fn opposite_storage(self) -> Option<RegisterId> {
        match self {
            RegisterId::Storage => Some(RegisterId::TempStorage),
            RegisterId::TempStorage => Some(RegisterId::Storage),
            _ => None,
        }
    }

    fn index(self) -> usize {
        match self {
            RegisterId::Storage => 0,
            RegisterId::TempStorage => 1,
            RegisterId::Spam => 2,
            RegisterId::Compute => 3,
        }
    }
}

impl fmt::Display for RegisterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Physical ion identity, stable for the lifetime of a program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IonId(pub usize);

impl fmt::Display for IonId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ion{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChipError {
    #[error("move source register {0} is empty")]
    EmptySource(RegisterId),
    #[error("register {0} is at capacity ({1})")]
    CapacityExceeded(RegisterId, usize),
    #[error("move source and destination are both {0}")]
    SameRegister(RegisterId),
    #[error("{0} is not placed on the chip")]
    UnknownIon(IonId),
    #[error("cannot load {0} ions (limit {1})")]
    TooManyIons(usize, usize),
    #[error("invalid chip configuration: {0}")]
    BadConfig(String),
}

/// Per-register capacities. Defaults are the QVLS-Q1 values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChipConfig {
    capacities: [usize; 4],
    pub max_total_ions: usize,
}

impl Default for ChipConfig {
    fn default() -> Self {
        let mut capacities = [0; 4];
        capacities[RegisterId::Storage.index()] = 50;
        capacities[RegisterId::TempStorage.index()] = 50;
        capacities[RegisterId::Spam.index()] = 1;
        capacities[RegisterId::Compute.index()] = 2;
        ChipConfig {
            capacities,
            max_total_ions: 50,
        }
    }
}

impl ChipConfig {
    pub fn capacity(&self, r: RegisterId) -> usize {
        self.capacities[r.index()]
    }

    pub fn set_capacity(&mut self, r: RegisterId, cap: usize) {
        self.capacities[r.index()] = cap;
    }

    /// Parses a `NAME = CAPACITY` per line config. Unlisted registers keep
    /// their defaults; `#` starts a comment.
    pub fn from_config_str(text: &str) -> Result<ChipConfig, ChipError> {
        let mut cfg = ChipConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.splitn(2, '=');
            let key = parts.next().unwrap_or("").trim();
            let value = parts.next().map(str::trim);
            let value = match value {
                Some(v) => v,
                None => {
                    return Err(ChipError::BadConfig(format!(
                        "line {}: expected NAME = CAPACITY",
                        lineno + 1
                    )))
                }
            };
            let cap: usize = value.parse().map_err(|_| {
                ChipError::BadConfig(format!("line {}: bad capacity {value:?}", lineno + 1))
            })?;
            match RegisterId::from_name(key) {
                Some(r) => cfg.set_capacity(r, cap),
                None if key == "MAX_IONS" => cfg.max_total_ions = cap,
                None => {
                    return Err(ChipError::BadConfig(format!(
                        "line {}: unknown register {key:?}",
                        lineno + 1
                    )))
                }
            }
        }
        if cfg.capacities.iter().any(|&c| c == 0) {
            return Err(ChipError::BadConfig("capacities must be positive".into()));
        }
        Ok(cfg)
    }

    pub fn from_config_file(path: &Path) -> Result<ChipConfig, ChipError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ChipError::BadConfig(format!("{}: {e}", path.display())))?;
        Self::from_config_str(&text)
    }
}

/// Snapshot of ion placement plus the qubit assignment built up during
/// compilation. Cloning is cheap and expected: path scoring simulates moves
/// on clones.
#[derive(Clone, Debug, PartialEq)]
pub struct ChipState {
    config: ChipConfig,
    /// One stack per register; the last element is the top (junction side).
    stacks: [Vec<IonId>; 4],
    qubit_to_ion: Vec<Option<IonId>>,
    ion_to_qubit: Vec<Option<usize>>,
    prepared: Vec<bool>,
}

impl ChipState {
    /// Loads `n` ions into STORAGE with ion 0 on top; other registers empty.
    pub fn load(config: &ChipConfig, n: usize) -> Result<ChipState, ChipError> {
        let limit = config
            .max_total_ions
            .min(config.capacity(RegisterId::Storage));
        if n > limit {
            return Err(ChipError::TooManyIons(n, limit));
        }
        let mut stacks: [Vec<IonId>; 4] = Default::default();
        stacks[RegisterId::Storage.index()] = (0..n).rev().map(IonId).collect();
        Ok(ChipState {
            config: config.clone(),
            stacks,
            qubit_to_ion: Vec::new(),
            ion_to_qubit: vec![None; n],
            prepared: vec![false; n],
        })
    }

    /// Builds a state from explicit stacks (given top-first) and qubit
    /// assignments. Ions must be exactly 0..total.
    pub fn from_parts(
        config: &ChipConfig,
        stacks_top_first: [&[IonId]; 4],
        assignment: &[(usize, IonId)],
    ) -> Result<ChipState, ChipError> {
        let total: usize = stacks_top_first.iter().map(|s| s.len()).sum();
        if total > config.max_total_ions {
            return Err(ChipError::TooManyIons(total, config.max_total_ions));
        }
        let mut seen = vec![false; total];
        let mut stacks: [Vec<IonId>; 4] = Default::default();
        for (i, reg) in RegisterId::ALL.iter().enumerate() {
            let src = stacks_top_first[i];
            if src.len() > config.capacity(*reg) {
                return Err(ChipError::CapacityExceeded(*reg, config.capacity(*reg)));
            }
            for ion in src {
                if ion.0 >= total || seen[ion.0] {
                    return Err(ChipError::BadConfig(format!(
                        "ions must be exactly 0..{total} with no repeats"
                    )));
                }
                seen[ion.0] = true;
            }
            stacks[reg.index()] = src.iter().rev().copied().collect();
        }
        let mut state = ChipState {
            config: config.clone(),
            stacks,
            qubit_to_ion: Vec::new(),
            ion_to_qubit: vec![None; total],
            prepared: vec![false; total],
        };
        for &(qubit, ion) in assignment {
            state.assign(crate::circuit::QubitId(qubit), ion)?;
        }
        Ok(state)
    }

    pub fn config(&self) -> &ChipConfig {
        &self.config
    }

    pub fn total_ions(&self) -> usize {
        self.ion_to_qubit.len()
    }

    pub fn occupancy(&self, r: RegisterId) -> usize {
        self.stacks[r.index()].len()
    }

    /// Top-of-stack ion, i.e. the one closest to the junction.
    pub fn top(&self, r: RegisterId) -> Option<IonId> {
        self.stacks[r.index()].last().copied()
    }

    /// Stack contents from the junction side down.
    pub fn stack_top_down(&self, r: RegisterId) -> impl Iterator<Item = IonId> + '_ {
        self.stacks[r.index()].iter().rev().copied()
    }

    /// Moves the top ion of `from` onto `to`.
    pub fn apply_move(&mut self, from: RegisterId, to: RegisterId) -> Result<(), ChipError> {
        if from == to {
            return Err(ChipError::SameRegister(from));
        }
        if self.stacks[from.index()].is_empty() {
            return Err(ChipError::EmptySource(from));
        }
        if self.stacks[to.index()].len() >= self.config.capacity(to) {
            return Err(ChipError::CapacityExceeded(to, self.config.capacity(to)));
        }
        let ion = self.stacks[from.index()].pop().unwrap();
        self.stacks[to.index()].push(ion);
        Ok(())
    }

    pub fn register_of(&self, ion: IonId) -> Option<RegisterId> {
        RegisterId::ALL
            .into_iter()
            .find(|r| self.stacks[r.index()].contains(&ion))
    }

    /// Depth of an ion measured from the top of its stack (top = 0).
    pub fn junction_distance(&self, ion: IonId) -> Result<usize, ChipError> {
        for r in RegisterId::ALL {
            let stack = &self.stacks[r.index()];
            if let Some(pos) = stack.iter().position(|&i| i == ion) {
                return Ok(stack.len() - 1 - pos);
            }
        }
        Err(ChipError::UnknownIon(ion))
    }

    pub fn assign(&mut self, qubit: crate::circuit::QubitId, ion: IonId) -> Result<(), ChipError> {
        if ion.0 >= self.ion_to_qubit.len() {
            return Err(ChipError::UnknownIon(ion));
        }
        if self.qubit_to_ion.len() <= qubit.0 {
            self.qubit_to_ion.resize(qubit.0 + 1, None);
        }
        debug_assert!(self.qubit_to_ion[qubit.0].is_none());
        debug_assert!(self.ion_to_qubit[ion.0].is_none());
        self.qubit_to_ion[qubit.0] = Some(ion);
        self.ion_to_qubit[ion.0] = Some(qubit.0);
        Ok(())
    }

    pub fn ion_of(&self, qubit: crate::circuit::QubitId) -> Option<IonId> {
        self.qubit_to_ion.get(qubit.0).copied().flatten()
    }

    pub fn qubit_of(&self, ion: IonId) -> Option<crate::circuit::QubitId> {
        self.ion_to_qubit
            .get(ion.0)
            .copied()
            .flatten()
            .map(crate::circuit::QubitId)
    }

    pub fn assignment(&self) -> &[Option<IonId>] {
        &self.qubit_to_ion
    }

    pub fn is_assigned(&self, ion: IonId) -> bool {
        self.ion_to_qubit.get(ion.0).copied().flatten().is_some()
    }

    pub fn mark_prepared(&mut self, ion: IonId) {
        if ion.0 < self.prepared.len() {
            self.prepared[ion.0] = true;
        }
    }

    pub fn is_prepared(&self, ion: IonId) -> bool {
        self.prepared.get(ion.0).copied().unwrap_or(false)
    }
}
