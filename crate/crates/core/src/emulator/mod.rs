//! Machine state and the fetch-decode-execute interpreter.

mod breakpoints;
mod exec;
mod layout;
mod memory;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembler::AssembledProgram;
use crate::isa::Reg;

pub use breakpoints::Breakpoints;
pub use layout::LayoutConfig;
pub use memory::{MemChange, MemOp, SparseMemory, Width};

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

/// Why the machine is not (or no longer) executing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltStatus {
    Running,
    Exit,
    Breakpoint,
    StepLimit,
    Fault,
    Ecall,
    Ebreak,
}

impl HaltStatus {
    /// Breakpoint and step-limit stops can be resumed; the others end execution.
    pub fn is_terminal(self) -> bool {
        matches!(self, HaltStatus::Exit | HaltStatus::Fault | HaltStatus::Ecall | HaltStatus::Ebreak)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HaltStatus::Running => "running",
            HaltStatus::Exit => "exit",
            HaltStatus::Breakpoint => "breakpoint",
            HaltStatus::StepLimit => "step_limit",
            HaltStatus::Fault => "fault",
            HaltStatus::Ecall => "ecall",
            HaltStatus::Ebreak => "ebreak",
        }
    }
}

impl std::fmt::Display for HaltStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum Fault {
    #[error("illegal instruction 0x{word:08x} at 0x{pc:08x}")]
    IllegalInstruction { pc: u32, word: u32 },
    #[error("fetch outside the text segment at 0x{pc:08x}")]
    FetchOutsideText { pc: u32 },
    #[error("misaligned {width}-byte access at 0x{address:08x}")]
    MisalignedAccess { address: u32, width: u32 },
    #[error("misaligned jump target 0x{target:08x}")]
    MisalignedJump { target: u32 },
    #[error("jump target 0x{target:08x} is outside the text segment")]
    JumpOutsideText { target: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmuError {
    #[error("halted: {0}")]
    Halted(String),
    #[error("0x{0:08x} is not an instruction address")]
    NotAnInstructionAddress(u32),
}

/// What one executed instruction did.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StepResult {
    pub pc_before: u32,
    pub pc_after: u32,
    pub changed_registers: Vec<Reg>,
    pub changed_memory: Vec<MemChange>,
    pub halt: Option<HaltStatus>,
}

/// Net effect of a `run` or multi-step: locations whose value differs between
/// the start and the end.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Changes {
    pub registers: Vec<Reg>,
    pub memory: Vec<MemChange>,
    pub steps: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineState {
    regs: [u32; 32],
    pub pc: u32,
    pub memory: SparseMemory,
    pub halt: HaltStatus,
    pub fault: Option<Fault>,
    pub step_count: u64,
}

impl MachineState {
    /// Fresh machine for a program: registers zeroed, images preloaded, pc at
    /// the entry. The kernel prefix sets `sp` and `gp` when it executes.
    pub fn setup(program: &AssembledProgram) -> Self {
        let mut memory = SparseMemory::new();
        for w in &program.text_image {
            memory.load_word(w.address, w.word);
        }
        for &(address, word) in &program.data_image {
            memory.load_word(address, word);
        }
        Self { regs: [0; 32], pc: program.entry_address, memory, halt: HaltStatus::Running, fault: None, step_count: 0 }
    }

    pub fn registers(&self) -> &[u32; 32] {
        &self.regs
    }

    pub fn reg(&self, r: Reg) -> u32 {
        self.regs[r.index()]
    }

    /// Writes a register; `x0` ignores writes.
    pub fn set_reg(&mut self, r: Reg, value: u32) {
        if r != Reg::ZERO {
            self.regs[r.index()] = value;
        }
    }

    fn ensure_runnable(&mut self) -> Result<(), EmuError> {
        if self.halt.is_terminal() {
            let reason = match self.fault {
                Some(f) => format!("fault: {f}"),
                None => self.halt.to_string(),
            };
            return Err(EmuError::Halted(reason));
        }
        self.halt = HaltStatus::Running;
        Ok(())
    }

    /// Executes the instruction at `pc`.
    pub fn single_step(&mut self, program: &AssembledProgram) -> Result<StepResult, EmuError> {
        self.ensure_runnable()?;
        Ok(exec::step(self, program))
    }

    /// Executes up to `count` instructions, stopping early on any halt.
    pub fn step_n(&mut self, program: &AssembledProgram, count: u64) -> Result<Changes, EmuError> {
        self.ensure_runnable()?;
        let mut tracker = ChangeTracker::new(self);
        for _ in 0..count {
            let r = exec::step(self, program);
            tracker.record(&r);
            if self.halt != HaltStatus::Running {
                break;
            }
        }
        Ok(tracker.finish(self))
    }

    /// Steps until the exit loop, a breakpoint, a trap or the step budget.
    ///
    /// Exit and breakpoints are checked before each instruction. A breakpoint
    /// on the starting pc does not fire: at least one instruction executes
    /// first, so resuming from a breakpoint makes progress.
    pub fn run(
        &mut self,
        program: &AssembledProgram,
        breakpoints: &Breakpoints,
        max_steps: u64,
    ) -> Result<Changes, EmuError> {
        self.ensure_runnable()?;
        let mut tracker = ChangeTracker::new(self);
        let mut taken = 0u64;
        loop {
            if self.pc == program.exit_address {
                self.halt = HaltStatus::Exit;
                break;
            }
            if taken > 0 && breakpoints.contains(self.pc) {
                self.halt = HaltStatus::Breakpoint;
                break;
            }
            if taken >= max_steps {
                self.halt = HaltStatus::StepLimit;
                break;
            }
            let r = exec::step(self, program);
            tracker.record(&r);
            taken += 1;
            if self.halt != HaltStatus::Running {
                break;
            }
        }
        Ok(tracker.finish(self))
    }
}

struct ChangeTracker {
    regs_before: [u32; 32],
    /// First-seen old value per touched word.
    memory_before: std::collections::BTreeMap<u32, u32>,
    steps_before: u64,
}

impl ChangeTracker {
    fn new(state: &MachineState) -> Self {
        Self { regs_before: state.regs, memory_before: Default::default(), steps_before: state.step_count }
    }

    fn record(&mut self, step: &StepResult) {
        for c in &step.changed_memory {
            self.memory_before.entry(c.address).or_insert(c.old);
        }
    }

    fn finish(self, state: &MachineState) -> Changes {
        let registers = Reg::all().filter(|r| state.regs[r.index()] != self.regs_before[r.index()]).collect();
        let memory = self
            .memory_before
            .into_iter()
            .filter_map(|(address, old)| {
                let new = state.memory.read_word(address);
                (new != old).then_some(MemChange { address, old, new })
            })
            .collect();
        Changes { registers, memory, steps: state.step_count - self.steps_before }
    }
}
