use std::collections::BTreeSet;

use crate::assembler::AssembledProgram;

use super::EmuError;

/// Instruction addresses where `run` pauses.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Breakpoints(BTreeSet<u32>);

impl Breakpoints {
    pub fn new() -> Self {
        Self::default()
    }

    fn check(program: &AssembledProgram, address: u32) -> Result<(), EmuError> {
        if program.is_instruction_address(address) {
            Ok(())
        } else {
            Err(EmuError::NotAnInstructionAddress(address))
        }
    }

    /// Idempotent.
    pub fn set(&mut self, program: &AssembledProgram, address: u32) -> Result<(), EmuError> {
        Self::check(program, address)?;
        self.0.insert(address);
        Ok(())
    }

    /// Idempotent.
    pub fn clear(&mut self, program: &AssembledProgram, address: u32) -> Result<(), EmuError> {
        Self::check(program, address)?;
        self.0.remove(&address);
        Ok(())
    }

    pub fn contains(&self, address: u32) -> bool {
        self.0.contains(&address)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Drops addresses that are not instructions of `program`.
    pub fn retain_valid(&mut self, program: &AssembledProgram) {
        self.0.retain(|a| program.is_instruction_address(*a));
    }
}
