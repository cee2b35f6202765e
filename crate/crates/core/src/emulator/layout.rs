use serde::{Deserialize, Serialize};

use crate::assembler::AssembledProgram;

/// Boundaries of the five memory regions: text, data, heap, free space and
/// stack, from low to high addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutConfig {
    pub text_base: u32,
    pub data_base: u32,
    pub heap_base: u32,
    pub stack_top: u32,
}

impl LayoutConfig {
    /// The heap starts right after the program's data image.
    pub fn for_program(program: &AssembledProgram) -> Self {
        Self {
            text_base: program.config.text_base,
            data_base: program.config.data_base,
            heap_base: program.data_range().end,
            stack_top: program.config.stack_top,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.text_base < self.data_base && self.data_base <= self.heap_base && self.heap_base < self.stack_top
    }

    /// Written words at or above this address count as stack, below it as heap.
    pub fn heap_stack_split(&self) -> u32 {
        self.heap_base + (self.stack_top - self.heap_base) / 2
    }
}
