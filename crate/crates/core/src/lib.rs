//! Assembler, interpreter and debug-session engine for an RV32I + multiply
//! teaching workbench.
//!
//! The pipeline is `assembler::assemble` (kernel wrapping, two-pass parse,
//! label resolution, encoding) feeding `emulator::MachineState` (sparse
//! memory, single-step and run-to-breakpoint), with `session::Session`
//! answering the JSON command protocol that front-ends speak.

pub mod assembler;
pub mod emulator;
pub mod isa;
pub mod session;
