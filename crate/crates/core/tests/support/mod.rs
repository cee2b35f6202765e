//! Test-only helpers: random operand generation and a dense-array reference
//! interpreter used as an independent oracle for the emulator.

#![allow(dead_code)]

pub mod reference;

use rand::Rng;
use workbench_core::isa::{DecodedInstruction, Format, Mnemonic, Reg};

pub fn reg<R: Rng>(rng: &mut R) -> Reg {
    Reg::new(rng.random_range(0..32)).unwrap()
}

/// A random instruction whose operands satisfy the format's constraints.
pub fn random_instruction<R: Rng>(rng: &mut R, m: Mnemonic) -> DecodedInstruction {
    let (rd, rs1, rs2) = (reg(rng), reg(rng), reg(rng));
    match m {
        Mnemonic::Ecall => DecodedInstruction::i(m, Reg::ZERO, Reg::ZERO, 0),
        Mnemonic::Ebreak => DecodedInstruction::i(m, Reg::ZERO, Reg::ZERO, 1),
        _ if m.is_shift_imm() => DecodedInstruction::i(m, rd, rs1, rng.random_range(0..32)),
        _ => match m.format() {
            Format::R => DecodedInstruction::r(m, rd, rs1, rs2),
            Format::I => DecodedInstruction::i(m, rd, rs1, rng.random_range(-2048..=2047)),
            Format::S => DecodedInstruction::s(m, rs1, rs2, rng.random_range(-2048..=2047)),
            Format::B => DecodedInstruction::s(m, rs1, rs2, 2 * rng.random_range(-2048..=2047)),
            Format::U => DecodedInstruction::u(m, rd, (rng.random::<u32>() & 0xffff_f000) as i32),
            Format::J => DecodedInstruction::u(m, rd, 2 * rng.random_range(-(1 << 19)..(1 << 19))),
        },
    }
}

pub const SCRATCH_BYTES: u32 = 1024;
