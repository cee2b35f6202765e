//! RV32I + multiply instruction tables, bit-exact encoding and decoding, and
//! the per-format bit-field breakdown shown in the debugger.

mod breakdown;
mod codec;
mod registers;
mod table;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use breakdown::{breakdown, FieldSegment};
pub use codec::{decode, encode, sign_extend};
pub use registers::{register_name_to_index, Reg};
pub use table::{lookup_opspec, Mnemonic, OpSpec};

/// The six RISC-V base instruction layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Format {
    R,
    I,
    S,
    B,
    U,
    J,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsaError {
    #[error("unknown mnemonic `{0}`")]
    UnknownMnemonic(String),
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("immediate {value} out of range for {mnemonic} (allowed {min}..={max})")]
    ImmediateOutOfRange { mnemonic: Mnemonic, value: i64, min: i64, max: i64 },
    #[error("immediate {value} for {mnemonic} must be a multiple of {align}")]
    ImmediateMisaligned { mnemonic: Mnemonic, value: i64, align: i64 },
    #[error("invalid operands for {mnemonic}: {reason}")]
    InvalidOperandForFormat { mnemonic: Mnemonic, reason: &'static str },
    #[error("illegal instruction 0x{0:08x}")]
    IllegalInstruction(u32),
}

/// An instruction with its operand fields, independent of bit layout.
///
/// Field presence follows the format: R carries `rd`, `rs1`, `rs2`; I carries
/// `rd`, `rs1`, `imm`; S and B carry `rs1`, `rs2`, `imm`; U and J carry `rd`,
/// `imm`. U-format immediates hold the already-shifted value (low 12 bits zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DecodedInstruction {
    pub mnemonic: Mnemonic,
    pub rd: Option<Reg>,
    pub rs1: Option<Reg>,
    pub rs2: Option<Reg>,
    pub imm: Option<i32>,
}

impl DecodedInstruction {
    pub fn r(mnemonic: Mnemonic, rd: Reg, rs1: Reg, rs2: Reg) -> Self {
        Self { mnemonic, rd: Some(rd), rs1: Some(rs1), rs2: Some(rs2), imm: None }
    }

    pub fn i(mnemonic: Mnemonic, rd: Reg, rs1: Reg, imm: i32) -> Self {
        Self { mnemonic, rd: Some(rd), rs1: Some(rs1), rs2: None, imm: Some(imm) }
    }

    /// S and B formats.
    pub fn s(mnemonic: Mnemonic, rs1: Reg, rs2: Reg, imm: i32) -> Self {
        Self { mnemonic, rd: None, rs1: Some(rs1), rs2: Some(rs2), imm: Some(imm) }
    }

    /// U and J formats.
    pub fn u(mnemonic: Mnemonic, rd: Reg, imm: i32) -> Self {
        Self { mnemonic, rd: Some(rd), rs1: None, rs2: None, imm: Some(imm) }
    }

    pub fn format(&self) -> Format {
        self.mnemonic.format()
    }

    pub fn rd_or_zero(&self) -> Reg {
        self.rd.unwrap_or(Reg::ZERO)
    }

    pub fn rs1_or_zero(&self) -> Reg {
        self.rs1.unwrap_or(Reg::ZERO)
    }

    pub fn rs2_or_zero(&self) -> Reg {
        self.rs2.unwrap_or(Reg::ZERO)
    }

    pub fn imm_or_zero(&self) -> i32 {
        self.imm.unwrap_or(0)
    }
}

/// Disassembly using ABI register names. Branch and jump offsets are printed
/// relative to the instruction, loads and stores in `offset(base)` form.
impl fmt::Display for DecodedInstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Mnemonic::*;
        let m = self.mnemonic;
        let (rd, rs1, rs2, imm) = (
            self.rd_or_zero().abi_name(),
            self.rs1_or_zero().abi_name(),
            self.rs2_or_zero().abi_name(),
            self.imm_or_zero(),
        );
        match m {
            Ecall | Ebreak => write!(f, "{m}"),
            Fence => {
                let bits = imm as u32 & 0xff;
                write!(f, "fence {}, {}", fence_set(bits >> 4), fence_set(bits & 0xf))
            }
            _ if m.is_load() || m == Jalr => write!(f, "{m} {rd}, {imm}({rs1})"),
            _ => match m.format() {
                Format::R => write!(f, "{m} {rd}, {rs1}, {rs2}"),
                Format::I => write!(f, "{m} {rd}, {rs1}, {imm}"),
                Format::S => write!(f, "{m} {rs2}, {imm}({rs1})"),
                Format::B => write!(f, "{m} {rs1}, {rs2}, {imm}"),
                Format::U => write!(f, "{m} {rd}, 0x{:x}", (imm as u32) >> 12),
                Format::J => write!(f, "{m} {rd}, {imm}"),
            },
        }
    }
}

fn fence_set(bits: u32) -> String {
    let s: String =
        [(8, 'i'), (4, 'o'), (2, 'r'), (1, 'w')].iter().filter(|(b, _)| bits & b != 0).map(|(_, c)| *c).collect();
    if s.is_empty() {
        "0".to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disassembly_forms() {
        let r = |i| Reg::new(i).unwrap();
        assert_eq!(DecodedInstruction::r(Mnemonic::Add, r(1), r(2), r(3)).to_string(), "add ra, sp, gp");
        assert_eq!(DecodedInstruction::i(Mnemonic::Lw, r(5), r(2), 8).to_string(), "lw t0, 8(sp)");
        assert_eq!(DecodedInstruction::s(Mnemonic::Sw, r(2), r(5), -4).to_string(), "sw t0, -4(sp)");
        assert_eq!(DecodedInstruction::u(Mnemonic::Lui, r(2), 0x8000_0000u32 as i32).to_string(), "lui sp, 0x80000");
        assert_eq!(decode(0x0ff0000f).unwrap().to_string(), "fence iorw, iorw");
        assert_eq!(decode(0x00000073).unwrap().to_string(), "ecall");
    }
}
