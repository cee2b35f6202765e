use super::table::OP_TABLE;
use super::{DecodedInstruction, Format, IsaError, Mnemonic, Reg};

/// Two's-complement sign extension of the low `bits` bits of `value`.
pub fn sign_extend(value: u32, bits: u32) -> i32 {
    debug_assert!((1..=32).contains(&bits));
    let shift = 32 - bits;
    ((value << shift) as i32) >> shift
}

fn field(word: u32, hi: u32, lo: u32) -> u32 {
    (word >> lo) & ((1u32 << (hi - lo + 1)) - 1)
}

fn imm_i(word: u32) -> i32 {
    sign_extend(field(word, 31, 20), 12)
}

fn imm_s(word: u32) -> i32 {
    sign_extend((field(word, 31, 25) << 5) | field(word, 11, 7), 12)
}

fn imm_b(word: u32) -> i32 {
    let raw = (field(word, 31, 31) << 12)
        | (field(word, 7, 7) << 11)
        | (field(word, 30, 25) << 5)
        | (field(word, 11, 8) << 1);
    sign_extend(raw, 13)
}

fn imm_j(word: u32) -> i32 {
    let raw = (field(word, 31, 31) << 20)
        | (field(word, 19, 12) << 12)
        | (field(word, 20, 20) << 11)
        | (field(word, 30, 21) << 1);
    sign_extend(raw, 21)
}

fn check_range(m: Mnemonic, value: i32, min: i64, max: i64) -> Result<(), IsaError> {
    let v = value as i64;
    if v < min || v > max {
        return Err(IsaError::ImmediateOutOfRange { mnemonic: m, value: v, min, max });
    }
    Ok(())
}

fn check_align(m: Mnemonic, value: i32, align: i64) -> Result<(), IsaError> {
    if (value as i64) % align != 0 {
        return Err(IsaError::ImmediateMisaligned { mnemonic: m, value: value as i64, align });
    }
    Ok(())
}

fn need<T>(m: Mnemonic, v: Option<T>, reason: &'static str) -> Result<T, IsaError> {
    v.ok_or(IsaError::InvalidOperandForFormat { mnemonic: m, reason })
}

fn forbid<T>(m: Mnemonic, v: Option<T>, reason: &'static str) -> Result<(), IsaError> {
    match v {
        Some(_) => Err(IsaError::InvalidOperandForFormat { mnemonic: m, reason }),
        None => Ok(()),
    }
}

fn reg_bits(r: Reg) -> u32 {
    r.index() as u32
}

/// Produces the 32-bit machine word for an instruction.
pub fn encode(instr: &DecodedInstruction) -> Result<u32, IsaError> {
    let m = instr.mnemonic;
    let spec = m.spec();
    let opcode = spec.opcode as u32;
    let funct3 = spec.funct3.unwrap_or(0) as u32;
    let funct7 = spec.funct7.unwrap_or(0) as u32;

    let word = match spec.format {
        Format::R => {
            let rd = need(m, instr.rd, "R-format requires rd")?;
            let rs1 = need(m, instr.rs1, "R-format requires rs1")?;
            let rs2 = need(m, instr.rs2, "R-format requires rs2")?;
            forbid(m, instr.imm, "R-format has no immediate")?;
            (funct7 << 25)
                | (reg_bits(rs2) << 20)
                | (reg_bits(rs1) << 15)
                | (funct3 << 12)
                | (reg_bits(rd) << 7)
                | opcode
        }
        Format::I => {
            let rd = need(m, instr.rd, "I-format requires rd")?;
            let rs1 = need(m, instr.rs1, "I-format requires rs1")?;
            let imm = need(m, instr.imm, "I-format requires an immediate")?;
            forbid(m, instr.rs2, "I-format has no rs2")?;
            let imm_field = if m.is_shift_imm() {
                check_range(m, imm, 0, 31)?;
                (funct7 << 5) | imm as u32
            } else if let Some(f12) = spec.funct12 {
                if rd != Reg::ZERO || rs1 != Reg::ZERO || imm != f12 as i32 {
                    return Err(IsaError::InvalidOperandForFormat {
                        mnemonic: m,
                        reason: "system instruction takes no operands",
                    });
                }
                f12 as u32
            } else {
                check_range(m, imm, -2048, 2047)?;
                imm as u32 & 0xfff
            };
            (imm_field << 20) | (reg_bits(rs1) << 15) | (funct3 << 12) | (reg_bits(rd) << 7) | opcode
        }
        Format::S => {
            let rs1 = need(m, instr.rs1, "S-format requires rs1")?;
            let rs2 = need(m, instr.rs2, "S-format requires rs2")?;
            let imm = need(m, instr.imm, "S-format requires an immediate")?;
            forbid(m, instr.rd, "S-format has no rd")?;
            check_range(m, imm, -2048, 2047)?;
            let imm = imm as u32;
            (field(imm, 11, 5) << 25)
                | (reg_bits(rs2) << 20)
                | (reg_bits(rs1) << 15)
                | (funct3 << 12)
                | (field(imm, 4, 0) << 7)
                | opcode
        }
        Format::B => {
            let rs1 = need(m, instr.rs1, "B-format requires rs1")?;
            let rs2 = need(m, instr.rs2, "B-format requires rs2")?;
            let imm = need(m, instr.imm, "B-format requires an offset")?;
            forbid(m, instr.rd, "B-format has no rd")?;
            check_range(m, imm, -4096, 4094)?;
            check_align(m, imm, 2)?;
            let imm = imm as u32;
            (field(imm, 12, 12) << 31)
                | (field(imm, 10, 5) << 25)
                | (reg_bits(rs2) << 20)
                | (reg_bits(rs1) << 15)
                | (funct3 << 12)
                | (field(imm, 4, 1) << 8)
                | (field(imm, 11, 11) << 7)
                | opcode
        }
        Format::U => {
            let rd = need(m, instr.rd, "U-format requires rd")?;
            let imm = need(m, instr.imm, "U-format requires an immediate")?;
            forbid(m, instr.rs1, "U-format has no rs1")?;
            forbid(m, instr.rs2, "U-format has no rs2")?;
            check_align(m, imm, 4096)?;
            (imm as u32 & 0xffff_f000) | (reg_bits(rd) << 7) | opcode
        }
        Format::J => {
            let rd = need(m, instr.rd, "J-format requires rd")?;
            let imm = need(m, instr.imm, "J-format requires an offset")?;
            forbid(m, instr.rs1, "J-format has no rs1")?;
            forbid(m, instr.rs2, "J-format has no rs2")?;
            check_range(m, imm, -(1 << 20), (1 << 20) - 2)?;
            check_align(m, imm, 2)?;
            let imm = imm as u32;
            (field(imm, 20, 20) << 31)
                | (field(imm, 10, 1) << 21)
                | (field(imm, 11, 11) << 20)
                | (field(imm, 19, 12) << 12)
                | (reg_bits(rd) << 7)
                | opcode
        }
    };
    Ok(word)
}

/// Finds the implemented instruction a word encodes.
pub(crate) fn identify(word: u32) -> Result<Mnemonic, IsaError> {
    let opcode = field(word, 6, 0) as u8;
    let funct3 = field(word, 14, 12) as u8;
    let funct7 = field(word, 31, 25) as u8;
    let funct12 = field(word, 31, 20) as u16;
    OP_TABLE
        .iter()
        .find(|s| {
            s.opcode == opcode
                && s.funct3.is_none_or(|f| f == funct3)
                && s.funct7.is_none_or(|f| f == funct7)
                && s.funct12.is_none_or(|f| f == funct12 && field(word, 19, 7) & !0b111_00000 == 0)
        })
        .map(|s| s.mnemonic)
        .ok_or(IsaError::IllegalInstruction(word))
}

/// Decodes a machine word; immediates come back sign-extended to 32 bits.
pub fn decode(word: u32) -> Result<DecodedInstruction, IsaError> {
    let m = identify(word)?;
    let rd = Reg::from_field(field(word, 11, 7));
    let rs1 = Reg::from_field(field(word, 19, 15));
    let rs2 = Reg::from_field(field(word, 24, 20));
    Ok(match m.format() {
        Format::R => DecodedInstruction::r(m, rd, rs1, rs2),
        Format::I if m.is_shift_imm() => DecodedInstruction::i(m, rd, rs1, field(word, 24, 20) as i32),
        Format::I => DecodedInstruction::i(m, rd, rs1, imm_i(word)),
        Format::S => DecodedInstruction::s(m, rs1, rs2, imm_s(word)),
        Format::B => DecodedInstruction::s(m, rs1, rs2, imm_b(word)),
        Format::U => DecodedInstruction::u(m, rd, (word & 0xffff_f000) as i32),
        Format::J => DecodedInstruction::u(m, rd, imm_j(word)),
    })
}
