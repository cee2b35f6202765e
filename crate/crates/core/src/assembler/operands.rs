use crate::isa::{encode, register_name_to_index, DecodedInstruction, Format, Mnemonic, Reg};

use super::lexer::is_valid_label;
use super::AsmError;

/// Parses decimal, negative decimal and `0x` hexadecimal literals.
pub fn parse_number(token: &str) -> Option<i64> {
    let (negative, digits) = match token.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, token),
    };
    let magnitude = if let Some(hex) = digits.strip_prefix("0x").or_else(|| digits.strip_prefix("0X")) {
        if hex.is_empty() || hex.len() > 16 {
            return None;
        }
        i64::from_str_radix(hex, 16).ok()?
    } else {
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        digits.parse::<i64>().ok()?
    };
    Some(if negative { -magnitude } else { magnitude })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Operand {
    Reg(Reg),
    Imm(i64),
    Label(String),
    Hi(String),
    Lo(String),
}

pub(crate) fn parse_operand(token: &str) -> Result<Operand, AsmError> {
    if let Ok(r) = register_name_to_index(token) {
        return Ok(Operand::Reg(r));
    }
    if let Some(n) = parse_number(token) {
        return Ok(Operand::Imm(n));
    }
    let lower = token.to_ascii_lowercase();
    for (prefix, ctor) in [("%hi(", Operand::Hi as fn(String) -> Operand), ("%lo(", Operand::Lo)] {
        if let Some(inner) = lower.strip_prefix(prefix).and_then(|r| r.strip_suffix(')')) {
            let name = &token[prefix.len()..prefix.len() + inner.len()];
            if is_valid_label(name) {
                return Ok(ctor(name.to_string()));
            }
            return Err(malformed(token, "expected a label inside %hi/%lo"));
        }
    }
    if is_valid_label(token) {
        return Ok(Operand::Label(token.to_string()));
    }
    Err(malformed(token, "not a register, number or label"))
}

pub(crate) fn malformed(token: &str, reason: &str) -> AsmError {
    AsmError::MalformedOperand { token: token.to_string(), reason: reason.to_string() }
}

/// Where an instruction's immediate comes from once labels are known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum ImmSource {
    None,
    Value(i64),
    /// Offset from the instruction's own address to a label.
    PcRelative(String),
    /// Upper 20 bits of a label address, rounded for a following `%lo` add.
    Hi(String),
    /// Sign-extended low 12 bits of a label address.
    Lo(String),
}

impl ImmSource {
    pub(crate) fn label(&self) -> Option<&str> {
        match self {
            ImmSource::PcRelative(l) | ImmSource::Hi(l) | ImmSource::Lo(l) => Some(l),
            _ => None,
        }
    }
}

/// A base instruction whose immediate may still reference a label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Template {
    pub mnemonic: Mnemonic,
    pub rd: Option<Reg>,
    pub rs1: Option<Reg>,
    pub rs2: Option<Reg>,
    pub imm: ImmSource,
}

impl Template {
    /// Builds the concrete instruction once the immediate is known.
    pub(crate) fn with_imm(&self, imm: Option<i32>) -> DecodedInstruction {
        DecodedInstruction { mnemonic: self.mnemonic, rd: self.rd, rs1: self.rs1, rs2: self.rs2, imm }
    }
}

fn reg(op: &Operand, token: &str) -> Result<Reg, AsmError> {
    match op {
        Operand::Reg(r) => Ok(*r),
        _ => Err(malformed(token, "expected a register")),
    }
}

fn imm_or_lo(op: &Operand, token: &str) -> Result<ImmSource, AsmError> {
    match op {
        Operand::Imm(v) => Ok(ImmSource::Value(*v)),
        Operand::Lo(l) => Ok(ImmSource::Lo(l.clone())),
        _ => Err(malformed(token, "expected an immediate")),
    }
}

fn target(op: &Operand, token: &str) -> Result<ImmSource, AsmError> {
    match op {
        Operand::Imm(v) => Ok(ImmSource::Value(*v)),
        Operand::Label(l) => Ok(ImmSource::PcRelative(l.clone())),
        _ => Err(malformed(token, "expected a label or offset")),
    }
}

fn fence_bits(token: &str) -> Result<i64, AsmError> {
    if token == "0" {
        return Ok(0);
    }
    let mut bits = 0;
    for c in token.to_ascii_lowercase().chars() {
        bits |= match c {
            'i' => 8,
            'o' => 4,
            'r' => 2,
            'w' => 1,
            _ => return Err(malformed(token, "expected a subset of `iorw`")),
        };
    }
    Ok(bits)
}

fn arity(m: Mnemonic, expected: &'static str, found: usize) -> AsmError {
    AsmError::Arity { mnemonic: m.to_string(), expected, found }
}

/// Checks operand count and kinds for a base instruction. Literal immediates
/// are also range-checked here so those errors surface at parse time.
pub(crate) fn build_template(symbols: &[String]) -> Result<Template, AsmError> {
    let (head, tokens) = symbols.split_first().ok_or_else(|| malformed("", "empty statement"))?;
    let m: Mnemonic = head.parse()?;

    if m == Mnemonic::Fence {
        let imm = match tokens {
            [] => 0xff,
            [pred, succ] => (fence_bits(pred)? << 4) | fence_bits(succ)?,
            _ => return Err(arity(m, "0 or 2 operands", tokens.len())),
        };
        return Ok(Template {
            mnemonic: m,
            rd: Some(Reg::ZERO),
            rs1: Some(Reg::ZERO),
            rs2: None,
            imm: ImmSource::Value(imm),
        });
    }
    if m.is_system() {
        if !tokens.is_empty() {
            return Err(arity(m, "no operands", tokens.len()));
        }
        let f12 = m.spec().funct12.unwrap_or(0) as i64;
        return Ok(Template {
            mnemonic: m,
            rd: Some(Reg::ZERO),
            rs1: Some(Reg::ZERO),
            rs2: None,
            imm: ImmSource::Value(f12),
        });
    }

    let ops = tokens.iter().map(|t| parse_operand(t)).collect::<Result<Vec<_>, _>>()?;
    let t = |i: usize| tokens[i].as_str();

    let template = match m.format() {
        Format::R => {
            let [a, b, c] = ops.as_slice() else { return Err(arity(m, "rd, rs1, rs2", ops.len())) };
            Template {
                mnemonic: m,
                rd: Some(reg(a, t(0))?),
                rs1: Some(reg(b, t(1))?),
                rs2: Some(reg(c, t(2))?),
                imm: ImmSource::None,
            }
        }
        Format::I if m.is_load() => {
            let [a, b, c] = ops.as_slice() else { return Err(arity(m, "rd, offset(rs1)", ops.len())) };
            Template {
                mnemonic: m,
                rd: Some(reg(a, t(0))?),
                rs1: Some(reg(c, t(2))?),
                rs2: None,
                imm: imm_or_lo(b, t(1))?,
            }
        }
        Format::I if m == Mnemonic::Jalr => {
            let [a, b, c] = ops.as_slice() else { return Err(arity(m, "rd, rs1, imm or rd, offset(rs1)", ops.len())) };
            let (base, off, off_tok) = match (b, c) {
                (Operand::Reg(base), _) => (*base, c, t(2)),
                (_, Operand::Reg(base)) => (*base, b, t(1)),
                _ => return Err(malformed(t(1), "expected a base register")),
            };
            Template { mnemonic: m, rd: Some(reg(a, t(0))?), rs1: Some(base), rs2: None, imm: imm_or_lo(off, off_tok)? }
        }
        Format::I => {
            let [a, b, c] = ops.as_slice() else { return Err(arity(m, "rd, rs1, imm", ops.len())) };
            let imm = if m.is_shift_imm() {
                match c {
                    Operand::Imm(v) => ImmSource::Value(*v),
                    _ => return Err(malformed(t(2), "expected a shift amount")),
                }
            } else {
                imm_or_lo(c, t(2))?
            };
            Template { mnemonic: m, rd: Some(reg(a, t(0))?), rs1: Some(reg(b, t(1))?), rs2: None, imm }
        }
        Format::S => {
            let [a, b, c] = ops.as_slice() else { return Err(arity(m, "rs2, offset(rs1)", ops.len())) };
            Template {
                mnemonic: m,
                rd: None,
                rs1: Some(reg(c, t(2))?),
                rs2: Some(reg(a, t(0))?),
                imm: imm_or_lo(b, t(1))?,
            }
        }
        Format::B => {
            let [a, b, c] = ops.as_slice() else { return Err(arity(m, "rs1, rs2, label", ops.len())) };
            Template {
                mnemonic: m,
                rd: None,
                rs1: Some(reg(a, t(0))?),
                rs2: Some(reg(b, t(1))?),
                imm: target(c, t(2))?,
            }
        }
        Format::U => {
            let [a, b] = ops.as_slice() else { return Err(arity(m, "rd, imm20", ops.len())) };
            let imm = match b {
                Operand::Imm(v) if (0..=0xfffff).contains(v) => ImmSource::Value(((*v << 12) as u32 as i32) as i64),
                Operand::Imm(_) => return Err(malformed(t(1), "upper immediate must be within 0..=0xfffff")),
                Operand::Hi(l) => ImmSource::Hi(l.clone()),
                _ => return Err(malformed(t(1), "expected an upper immediate")),
            };
            Template { mnemonic: m, rd: Some(reg(a, t(0))?), rs1: None, rs2: None, imm }
        }
        Format::J => {
            let [a, b] = ops.as_slice() else { return Err(arity(m, "rd, label", ops.len())) };
            Template { mnemonic: m, rd: Some(reg(a, t(0))?), rs1: None, rs2: None, imm: target(b, t(1))? }
        }
    };

    if let ImmSource::Value(v) = template.imm {
        let imm = i32::try_from(v).map_err(|_| crate::isa::IsaError::ImmediateOutOfRange {
            mnemonic: m,
            value: v,
            min: i32::MIN as i64,
            max: i32::MAX as i64,
        })?;
        encode(&template.with_imm(Some(imm)))?;
    }
    Ok(template)
}
