use crate::isa::sign_extend;

use super::operands::{malformed, parse_operand, Operand};
use super::{AsmError, ItemKind, ProgramItem};

const PSEUDOS: &[&str] =
    &["nop", "mv", "li", "la", "j", "jr", "ret", "call", "beqz", "bnez", "not", "neg", "bgt", "ble", "bgtu", "bleu"];

/// True when the statement is an assembler pseudo-instruction. `jal label`
/// and `jalr rs` (single operand) are the short forms of base mnemonics.
pub fn is_pseudo(symbols: &[String]) -> bool {
    match symbols.split_first() {
        Some((head, ops)) => PSEUDOS.contains(&head.as_str()) || (ops.len() == 1 && (head == "jal" || head == "jalr")),
        None => false,
    }
}

fn expect_reg(token: &str) -> Result<(), AsmError> {
    match parse_operand(token)? {
        Operand::Reg(_) => Ok(()),
        _ => Err(malformed(token, "expected a register")),
    }
}

fn expect_label(token: &str) -> Result<(), AsmError> {
    match parse_operand(token)? {
        Operand::Label(_) => Ok(()),
        _ => Err(malformed(token, "expected a label")),
    }
}

/// Splits a 32-bit constant into a `lui` upper part and an `addi` lower part
/// such that `(upper << 12) + lower` wraps to the value.
pub(crate) fn split_hi_lo(value: u32) -> (u32, i32) {
    let lo = sign_extend(value & 0xfff, 12);
    let hi = (value.wrapping_sub(lo as u32) >> 12) & 0xf_ffff;
    (hi, lo)
}

/// Rewrites a pseudo-instruction item as base-instruction items. The results
/// keep the pseudo's line and kernel flag; if the pseudo has an address the
/// expansions are laid out from it in 4-byte steps.
pub fn expand_pseudo(item: &ProgramItem) -> Result<Vec<ProgramItem>, AsmError> {
    let (head, ops) = item.symbols.split_first().ok_or_else(|| malformed("", "empty statement"))?;
    let ops: Vec<&str> = ops.iter().map(String::as_str).collect();
    let arity = |expected: &'static str| AsmError::Arity { mnemonic: head.clone(), expected, found: ops.len() };

    let base: Vec<Vec<String>> = match (head.as_str(), ops.as_slice()) {
        ("nop", []) => vec![sv(&["addi", "x0", "x0", "0"])],
        ("nop", _) => return Err(arity("no operands")),
        ("ret", []) => vec![sv(&["jalr", "x0", "ra", "0"])],
        ("ret", _) => return Err(arity("no operands")),
        ("mv", [rd, rs]) | ("not", [rd, rs]) | ("neg", [rd, rs]) => {
            expect_reg(rd)?;
            expect_reg(rs)?;
            match head.as_str() {
                "mv" => vec![sv(&["addi", rd, rs, "0"])],
                "not" => vec![sv(&["xori", rd, rs, "-1"])],
                _ => vec![sv(&["sub", rd, "x0", rs])],
            }
        }
        ("mv" | "not" | "neg", _) => return Err(arity("rd, rs")),
        ("li", [rd, imm]) => {
            expect_reg(rd)?;
            let value = match parse_operand(imm)? {
                Operand::Imm(v) => v,
                _ => return Err(malformed(imm, "expected an immediate")),
            };
            if !(i32::MIN as i64..=u32::MAX as i64).contains(&value) {
                return Err(crate::isa::IsaError::ImmediateOutOfRange {
                    mnemonic: crate::isa::Mnemonic::Addi,
                    value,
                    min: i32::MIN as i64,
                    max: u32::MAX as i64,
                }
                .into());
            }
            if (-2048..=2047).contains(&value) {
                vec![sv(&["addi", rd, "x0", &value.to_string()])]
            } else {
                let (hi, lo) = split_hi_lo(value as u32);
                vec![sv(&["lui", rd, &format!("0x{hi:x}")]), sv(&["addi", rd, rd, &lo.to_string()])]
            }
        }
        ("li", _) => return Err(arity("rd, imm")),
        ("la", [rd, label]) => {
            expect_reg(rd)?;
            expect_label(label)?;
            vec![sv(&["lui", rd, &format!("%hi({label})")]), sv(&["addi", rd, rd, &format!("%lo({label})")])]
        }
        ("la", _) => return Err(arity("rd, label")),
        ("j", [label]) => {
            expect_label(label)?;
            vec![sv(&["jal", "x0", label])]
        }
        ("call", [label]) | ("jal", [label]) => {
            expect_label(label)?;
            vec![sv(&["jal", "ra", label])]
        }
        ("j" | "call", _) => return Err(arity("label")),
        ("jr", [rs]) => {
            expect_reg(rs)?;
            vec![sv(&["jalr", "x0", rs, "0"])]
        }
        ("jalr", [rs]) => {
            expect_reg(rs)?;
            vec![sv(&["jalr", "ra", rs, "0"])]
        }
        ("jr", _) => return Err(arity("rs")),
        ("beqz" | "bnez", [rs, label]) => {
            expect_reg(rs)?;
            let base = if head == "beqz" { "beq" } else { "bne" };
            vec![sv(&[base, rs, "x0", label])]
        }
        ("beqz" | "bnez", _) => return Err(arity("rs, label")),
        ("bgt" | "ble" | "bgtu" | "bleu", [a, b, label]) => {
            expect_reg(a)?;
            expect_reg(b)?;
            let base = match head.as_str() {
                "bgt" => "blt",
                "ble" => "bge",
                "bgtu" => "bltu",
                _ => "bgeu",
            };
            vec![sv(&[base, b, a, label])]
        }
        ("bgt" | "ble" | "bgtu" | "bleu", _) => return Err(arity("rs1, rs2, label")),
        _ => return Err(AsmError::UnknownMnemonic(head.clone())),
    };

    Ok(base
        .into_iter()
        .enumerate()
        .map(|(i, symbols)| ProgramItem {
            symbols,
            kind: ItemKind::Instruction,
            line: item.line,
            user_line: item.user_line,
            address: item.address.map(|a| a + 4 * i as u32),
            is_kernel: item.is_kernel,
            error_message: None,
        })
        .collect())
}

fn sv(parts: &[&str]) -> Vec<String> {
    parts.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expand(line: &str) -> Result<Vec<Vec<String>>, AsmError> {
        let symbols = super::super::tokenize_line(line).unwrap().symbols;
        let item = ProgramItem::new(ItemKind::Pseudo, symbols, 7);
        Ok(expand_pseudo(&item)?.into_iter().map(|i| i.symbols).collect())
    }

    #[test]
    fn simple_expansions() {
        assert_eq!(expand("nop").unwrap(), [sv(&["addi", "x0", "x0", "0"])]);
        assert_eq!(expand("mv a0, a1").unwrap(), [sv(&["addi", "a0", "a1", "0"])]);
        assert_eq!(expand("li x5, 7").unwrap(), [sv(&["addi", "x5", "x0", "7"])]);
        assert_eq!(expand("j done").unwrap(), [sv(&["jal", "x0", "done"])]);
        assert_eq!(expand("jr t0").unwrap(), [sv(&["jalr", "x0", "t0", "0"])]);
        assert_eq!(expand("ret").unwrap(), [sv(&["jalr", "x0", "ra", "0"])]);
        assert_eq!(expand("beqz a0, end").unwrap(), [sv(&["beq", "a0", "x0", "end"])]);
        assert_eq!(expand("bnez a0, end").unwrap(), [sv(&["bne", "a0", "x0", "end"])]);
        assert_eq!(expand("bgt a0, a1, L").unwrap(), [sv(&["blt", "a1", "a0", "L"])]);
        assert_eq!(
            expand("la a0, msg").unwrap(),
            [sv(&["lui", "a0", "%hi(msg)"]), sv(&["addi", "a0", "a0", "%lo(msg)"])]
        );
    }

    #[test]
    fn li_with_carry_correction() {
        assert_eq!(
            expand("li x5, 0x12345FFF").unwrap(),
            [sv(&["lui", "x5", "0x12346"]), sv(&["addi", "x5", "x5", "-1"])]
        );
        assert_eq!(
            expand("li x5, 0x10000000").unwrap(),
            [sv(&["lui", "x5", "0x10000"]), sv(&["addi", "x5", "x5", "0"])]
        );
        assert_eq!(expand("li x5, -2048").unwrap().len(), 1);
        assert_eq!(expand("li x5, 2048").unwrap().len(), 2);
        assert!(expand("li x5, 0x100000000").is_err());
    }

    #[test]
    fn expansions_keep_line_and_get_consecutive_addresses() {
        let mut item = ProgramItem::new(ItemKind::Pseudo, sv(&["li", "t0", "0x7ffffff0"]), 3);
        item.address = Some(0x40);
        item.is_kernel = true;
        let out = expand_pseudo(&item).unwrap();
        assert_eq!(out.iter().map(|i| i.address).collect::<Vec<_>>(), [Some(0x40), Some(0x44)]);
        assert!(out.iter().all(|i| i.line == 3 && i.is_kernel && i.kind == ItemKind::Instruction));
    }

    #[test]
    fn arity_errors() {
        assert!(matches!(expand("mv a0"), Err(AsmError::Arity { .. })));
        assert!(matches!(expand("nop x1"), Err(AsmError::Arity { .. })));
        assert!(expand("li a0, label").is_err());
        assert!(expand("j 12").is_err());
    }

    #[test]
    fn split_hi_lo_reconstructs() {
        for v in [0u32, 1, 0x7ff, 0x800, 0xfff, 0x12345fff, 0x7ffffff0, 0x80000000, u32::MAX] {
            let (hi, lo) = split_hi_lo(v);
            assert_eq!((hi << 12).wrapping_add(lo as u32), v, "{v:#x}");
        }
    }
}
