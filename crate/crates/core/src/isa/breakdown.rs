use serde::{Deserialize, Serialize};

use super::codec::identify;
use super::{Format, IsaError, Mnemonic};

/// One column of the binary instruction view: a bit range, what it holds,
/// and the bits themselves (most significant first).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSegment {
    pub hi: u8,
    pub lo: u8,
    pub name: String,
    pub bits: String,
}

fn layout(mnemonic: Mnemonic) -> &'static [(u8, u8, &'static str)] {
    const TAIL_I: [(u8, u8, &str); 4] = [(19, 15, "rs1"), (14, 12, "funct3"), (11, 7, "rd"), (6, 0, "opcode")];
    match mnemonic {
        m if m.is_shift_imm() => &[(31, 25, "funct7"), (24, 20, "shamt"), TAIL_I[0], TAIL_I[1], TAIL_I[2], TAIL_I[3]],
        Mnemonic::Fence => {
            &[(31, 28, "fm"), (27, 24, "pred"), (23, 20, "succ"), TAIL_I[0], TAIL_I[1], TAIL_I[2], TAIL_I[3]]
        }
        m => match m.format() {
            Format::R => &[
                (31, 25, "funct7"),
                (24, 20, "rs2"),
                (19, 15, "rs1"),
                (14, 12, "funct3"),
                (11, 7, "rd"),
                (6, 0, "opcode"),
            ],
            Format::I => &[(31, 20, "imm"), TAIL_I[0], TAIL_I[1], TAIL_I[2], TAIL_I[3]],
            Format::S => &[
                (31, 25, "imm[11:5]"),
                (24, 20, "rs2"),
                (19, 15, "rs1"),
                (14, 12, "funct3"),
                (11, 7, "imm[4:0]"),
                (6, 0, "opcode"),
            ],
            Format::B => &[
                (31, 25, "imm[12|10:5]"),
                (24, 20, "rs2"),
                (19, 15, "rs1"),
                (14, 12, "funct3"),
                (11, 7, "imm[4:1|11]"),
                (6, 0, "opcode"),
            ],
            Format::U => &[(31, 12, "imm[31:12]"), (11, 7, "rd"), (6, 0, "opcode")],
            Format::J => &[(31, 12, "imm[20|10:1|11|19:12]"), (11, 7, "rd"), (6, 0, "opcode")],
        },
    }
}

/// Splits an instruction word into its named bit fields, from bit 31 down to bit 0.
pub fn breakdown(word: u32) -> Result<Vec<FieldSegment>, IsaError> {
    let mnemonic = identify(word)?;
    Ok(layout(mnemonic)
        .iter()
        .map(|&(hi, lo, name)| {
            let width = (hi - lo + 1) as usize;
            let value = (word >> lo) as u64 & ((1u64 << width) - 1);
            FieldSegment { hi, lo, name: name.to_string(), bits: format!("{value:0width$b}") }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::table::OP_TABLE;

    #[test]
    fn r_type_has_six_columns() {
        let segs = breakdown(0x003100B3).unwrap();
        let names: Vec<_> = segs.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["funct7", "rs2", "rs1", "funct3", "rd", "opcode"]);
        assert_eq!(segs[1].bits, "00011");
    }

    #[test]
    fn i_type_replaces_funct7_and_rs2_with_imm() {
        let segs = breakdown(0x00000013).unwrap();
        assert_eq!(segs.len(), 5);
        assert_eq!((segs[0].hi, segs[0].lo, segs[0].name.as_str()), (31, 20, "imm"));
    }

    #[test]
    fn illegal_word_has_no_breakdown() {
        assert_eq!(breakdown(0), Err(IsaError::IllegalInstruction(0)));
    }

    #[test]
    fn every_layout_tiles_the_word() {
        for spec in OP_TABLE {
            let mut next = 31i32;
            for &(hi, lo, _) in layout(spec.mnemonic) {
                assert_eq!(hi as i32, next, "{}", spec.mnemonic);
                assert!(lo <= hi);
                next = lo as i32 - 1;
            }
            assert_eq!(next, -1, "{}", spec.mnemonic);
        }
    }
}
