use crate::isa::{encode, Format};

use super::kernel::{CombinedSource, EXIT_LABEL};
use super::operands::{build_template, ImmSource};
use super::parser::Parsed;
use super::pseudo::split_hi_lo;
use super::{AsmError, AssembledProgram, ItemKind, KernelConfig, TextWord};

/// Turns label operands into immediates and encodes every instruction.
///
/// Branch and jump labels become offsets from the instruction's address;
/// `%hi`/`%lo` take the label's absolute address.
pub fn resolve_and_encode(
    parsed: Parsed,
    config: &KernelConfig,
    source: CombinedSource,
) -> Result<AssembledProgram, AsmError> {
    let diagnostics: Vec<_> = parsed.items.iter().filter_map(|i| i.diagnostic()).collect();
    if !diagnostics.is_empty() {
        return Err(AsmError::AssemblyHasErrors(diagnostics));
    }
    let Parsed { items, labels, data } = parsed;

    let mut text_image = Vec::new();
    for (idx, item) in items.iter().enumerate() {
        if item.kind != ItemKind::Instruction {
            continue;
        }
        let address = item.address.expect("instruction items are addressed");
        let template = build_template(&item.symbols)?;
        let target = match template.imm.label() {
            Some(name) => Some(
                labels.get(name).ok_or_else(|| AsmError::UndefinedLabel { name: name.to_string(), line: item.line })?,
            ),
            None => None,
        };
        let imm: Option<i64> = match (&template.imm, target) {
            (ImmSource::None, _) => None,
            (ImmSource::Value(v), _) => Some(*v),
            (ImmSource::PcRelative(_), Some(t)) => Some(t as i64 - address as i64),
            (ImmSource::Hi(_), Some(t)) => Some(((split_hi_lo(t).0 << 12) as i32) as i64),
            (ImmSource::Lo(_), Some(t)) => Some(split_hi_lo(t).1 as i64),
            (_, None) => unreachable!("label operands always resolve or error above"),
        };
        let pc_relative = matches!(template.imm, ImmSource::PcRelative(_));
        let imm32 = match imm.map(i32::try_from) {
            Some(Ok(v)) => Some(v),
            None => None,
            Some(Err(_)) => {
                return Err(AsmError::BranchOutOfRange { line: item.line, offset: imm.unwrap() });
            }
        };
        let word = encode(&template.with_imm(imm32)).map_err(|e| {
            let branchy = matches!(template.mnemonic.format(), Format::B | Format::J);
            if pc_relative && branchy {
                AsmError::BranchOutOfRange { line: item.line, offset: imm.unwrap_or(0) }
            } else {
                AsmError::Isa(e)
            }
        })?;
        text_image.push(TextWord { address, word, item: idx });
    }

    let exit_address =
        labels.get(EXIT_LABEL).ok_or_else(|| AsmError::UndefinedLabel { name: EXIT_LABEL.to_string(), line: 0 })?;

    let data_image = data
        .chunks(4)
        .enumerate()
        .map(|(i, chunk)| {
            let mut b = [0u8; 4];
            b[..chunk.len()].copy_from_slice(chunk);
            (config.data_base + 4 * i as u32, u32::from_le_bytes(b))
        })
        .collect();

    Ok(AssembledProgram {
        items,
        labels,
        text_image,
        data_image,
        entry_address: config.text_base,
        exit_address,
        config: *config,
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembler::{assemble, parse, wrap_with_kernel, DEFAULT_DATA_BASE};
    use crate::isa::decode;

    fn asm(src: &str) -> Result<AssembledProgram, AsmError> {
        assemble(src, &KernelConfig::default())
    }

    fn word_for_line(p: &AssembledProgram, user_line: usize) -> u32 {
        p.text_image.iter().find(|w| p.items[w.item].user_line == Some(user_line)).unwrap().word
    }

    #[test]
    fn forward_branch_is_plus_four() {
        let p = asm("beq x0, x0, next\nnext: nop").unwrap();
        let d = decode(word_for_line(&p, 1)).unwrap();
        assert_eq!(d.imm, Some(4));
    }

    #[test]
    fn undefined_label_reports_line() {
        let err = asm("nop\nbne x1, x2, nowhere").unwrap_err();
        let prefix = wrap_with_kernel("", &KernelConfig::default()).prefix_lines;
        assert_eq!(err, AsmError::UndefinedLabel { name: "nowhere".into(), line: prefix + 2 });
    }

    #[test]
    fn exit_jump_is_self_loop() {
        let p = asm("").unwrap();
        let last = p.text_image.last().unwrap();
        assert_eq!(last.address, p.exit_address);
        assert_eq!(last.word, 0x0000006f);
        assert_eq!(p.entry_address, 0);
    }

    #[test]
    fn la_loads_absolute_address() {
        let p = asm(".data\n.space 0x900\nmsg: .string \"hi\"\n.text\nla a0, msg").unwrap();
        let target = p.labels.get("msg").unwrap();
        assert_eq!(target, DEFAULT_DATA_BASE + 0x900);
        let words: Vec<_> = p
            .text_image
            .iter()
            .filter(|w| p.items[w.item].user_line == Some(5))
            .map(|w| decode(w.word).unwrap())
            .collect();
        let value = (words[0].imm.unwrap() as u32).wrapping_add(words[1].imm.unwrap() as u32);
        assert_eq!(value, target);
    }

    #[test]
    fn branch_out_of_range() {
        let src = format!("beq x0, x0, far\n.text\n{}far: nop", "nop\n".repeat(1100));
        assert!(matches!(asm(&src), Err(AsmError::BranchOutOfRange { .. })));
    }

    #[test]
    fn errors_block_resolution() {
        let cfg = KernelConfig::default();
        let src = wrap_with_kernel("addi x1", &cfg);
        let parsed = parse(&src, &cfg);
        match resolve_and_encode(parsed, &cfg, src) {
            Err(AsmError::AssemblyHasErrors(d)) => {
                assert_eq!(d.len(), 1);
                assert_eq!(d[0].user_line, Some(1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn data_image_packs_words() {
        let p = asm(".data\n.string \"ok\"\n.word 5").unwrap();
        assert_eq!(p.data_image, [(DEFAULT_DATA_BASE, 0x0000_6b6f), (DEFAULT_DATA_BASE + 4, 5)]);
    }

    #[test]
    fn kernel_prefix_is_four_instructions() {
        let p = asm("nop").unwrap();
        assert_eq!(p.kernel_prefix_len(), 4);
        assert_eq!(p.text_image.len(), 6);
    }
}
