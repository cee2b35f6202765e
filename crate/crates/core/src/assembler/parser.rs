use std::collections::HashSet;

use crate::isa::lookup_opspec;

use super::directive::{process_directive, Directive};
use super::kernel::{CombinedSource, EXIT_LABEL};
use super::lexer::tokenize_line;
use super::operands::build_template;
use super::pseudo::{expand_pseudo, is_pseudo};
use super::{AsmError, ItemKind, KernelConfig, LabelMap, ProgramItem};

/// Output of the two parsing passes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed {
    pub items: Vec<ProgramItem>,
    pub labels: LabelMap,
    /// Data segment bytes starting at `data_base`.
    pub data: Vec<u8>,
}

impl Parsed {
    pub fn errors(&self) -> impl Iterator<Item = &ProgramItem> {
        self.items.iter().filter(|i| i.kind == ItemKind::Error)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Segment {
    Text,
    Data,
}

struct Pass1<'a> {
    config: &'a KernelConfig,
    items: Vec<ProgramItem>,
    labels: LabelMap,
    defined: HashSet<String>,
    /// Label items still waiting for the address of the next item in their segment.
    pending: Vec<(usize, Segment)>,
    segment: Segment,
    text_cursor: u32,
    data_cursor: u32,
    data: Vec<u8>,
}

impl Pass1<'_> {
    fn bind_pending(&mut self, segment: Segment, address: u32) {
        let items = &mut self.items;
        let labels = &mut self.labels;
        self.pending.retain(|&(idx, seg)| {
            if seg != segment {
                return true;
            }
            items[idx].address = Some(address);
            labels.insert(items[idx].symbols[0].clone(), address);
            false
        });
    }

    fn define_label(&mut self, name: String, base: &ProgramItem) {
        let mut item = ProgramItem { kind: ItemKind::Label, symbols: vec![name.clone()], ..base.clone() };
        let reserved = name == EXIT_LABEL && !base.is_kernel;
        if reserved || self.defined.contains(&name) {
            self.items.push(item.into_error(&AsmError::DuplicateLabel(name)));
            return;
        }
        self.defined.insert(name);
        item.address = None;
        self.pending.push((self.items.len(), self.segment));
        self.items.push(item);
    }

    fn text_slot_ok(&self, slots: u32) -> Result<(), AsmError> {
        if self.segment != Segment::Text {
            return Err(AsmError::InstructionOutsideText);
        }
        let end = self.text_cursor as u64 + 4 * slots as u64;
        let limit = if self.config.text_base < self.config.data_base { self.config.data_base as u64 } else { 1 << 32 };
        if end > limit {
            return Err(AsmError::SegmentOverflow("text"));
        }
        Ok(())
    }

    fn directive(&mut self, mut item: ProgramItem) {
        let directive = match Directive::parse(&item.symbols) {
            Ok(d) => d,
            Err(e) => return self.items.push(item.into_error(&e)),
        };
        match directive {
            Directive::Text => {
                self.bind_pending(Segment::Data, self.data_cursor);
                self.segment = Segment::Text;
            }
            Directive::Data => {
                self.bind_pending(Segment::Text, self.text_cursor);
                self.segment = Segment::Data;
            }
            Directive::Global => {}
            d if d.emits_data() => {
                if self.segment != Segment::Data {
                    let err = AsmError::DataOutsideDataSegment(item.symbols[0].clone());
                    return self.items.push(item.into_error(&err));
                }
                let emission = match process_directive(&item, self.data_cursor) {
                    Ok(e) if e.cursor <= self.config.stack_top => e,
                    Ok(_) => return self.items.push(item.into_error(&AsmError::SegmentOverflow("data"))),
                    Err(e) => return self.items.push(item.into_error(&e)),
                };
                let offset = (emission.start - self.config.data_base) as usize;
                self.data.resize(offset, 0);
                self.data.extend_from_slice(&emission.bytes);
                self.bind_pending(Segment::Data, emission.start);
                self.data_cursor = emission.cursor;
                item.address = Some(emission.start);
            }
            _ => {}
        }
        self.items.push(item);
    }

    fn pseudo(&mut self, mut item: ProgramItem) {
        item.address = Some(self.text_cursor);
        let expanded = expand_pseudo(&item).and_then(|exp| {
            self.text_slot_ok(exp.len() as u32)?;
            Ok(exp)
        });
        match expanded {
            Ok(exp) => {
                self.bind_pending(Segment::Text, self.text_cursor);
                self.text_cursor += 4 * exp.len() as u32;
                self.items.push(item);
                self.items.extend(exp);
            }
            Err(e) => self.items.push(item.into_error(&e)),
        }
    }

    fn instruction(&mut self, mut item: ProgramItem) {
        if let Err(e) = self.text_slot_ok(1) {
            return self.items.push(item.into_error(&e));
        }
        self.bind_pending(Segment::Text, self.text_cursor);
        item.address = Some(self.text_cursor);
        self.text_cursor += 4;
        self.items.push(item);
    }
}

/// Two-pass parse of a combined source.
///
/// Pass one tokenizes every line, classifies statements, expands
/// pseudo-instructions and assigns text and data addresses, binding each label
/// to the address of the next item in its segment. Pass two checks operand
/// arity and kinds of every base instruction. Label references are left
/// unresolved. Problems never abort parsing: they become `Error` items so that
/// every mistake in the file is reported at once.
pub fn parse(source: &CombinedSource, config: &KernelConfig) -> Parsed {
    let mut p = Pass1 {
        config,
        items: Vec::new(),
        labels: LabelMap::default(),
        defined: HashSet::new(),
        pending: Vec::new(),
        segment: Segment::Text,
        text_cursor: config.text_base,
        data_cursor: config.data_base,
        data: Vec::new(),
    };

    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let mut base = ProgramItem::new(ItemKind::Instruction, Vec::new(), line);
        base.is_kernel = source.is_kernel_line(line);
        base.user_line = source.user_line(line);

        let tokens = match tokenize_line(raw) {
            Ok(t) => t,
            Err(e) => {
                let item = ProgramItem { symbols: vec![raw.trim().to_string()], ..base };
                p.items.push(item.into_error(&e));
                continue;
            }
        };
        for label in tokens.labels {
            p.define_label(label, &base);
        }
        if tokens.symbols.is_empty() {
            continue;
        }

        let head = tokens.symbols[0].clone();
        let mut item = ProgramItem { symbols: tokens.symbols, ..base };
        if head.starts_with('.') {
            item.kind = ItemKind::Directive;
            p.directive(item);
        } else if is_pseudo(&item.symbols) {
            item.kind = ItemKind::Pseudo;
            p.pseudo(item);
        } else if lookup_opspec(&head).is_ok() {
            p.instruction(item);
        } else {
            p.items.push(item.into_error(&AsmError::UnknownMnemonic(head)));
        }
    }
    p.bind_pending(Segment::Text, p.text_cursor);
    p.bind_pending(Segment::Data, p.data_cursor);

    // Pass two: operand validation.
    let mut items = p.items;
    for item in items.iter_mut().filter(|i| i.kind == ItemKind::Instruction) {
        if let Err(e) = build_template(&item.symbols) {
            *item = item.clone().into_error(&e);
        }
    }

    Parsed { items, labels: p.labels, data: p.data }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembler::{wrap_with_kernel, DEFAULT_DATA_BASE};

    fn plain(src: &str) -> Parsed {
        parse(&CombinedSource::plain(src), &KernelConfig::default())
    }

    #[test]
    fn label_shares_line_with_instruction() {
        let p = plain("loop: addi x1, x1, -1");
        assert_eq!(p.items.len(), 2);
        assert_eq!(p.items[0].kind, ItemKind::Label);
        assert_eq!(p.items[1].symbols, ["addi", "x1", "x1", "-1"]);
        assert_eq!(p.labels.get("loop"), p.items[1].address);
        assert_eq!(p.items[1].address, Some(0));
    }

    #[test]
    fn missing_operands_become_error_item() {
        let p = plain("addi x1");
        assert_eq!(p.items.len(), 1);
        let e = &p.items[0];
        assert_eq!(e.kind, ItemKind::Error);
        assert_eq!(e.address, None);
        assert!(e.error_message.as_deref().unwrap().contains("expects"));
    }

    #[test]
    fn offset_operand_tokens() {
        let p = plain("lw x5, 8(x2)");
        assert_eq!(p.items[0].kind, ItemKind::Instruction);
        assert_eq!(p.items[0].symbols, ["lw", "x5", "8", "x2"]);
        assert_eq!(p.items[0].text(), "lw x5, 8(x2)");
    }

    #[test]
    fn pseudo_followed_by_its_expansion() {
        let p = plain("li t0, 0x12345fff\nnop");
        let kinds: Vec<_> = p.items.iter().map(|i| (i.kind, i.address, i.line)).collect();
        assert_eq!(
            kinds,
            [
                (ItemKind::Pseudo, Some(0), 1),
                (ItemKind::Instruction, Some(0), 1),
                (ItemKind::Instruction, Some(4), 1),
                (ItemKind::Pseudo, Some(8), 2),
                (ItemKind::Instruction, Some(8), 2),
            ]
        );
    }

    #[test]
    fn data_labels_and_alignment() {
        let p = plain(".data\nb: .byte 1\nw: .word 7\n.text\nmain: nop\nend:");
        assert_eq!(p.labels.get("b"), Some(DEFAULT_DATA_BASE));
        assert_eq!(p.labels.get("w"), Some(DEFAULT_DATA_BASE + 4));
        assert_eq!(p.labels.get("main"), Some(0));
        assert_eq!(p.labels.get("end"), Some(4));
        assert_eq!(p.data, [1, 0, 0, 0, 7, 0, 0, 0]);
    }

    #[test]
    fn errors_accumulate() {
        let p = plain("nop\nfoo x1\naddi x1, x2\n.align 4\nadd x1, x2, x3\nlabel: label:");
        let lines: Vec<_> = p.errors().map(|e| e.line).collect();
        assert_eq!(lines, [2, 3, 4, 6]);
    }

    #[test]
    fn segment_misuse() {
        let p = plain(".word 1\n.data\nadd x1, x2, x3");
        let msgs: Vec<_> = p.errors().map(|e| e.error_message.clone().unwrap()).collect();
        assert_eq!(msgs.len(), 2);
        assert!(msgs[0].contains(".data"));
        assert!(msgs[1].contains(".text"));
    }

    #[test]
    fn user_cannot_define_exit_label() {
        let cfg = KernelConfig::default();
        let src = wrap_with_kernel("__exit: nop", &cfg);
        let p = parse(&src, &cfg);
        let errs: Vec<_> = p.errors().collect();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].user_line, Some(1));
        assert!(errs[0].error_message.as_deref().unwrap().contains("duplicate label"));
    }

    #[test]
    fn every_nonblank_line_yields_an_item() {
        let src = "a:\n\n  # c\nnop\n???\n.data\n.word 3";
        let p = plain(src);
        for (i, l) in src.lines().enumerate() {
            let has_content = !l.split('#').next().unwrap().trim().is_empty();
            let n = p.items.iter().filter(|it| it.line == i + 1).count();
            assert_eq!(n >= 1, has_content, "line {}", i + 1);
        }
    }
}
