use serde::{Deserialize, Serialize};

use crate::assembler::{AssembledProgram, ItemKind};
use crate::emulator::{Breakpoints, HaltStatus, LayoutConfig, MachineState};
use crate::isa::{breakdown, decode, FieldSegment, Reg};

/// Everything a front-end needs to draw the debugger. Values are raw; radix
/// and styling are presentation concerns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSnapshot {
    pub pc: u32,
    pub registers: [u32; 32],
    pub changed_registers: Vec<Reg>,
    pub listing: Vec<ListingLine>,
    pub current_breakdown: Option<Vec<FieldSegment>>,
    pub memory_regions: Vec<MemoryRegion>,
    pub halt: HaltStatus,
    pub step_count: u64,
    pub breakpoints: Vec<u32>,
}

impl StateSnapshot {
    pub fn current_line(&self) -> Option<&ListingLine> {
        self.listing.iter().find(|l| l.is_current)
    }

    /// Address of a label shown in the listing.
    pub fn label_address(&self, name: &str) -> Option<u32> {
        self.listing
            .iter()
            .filter(|l| l.is_label)
            .find(|l| l.text.strip_suffix(':') == Some(name))
            .and_then(|l| l.address)
    }

    /// Value of a word as the machine sees it; unmaterialized words read as zero.
    pub fn word(&self, address: u32) -> u32 {
        self.memory_regions.iter().flat_map(|r| r.words.iter()).find(|w| w.address == address).map_or(0, |w| w.value)
    }

    pub fn region(&self, name: RegionName) -> Option<&MemoryRegion> {
        self.memory_regions.iter().find(|r| r.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ListingLine {
    pub address: Option<u32>,
    pub text: String,
    pub kind: ItemKind,
    pub is_kernel: bool,
    pub is_current: bool,
    pub has_breakpoint: bool,
    pub line: usize,
    pub is_label: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionName {
    Stack,
    Free,
    Heap,
    Data,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryRegion {
    pub name: RegionName,
    pub start: u32,
    /// Exclusive.
    pub end: u32,
    /// Materialized words in descending address order.
    pub words: Vec<MemoryWord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryWord {
    pub address: u32,
    pub value: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

fn clamp_end(end: u64) -> u32 {
    end.min(u32::MAX as u64) as u32
}

/// Splits materialized memory into the stack, free, heap, data and text
/// regions, highest addresses first.
///
/// Every word lands in exactly one region: text takes everything below the
/// data base, data everything up to the heap base, and the rest is divided
/// between heap and stack at the midpoint of the gap between them. The free
/// region is the untouched space in between and never lists words.
pub fn memory_regions(state: &MachineState, layout: &LayoutConfig, program: &AssembledProgram) -> Vec<MemoryRegion> {
    let split = (layout.heap_stack_split() & !3) as u64;
    let data_base = layout.data_base as u64;
    let heap_base = (layout.heap_base as u64).max(data_base);
    let split = split.max(heap_base);

    let collect = |lo: u64, hi: u64, comments: bool| -> Vec<MemoryWord> {
        state
            .memory
            .range(lo..hi)
            .rev()
            .map(|(address, value)| MemoryWord {
                address,
                value,
                comment: comments.then(|| decode(value).ok().map(|d| d.to_string())).flatten(),
            })
            .collect()
    };
    let text_words = collect(0, data_base, true);
    let data_words = collect(data_base, heap_base, false);
    let heap_words = collect(heap_base, split, false);
    let stack_words = collect(split, 1 << 32, false);

    let lowest = |w: &[MemoryWord]| w.last().map(|x| x.address as u64);
    let highest_end = |w: &[MemoryWord]| w.first().map(|x| x.address as u64 + 4);

    let text_range = program.text_range();
    let text = MemoryRegion {
        name: RegionName::Text,
        start: lowest(&text_words).unwrap_or(u64::MAX).min(text_range.start as u64) as u32,
        end: clamp_end(highest_end(&text_words).unwrap_or(0).max(text_range.end as u64)),
        words: text_words,
    };
    let data = MemoryRegion {
        name: RegionName::Data,
        start: layout.data_base,
        end: clamp_end(highest_end(&data_words).unwrap_or(0).max(program.data_range().end as u64)),
        words: data_words,
    };
    let heap_end = highest_end(&heap_words).unwrap_or(heap_base);
    let heap =
        MemoryRegion { name: RegionName::Heap, start: heap_base as u32, end: clamp_end(heap_end), words: heap_words };
    let stack_start = lowest(&stack_words).unwrap_or(layout.stack_top as u64).min(layout.stack_top as u64);
    let stack = MemoryRegion {
        name: RegionName::Stack,
        start: stack_start as u32,
        end: clamp_end(highest_end(&stack_words).unwrap_or(0).max(layout.stack_top as u64)),
        words: stack_words,
    };
    let free =
        MemoryRegion { name: RegionName::Free, start: clamp_end(heap_end), end: stack_start as u32, words: Vec::new() };
    vec![stack, free, heap, data, text]
}

/// Builds the full snapshot of a loaded program.
pub fn snapshot(
    state: &MachineState,
    program: &AssembledProgram,
    breakpoints: &Breakpoints,
    changed_registers: &[Reg],
) -> StateSnapshot {
    let current_item =
        program.items.iter().position(|i| i.kind == ItemKind::Instruction && i.address == Some(state.pc));
    let listing = program
        .items
        .iter()
        .enumerate()
        .map(|(idx, item)| {
            let executable = matches!(item.kind, ItemKind::Instruction | ItemKind::Pseudo);
            ListingLine {
                address: item.address,
                text: item.text(),
                kind: item.kind,
                is_kernel: item.is_kernel,
                is_current: Some(idx) == current_item,
                has_breakpoint: executable && item.address.is_some_and(|a| breakpoints.contains(a)),
                line: item.line,
                is_label: item.kind == ItemKind::Label,
            }
        })
        .collect();

    let current_breakdown = (state.halt != HaltStatus::Fault && program.is_instruction_address(state.pc))
        .then(|| breakdown(state.memory.read_word(state.pc)).ok())
        .flatten();

    StateSnapshot {
        pc: state.pc,
        registers: *state.registers(),
        changed_registers: changed_registers.to_vec(),
        listing,
        current_breakdown,
        memory_regions: memory_regions(state, &LayoutConfig::for_program(program), program),
        halt: state.halt,
        step_count: state.step_count,
        breakpoints: breakpoints.iter().collect(),
    }
}
