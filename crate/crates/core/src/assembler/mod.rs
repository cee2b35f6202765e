//! Kernel wrapping, two-pass parsing and encoding of student assembly.
//!
//! `assemble` is the whole pipeline. The individual stages are public so
//! front-ends can show intermediate results (the item list and label map) and
//! so each stage can be tested on its own.

mod directive;
mod kernel;
mod lexer;
mod operands;
mod parser;
mod pseudo;
mod resolve;

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::isa::IsaError;

pub use directive::{process_directive, Directive, Emission};
pub use kernel::{wrap_with_kernel, CombinedSource, EXIT_LABEL};
pub use lexer::{tokenize_line, LineTokens};
pub use operands::parse_number;
pub use parser::{parse, Parsed};
pub use pseudo::{expand_pseudo, is_pseudo};
pub use resolve::resolve_and_encode;

pub const DEFAULT_TEXT_BASE: u32 = 0x0000_0000;
pub const DEFAULT_DATA_BASE: u32 = 0x1000_0000;
pub const DEFAULT_STACK_TOP: u32 = 0x7fff_fff0;

/// Segment bases used when wrapping and laying out a program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub text_base: u32,
    pub data_base: u32,
    pub stack_top: u32,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { text_base: DEFAULT_TEXT_BASE, data_base: DEFAULT_DATA_BASE, stack_top: DEFAULT_STACK_TOP }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<(), AsmError> {
        let aligned = [self.text_base, self.data_base, self.stack_top].iter().all(|a| a % 4 == 0);
        if !aligned || self.text_base >= self.data_base || self.data_base >= self.stack_top {
            return Err(AsmError::InvalidConfig(*self));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemKind {
    Instruction,
    Label,
    Pseudo,
    Directive,
    Error,
}

/// One parsed source element.
///
/// A source line can produce several items: a label followed by an
/// instruction, or a pseudo-instruction followed by the base instructions it
/// expands to (those share the pseudo's line number).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramItem {
    pub symbols: Vec<String>,
    pub kind: ItemKind,
    /// 1-based line in the combined kernel + user source.
    pub line: usize,
    /// 1-based line in the user's own file, absent for kernel lines.
    pub user_line: Option<usize>,
    pub address: Option<u32>,
    pub is_kernel: bool,
    pub error_message: Option<String>,
}

impl ProgramItem {
    pub fn new(kind: ItemKind, symbols: Vec<String>, line: usize) -> Self {
        Self { symbols, kind, line, user_line: None, address: None, is_kernel: false, error_message: None }
    }

    pub(crate) fn into_error(mut self, err: &AsmError) -> Self {
        self.kind = ItemKind::Error;
        self.address = None;
        self.error_message = Some(err.to_string());
        self
    }

    /// Source-like rendering used in listings.
    pub fn text(&self) -> String {
        let Some((head, ops)) = self.symbols.split_first() else {
            return String::new();
        };
        match self.kind {
            ItemKind::Label => format!("{head}:"),
            _ if ops.is_empty() => head.clone(),
            ItemKind::Instruction if uses_offset_form(head, ops) => {
                format!("{head} {}, {}({})", ops[0], ops[1], ops[2])
            }
            _ => format!("{head} {}", ops.join(", ")),
        }
    }

    pub fn diagnostic(&self) -> Option<Diagnostic> {
        (self.kind == ItemKind::Error).then(|| Diagnostic {
            line: self.line,
            user_line: self.user_line,
            message: self.error_message.clone().unwrap_or_default(),
        })
    }
}

fn uses_offset_form(mnemonic: &str, ops: &[String]) -> bool {
    use crate::isa::{Format, Mnemonic};
    let Ok(m) = mnemonic.parse::<Mnemonic>() else {
        return false;
    };
    ops.len() == 3
        && (m.is_load() || m.format() == Format::S || m == Mnemonic::Jalr)
        && crate::isa::register_name_to_index(&ops[1]).is_err()
        && crate::isa::register_name_to_index(&ops[2]).is_ok()
}

/// Label name to byte address.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap(BTreeMap<String, u32>);

impl LabelMap {
    pub fn get(&self, name: &str) -> Option<u32> {
        self.0.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn insert(&mut self, name: String, address: u32) {
        self.0.insert(name, address);
    }

    /// Labels pointing at `address`, in name order.
    pub fn names_at(&self, address: u32) -> impl Iterator<Item = &str> {
        self.0.iter().filter(move |(_, a)| **a == address).map(|(k, _)| k.as_str())
    }
}

/// An encoded instruction and the index of the item it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TextWord {
    pub address: u32,
    pub word: u32,
    pub item: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssembledProgram {
    pub items: Vec<ProgramItem>,
    pub labels: LabelMap,
    pub text_image: Vec<TextWord>,
    /// Word-aligned, little-endian packed data segment contents.
    pub data_image: Vec<(u32, u32)>,
    pub entry_address: u32,
    pub exit_address: u32,
    pub config: KernelConfig,
    pub source: CombinedSource,
}

impl AssembledProgram {
    pub fn text_range(&self) -> Range<u32> {
        let start = self.config.text_base;
        start..start + 4 * self.text_image.len() as u32
    }

    pub fn data_range(&self) -> Range<u32> {
        let start = self.config.data_base;
        start..start + 4 * self.data_image.len() as u32
    }

    pub fn is_instruction_address(&self, address: u32) -> bool {
        address.is_multiple_of(4) && self.text_range().contains(&address)
    }

    pub fn text_word_at(&self, address: u32) -> Option<&TextWord> {
        if !self.is_instruction_address(address) {
            return None;
        }
        self.text_image.get(((address - self.config.text_base) / 4) as usize)
    }

    /// Number of kernel instructions executed before the first user line.
    pub fn kernel_prefix_len(&self) -> usize {
        self.text_image
            .iter()
            .take_while(|w| {
                let item = &self.items[w.item];
                item.is_kernel && item.line <= self.source.prefix_lines
            })
            .count()
    }
}

/// An error attached to a source line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: usize,
    pub user_line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.user_line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "kernel line {}: {}", self.line, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AsmError {
    #[error("unknown mnemonic `{0}`")]
    UnknownMnemonic(String),
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("malformed operand `{token}`: {reason}")]
    MalformedOperand { token: String, reason: String },
    #[error("`{mnemonic}` expects {expected}, found {found} operand(s)")]
    Arity { mnemonic: String, expected: &'static str, found: usize },
    #[error("invalid label name `{0}`")]
    InvalidLabel(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("undefined label `{name}` on line {line}")]
    UndefinedLabel { name: String, line: usize },
    #[error("branch target out of range on line {line} (offset {offset})")]
    BranchOutOfRange { line: usize, offset: i64 },
    #[error("unterminated string literal")]
    UnterminatedString,
    #[error("`{0}` is only allowed in the .data segment")]
    DataOutsideDataSegment(String),
    #[error("instructions are only allowed in the .text segment")]
    InstructionOutsideText,
    #[error("{0} segment overflows into the next segment")]
    SegmentOverflow(&'static str),
    #[error("invalid layout {0:?}")]
    InvalidConfig(KernelConfig),
    #[error("program has {} error(s)", .0.len())]
    AssemblyHasErrors(Vec<Diagnostic>),
    #[error(transparent)]
    Isa(#[from] IsaError),
}

/// Wraps, parses, resolves and encodes a user program.
pub fn assemble(user_source: &str, config: &KernelConfig) -> Result<AssembledProgram, AsmError> {
    config.validate()?;
    let combined = wrap_with_kernel(user_source, config);
    let parsed = parse(&combined, config);
    resolve_and_encode(parsed, config, combined)
}
