use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Fault;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Width {
    Byte,
    Half,
    Word,
}

impl Width {
    pub fn bytes(self) -> u32 {
        match self {
            Width::Byte => 1,
            Width::Half => 2,
            Width::Word => 4,
        }
    }

    pub fn from_bytes(n: u32) -> Option<Width> {
        match n {
            1 => Some(Width::Byte),
            2 => Some(Width::Half),
            4 => Some(Width::Word),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemOp {
    Read { signed: bool },
    Write(u32),
}

/// A word whose value changed during a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MemChange {
    pub address: u32,
    pub old: u32,
    pub new: u32,
}

/// Word-granular sparse memory. Only words that were written (or preloaded)
/// exist in the map; everything else reads as zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SparseMemory {
    words: BTreeMap<u32, u32>,
}

impl SparseMemory {
    pub fn new() -> Self {
        Self::default()
    }

    fn check_align(address: u32, width: Width) -> Result<(), Fault> {
        if !address.is_multiple_of(width.bytes()) {
            return Err(Fault::MisalignedAccess { address, width: width.bytes() });
        }
        Ok(())
    }

    /// The stored word at a word-aligned address, if it was ever materialized.
    pub fn word(&self, address: u32) -> Option<u32> {
        self.words.get(&(address & !3)).copied()
    }

    pub fn read_word(&self, address: u32) -> u32 {
        self.word(address).unwrap_or(0)
    }

    pub fn read(&self, address: u32, width: Width, signed: bool) -> Result<u32, Fault> {
        Self::check_align(address, width)?;
        let word = self.read_word(address);
        let shift = 8 * (address & 3);
        let bits = 8 * width.bytes();
        let raw = if bits == 32 { word } else { (word >> shift) & ((1 << bits) - 1) };
        Ok(if signed && bits < 32 { crate::isa::sign_extend(raw, bits) as u32 } else { raw })
    }

    /// Writes the low `width` bytes of `value`, materializing the containing
    /// word. Returns the change when the stored word's value differs.
    pub fn write(&mut self, address: u32, width: Width, value: u32) -> Result<Option<MemChange>, Fault> {
        Self::check_align(address, width)?;
        let aligned = address & !3;
        let old = self.read_word(aligned);
        let new = if width == Width::Word {
            value
        } else {
            let shift = 8 * (address & 3);
            let mask = ((1u32 << (8 * width.bytes())) - 1) << shift;
            (old & !mask) | ((value << shift) & mask)
        };
        self.words.insert(aligned, new);
        Ok((old != new).then_some(MemChange { address: aligned, old, new }))
    }

    /// Single entry point for reads and writes. Writes return the written value.
    pub fn access(&mut self, address: u32, width: Width, op: MemOp) -> Result<u32, Fault> {
        match op {
            MemOp::Read { signed } => self.read(address, width, signed),
            MemOp::Write(value) => {
                self.write(address, width, value)?;
                Ok(self.read(address, width, false)?)
            }
        }
    }

    pub fn load_word(&mut self, address: u32, value: u32) {
        self.words.insert(address & !3, value);
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (u32, u32)> + '_ {
        self.words.iter().map(|(a, v)| (*a, *v))
    }

    pub fn range(&self, range: std::ops::Range<u64>) -> impl DoubleEndedIterator<Item = (u32, u32)> + '_ {
        use std::ops::Bound;
        let lower = match u32::try_from(range.start) {
            Ok(s) => Bound::Included(s),
            Err(_) => Bound::Excluded(u32::MAX),
        };
        let upper = match u32::try_from(range.end) {
            Ok(e) => Bound::Excluded(e),
            Err(_) => Bound::Unbounded,
        };
        let bounds = if range.start >= range.end { (Bound::Included(0), Bound::Excluded(0)) } else { (lower, upper) };
        self.words.range(bounds).map(|(a, v)| (*a, *v))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}
