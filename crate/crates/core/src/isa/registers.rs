use std::fmt;

use serde::{Deserialize, Serialize};

use super::IsaError;

const ABI_NAMES: [&str; 32] = [
    "zero", "ra", "sp", "gp", "tp", "t0", "t1", "t2", "s0", "s1", "a0", "a1", "a2", "a3", "a4", "a5", "a6", "a7", "s2",
    "s3", "s4", "s5", "s6", "s7", "s8", "s9", "s10", "s11", "t3", "t4", "t5", "t6",
];

/// Index into the 32-entry integer register file. `x0` is hardwired to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Reg(u8);

impl Reg {
    pub const ZERO: Reg = Reg(0);
    pub const RA: Reg = Reg(1);
    pub const SP: Reg = Reg(2);
    pub const GP: Reg = Reg(3);
    pub const A0: Reg = Reg(10);

    pub fn new(index: u8) -> Option<Reg> {
        (index < 32).then_some(Reg(index))
    }

    /// Takes the low five bits of an instruction field.
    pub(crate) fn from_field(bits: u32) -> Reg {
        Reg((bits & 0x1f) as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn abi_name(self) -> &'static str {
        ABI_NAMES[self.0 as usize]
    }

    pub fn all() -> impl Iterator<Item = Reg> {
        (0..32).map(Reg)
    }
}

impl TryFrom<u8> for Reg {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Reg::new(value).ok_or_else(|| format!("register index {value} out of range"))
    }
}

impl From<Reg> for u8 {
    fn from(r: Reg) -> u8 {
        r.0
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// Accepts `x0`..`x31` and the ABI aliases (including `fp` for `s0`), ignoring case.
pub fn register_name_to_index(name: &str) -> Result<Reg, IsaError> {
    let lower = name.to_ascii_lowercase();
    if let Some(digits) = lower.strip_prefix('x') {
        // reject forms like "x05" or "x+1"
        if !digits.is_empty()
            && digits.bytes().all(|b| b.is_ascii_digit())
            && (digits == "0" || !digits.starts_with('0'))
        {
            if let Some(r) = digits.parse::<u8>().ok().and_then(Reg::new) {
                return Ok(r);
            }
        }
        return Err(IsaError::UnknownRegister(name.to_string()));
    }
    if lower == "fp" {
        return Ok(Reg(8));
    }
    ABI_NAMES
        .iter()
        .position(|n| *n == lower)
        .map(|i| Reg(i as u8))
        .ok_or_else(|| IsaError::UnknownRegister(name.to_string()))
}
