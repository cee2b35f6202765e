use super::operands::{malformed, parse_number};
use super::{AsmError, ProgramItem};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Directive {
    Text,
    Data,
    /// `.globl` / `.global`, accepted and ignored.
    Global,
    Word(Vec<u32>),
    Half(Vec<u16>),
    Byte(Vec<u8>),
    Space(u32),
    /// NUL-terminated string from `.string` or `.asciz`.
    Asciz(Vec<u8>),
}

impl Directive {
    pub fn parse(symbols: &[String]) -> Result<Directive, AsmError> {
        let (head, args) = symbols.split_first().ok_or_else(|| malformed("", "empty statement"))?;
        let no_args = |d: Directive| {
            if args.is_empty() {
                Ok(d)
            } else {
                Err(AsmError::Arity { mnemonic: head.clone(), expected: "no operands", found: args.len() })
            }
        };
        let needs_args = || {
            if args.is_empty() {
                Err(AsmError::Arity { mnemonic: head.clone(), expected: "at least one value", found: 0 })
            } else {
                Ok(())
            }
        };
        match head.as_str() {
            ".text" => no_args(Directive::Text),
            ".data" => no_args(Directive::Data),
            ".globl" | ".global" => Ok(Directive::Global),
            ".word" => {
                needs_args()?;
                let v = values(args, i32::MIN as i64, u32::MAX as i64)?;
                Ok(Directive::Word(v.into_iter().map(|x| x as u32).collect()))
            }
            ".half" => {
                needs_args()?;
                let v = values(args, i16::MIN as i64, u16::MAX as i64)?;
                Ok(Directive::Half(v.into_iter().map(|x| x as u16).collect()))
            }
            ".byte" => {
                needs_args()?;
                let v = values(args, i8::MIN as i64, u8::MAX as i64)?;
                Ok(Directive::Byte(v.into_iter().map(|x| x as u8).collect()))
            }
            ".space" => match args {
                [n] => {
                    let n = parse_number(n)
                        .filter(|v| (0..=0x0100_0000).contains(v))
                        .ok_or_else(|| malformed(n, "expected a byte count"))?;
                    Ok(Directive::Space(n as u32))
                }
                _ => Err(AsmError::Arity { mnemonic: head.clone(), expected: "one byte count", found: args.len() }),
            },
            ".string" | ".asciz" => match args {
                [lit] => {
                    let mut bytes = unquote(lit)?;
                    bytes.push(0);
                    Ok(Directive::Asciz(bytes))
                }
                _ => Err(AsmError::Arity { mnemonic: head.clone(), expected: "one string literal", found: args.len() }),
            },
            _ => Err(AsmError::UnknownDirective(head.clone())),
        }
    }

    /// Natural alignment of the emitted data.
    fn alignment(&self) -> u32 {
        match self {
            Directive::Word(_) => 4,
            Directive::Half(_) => 2,
            _ => 1,
        }
    }

    fn bytes(&self) -> Vec<u8> {
        match self {
            Directive::Word(v) => v.iter().flat_map(|w| w.to_le_bytes()).collect(),
            Directive::Half(v) => v.iter().flat_map(|h| h.to_le_bytes()).collect(),
            Directive::Byte(v) | Directive::Asciz(v) => v.clone(),
            Directive::Space(n) => vec![0; *n as usize],
            Directive::Text | Directive::Data | Directive::Global => Vec::new(),
        }
    }

    pub fn emits_data(&self) -> bool {
        !matches!(self, Directive::Text | Directive::Data | Directive::Global)
    }
}

fn values(args: &[String], min: i64, max: i64) -> Result<Vec<i64>, AsmError> {
    args.iter()
        .map(|a| {
            let v = parse_number(a).ok_or_else(|| malformed(a, "expected a number"))?;
            if (min..=max).contains(&v) {
                Ok(v)
            } else {
                Err(malformed(a, &format!("value out of range {min}..={max}")))
            }
        })
        .collect()
}

fn unquote(lit: &str) -> Result<Vec<u8>, AsmError> {
    let inner = lit
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .filter(|_| lit.len() >= 2)
        .ok_or_else(|| malformed(lit, "expected a quoted string"))?;
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        out.push(match chars.next() {
            Some('n') => '\n',
            Some('t') => '\t',
            Some('r') => '\r',
            Some('0') => '\0',
            Some('\\') => '\\',
            Some('"') => '"',
            _ => return Err(malformed(lit, "unsupported escape sequence")),
        });
    }
    Ok(out.into_bytes())
}

/// Bytes a data directive places in memory, starting at `start`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emission {
    pub start: u32,
    pub bytes: Vec<u8>,
    /// Data cursor after the emission.
    pub cursor: u32,
}

/// Lays out a directive at the data cursor. Segment switches and `.globl`
/// emit nothing and leave the cursor unchanged.
pub fn process_directive(item: &ProgramItem, cursor: u32) -> Result<Emission, AsmError> {
    let directive = Directive::parse(&item.symbols)?;
    let align = directive.alignment();
    let start = cursor.div_ceil(align) * align;
    let bytes = directive.bytes();
    let end = start as u64 + bytes.len() as u64;
    let cursor = u32::try_from(end).map_err(|_| AsmError::SegmentOverflow("data"))?;
    Ok(Emission { start, bytes, cursor })
}
