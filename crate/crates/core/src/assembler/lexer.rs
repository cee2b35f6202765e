use super::AsmError;

/// The labels defined on a line and the remaining statement's symbols.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LineTokens {
    pub labels: Vec<String>,
    /// Mnemonic or directive (lowercased) followed by operand tokens.
    pub symbols: Vec<String>,
}

pub(crate) fn is_valid_label(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Cuts a `#` comment, ignoring any `#` inside a string literal.
fn strip_comment(line: &str) -> &str {
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            _ if escaped => escaped = false,
            '\\' if in_string => escaped = true,
            '"' => in_string = !in_string,
            '#' if !in_string => return &line[..i],
            _ => {}
        }
    }
    line
}

/// Splits one source line into labels and symbols.
///
/// Operands are separated by commas or whitespace. `offset(reg)` becomes two
/// tokens, `offset` then `reg`, with a missing offset read as `0`.
/// `%hi(sym)` and `%lo(sym)` stay single tokens and string literals keep
/// their quotes.
pub fn tokenize_line(line: &str) -> Result<LineTokens, AsmError> {
    let mut rest = strip_comment(line).trim();
    let mut out = LineTokens::default();

    while let Some(colon) = rest.find(':') {
        let candidate = &rest[..colon];
        if candidate.contains(|c: char| c.is_whitespace() || c == ',' || c == '"') {
            break;
        }
        if !is_valid_label(candidate) {
            return Err(AsmError::InvalidLabel(candidate.to_string()));
        }
        out.labels.push(candidate.to_string());
        rest = rest[colon + 1..].trim_start();
    }
    if rest.is_empty() {
        return Ok(out);
    }

    let (head, operands) = match rest.find(char::is_whitespace) {
        Some(i) => (&rest[..i], &rest[i..]),
        None => (rest, ""),
    };
    out.symbols.push(head.to_ascii_lowercase());
    out.symbols.extend(split_operands(operands)?);
    Ok(out)
}

fn split_operands(text: &str) -> Result<Vec<String>, AsmError> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    // true until an operand token has been seen since the last comma
    let mut fresh = true;

    while let Some(c) = chars.next() {
        match c {
            ',' => {
                flush(&mut current, &mut tokens);
                fresh = true;
            }
            c if c.is_whitespace() => {
                if !current.is_empty() {
                    fresh = false;
                }
                flush(&mut current, &mut tokens);
            }
            '"' => {
                flush(&mut current, &mut tokens);
                let mut lit = String::from('"');
                let mut closed = false;
                while let Some(c) = chars.next() {
                    lit.push(c);
                    match c {
                        '\\' => lit.extend(chars.next()),
                        '"' => {
                            closed = true;
                            break;
                        }
                        _ => {}
                    }
                }
                if !closed {
                    return Err(AsmError::UnterminatedString);
                }
                tokens.push(lit);
            }
            '(' => {
                let lower = current.to_ascii_lowercase();
                if lower == "%hi" || lower == "%lo" {
                    current.push('(');
                    for c in chars.by_ref() {
                        current.push(c);
                        if c == ')' {
                            break;
                        }
                    }
                    flush(&mut current, &mut tokens);
                } else if current.is_empty() {
                    if fresh {
                        tokens.push("0".to_string());
                    }
                } else {
                    flush(&mut current, &mut tokens);
                }
            }
            ')' => {
                flush(&mut current, &mut tokens);
                fresh = false;
            }
            c => {
                current.push(c);
                fresh = false;
            }
        }
    }
    flush(&mut current, &mut tokens);
    Ok(tokens)
}

fn flush(current: &mut String, tokens: &mut Vec<String>) {
    if !current.is_empty() {
        tokens.push(std::mem::take(current));
    }
}
