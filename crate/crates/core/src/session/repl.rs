use std::io::{self, BufRead, Write};
use std::path::Path;

use crate::assembler::{parse_number, ItemKind};
use crate::isa::Reg;

use super::{Backend, Command, Response, StateSnapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Radix {
    #[default]
    Hex,
    Dec,
    Bin,
}

impl Radix {
    pub fn parse(s: &str) -> Option<Radix> {
        match s {
            "hex" => Some(Radix::Hex),
            "dec" => Some(Radix::Dec),
            "bin" => Some(Radix::Bin),
            _ => None,
        }
    }

    pub fn format(self, value: u32) -> String {
        match self {
            Radix::Hex => format!("0x{value:08x}"),
            Radix::Dec => (value as i32).to_string(),
            Radix::Bin => format!("0b{value:032b}"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReplOptions {
    /// Print a prompt before each command.
    pub interactive: bool,
    /// Echo each command line (useful for scripts).
    pub echo: bool,
}

/// One row per register, e.g. `x5 (t0) = 0x00000007`, with `*` marking
/// registers changed by the last step or run.
pub fn render_registers(snapshot: &StateSnapshot, radix: Radix) -> String {
    let mut out = String::new();
    for r in Reg::all() {
        let mark = if snapshot.changed_registers.contains(&r) { " *" } else { "" };
        out.push_str(&format!("{} ({}) = {}{mark}\n", r, r.abi_name(), radix.format(snapshot.registers[r.index()])));
    }
    out
}

fn render_listing(s: &StateSnapshot) -> String {
    let mut out = String::new();
    for l in &s.listing {
        let cur = if l.is_current { "=>" } else { "  " };
        let bp = if l.has_breakpoint { "*" } else { " " };
        let origin = if l.is_kernel { 'k' } else { ' ' };
        let addr = l.address.map_or_else(|| " ".repeat(10), |a| format!("0x{a:08x}"));
        let indent = match l.kind {
            ItemKind::Label => "",
            _ => "    ",
        };
        out.push_str(&format!("{cur}{bp}{origin} {addr} {:>4} | {indent}{}\n", l.line, l.text));
    }
    out
}

fn render_position(s: &StateSnapshot) -> String {
    let at = s.current_line().map(|l| format!(" line {}: {}", l.line, l.text)).unwrap_or_default();
    let changed: Vec<String> = s
        .changed_registers
        .iter()
        .map(|r| format!("{}={}", r.abi_name(), Radix::Hex.format(s.registers[r.index()])))
        .collect();
    let mut out = format!("[{}] pc=0x{:08x} steps={}{at}\n", s.halt, s.pc, s.step_count);
    if !changed.is_empty() {
        out.push_str(&format!("changed: {}\n", changed.join(" ")));
    }
    out
}

struct Repl<'a, B, W> {
    backend: &'a mut B,
    out: W,
    failures: usize,
}

impl<B: Backend, W: Write> Repl<'_, B, W> {
    fn send(&mut self, cmd: Command) -> io::Result<Option<StateSnapshot>> {
        match self.backend.send(cmd) {
            Response::Ok(s) => Ok(Some(*s)),
            Response::Err { message, .. } => {
                self.fail(&format!("error: {message}"))?;
                Ok(None)
            }
        }
    }

    fn fail(&mut self, msg: &str) -> io::Result<()> {
        self.failures += 1;
        writeln!(self.out, "{msg}")
    }

    fn current(&mut self) -> io::Result<Option<StateSnapshot>> {
        self.send(Command::GetState)
    }

    /// Accepts a number or a label from the current listing.
    fn address(&mut self, token: &str) -> io::Result<Option<u32>> {
        if let Some(n) = parse_number(token).and_then(|n| u32::try_from(n).ok()) {
            return Ok(Some(n));
        }
        let Some(s) = self.current()? else { return Ok(None) };
        match s.label_address(token) {
            Some(a) => Ok(Some(a)),
            None => {
                self.fail(&format!("error: unknown address or label `{token}`"))?;
                Ok(None)
            }
        }
    }

    fn count(&mut self, arg: Option<&str>) -> io::Result<Option<Option<u64>>> {
        match arg.map(|a| parse_number(a).and_then(|n| u64::try_from(n).ok())) {
            None => Ok(Some(None)),
            Some(Some(n)) => Ok(Some(Some(n))),
            Some(None) => {
                self.fail(&format!("error: expected a count, got `{}`", arg.unwrap_or_default()))?;
                Ok(None)
            }
        }
    }

    /// Returns false when the session should end.
    fn execute(&mut self, line: &str) -> io::Result<bool> {
        let words: Vec<&str> = line.split_whitespace().collect();
        let Some((&cmd, args)) = words.split_first() else { return Ok(true) };
        match (cmd, args) {
            ("quit" | "exit", _) => return Ok(false),
            ("help", _) => writeln!(self.out, "{HELP}")?,
            ("load", [path]) => match std::fs::read_to_string(Path::new(path)) {
                Ok(source) => {
                    if let Some(s) = self.send(Command::Load { source })? {
                        let n = s.listing.iter().filter(|l| l.kind == ItemKind::Instruction).count();
                        writeln!(self.out, "loaded {path}: {n} instructions")?;
                        write!(self.out, "{}", render_position(&s))?;
                    }
                }
                Err(e) => self.fail(&format!("error: cannot read {path}: {e}"))?,
            },
            ("step", [] | [_]) => {
                if let Some(count) = self.count(args.first().copied())? {
                    if let Some(s) = self.send(Command::Step { count })? {
                        write!(self.out, "{}", render_position(&s))?;
                    }
                }
            }
            ("run", [] | [_]) => {
                if let Some(max_steps) = self.count(args.first().copied())? {
                    if let Some(s) = self.send(Command::Run { max_steps })? {
                        write!(self.out, "{}", render_position(&s))?;
                    }
                }
            }
            ("break" | "unbreak", [target]) => {
                if let Some(address) = self.address(target)? {
                    let set = cmd == "break";
                    let command = if set { Command::SetBreak { address } } else { Command::ClearBreak { address } };
                    if self.send(command)?.is_some() {
                        let verb = if set { "set" } else { "cleared" };
                        writeln!(self.out, "breakpoint {verb} at 0x{address:08x} ({target})")?;
                    }
                }
            }
            ("regs", [] | [_]) => {
                let radix = match args.first() {
                    None => Some(Radix::Hex),
                    Some(r) => Radix::parse(r),
                };
                match radix {
                    Some(radix) => {
                        if let Some(s) = self.current()? {
                            write!(self.out, "{}", render_registers(&s, radix))?;
                        }
                    }
                    None => self.fail("error: radix must be hex, dec or bin")?,
                }
            }
            ("mem", [addr, n]) => {
                let n = parse_number(n).filter(|n| (0..=4096).contains(n));
                match (self.address(addr)?, n) {
                    (Some(a), Some(n)) if a % 4 == 0 => {
                        if let Some(s) = self.current()? {
                            for i in 0..n as u32 {
                                let address = a.wrapping_add(4 * i);
                                writeln!(self.out, "0x{address:08x}: 0x{:08x}", s.word(address))?;
                            }
                        }
                    }
                    (Some(_), Some(_)) => self.fail("error: address must be word aligned")?,
                    (Some(_), None) => self.fail("error: expected a word count")?,
                    (None, _) => {}
                }
            }
            ("list", []) => {
                if let Some(s) = self.current()? {
                    write!(self.out, "{}", render_listing(&s))?;
                }
            }
            ("reset", []) => {
                if let Some(s) = self.send(Command::Reset)? {
                    write!(self.out, "{}", render_position(&s))?;
                }
            }
            ("load" | "step" | "run" | "break" | "unbreak" | "regs" | "mem" | "list" | "reset", _) => {
                self.fail(&format!("error: wrong arguments for `{cmd}` (try `help`)"))?
            }
            _ => self.fail(&format!("unknown command `{cmd}` (try `help`)"))?,
        }
        Ok(true)
    }
}

const HELP: &str = "\
commands:
  load <file>            assemble and load a program
  step [n]               execute n instructions (default 1)
  run [max]              run to exit, breakpoint or step limit
  break <addr|label>     set a breakpoint
  unbreak <addr|label>   remove a breakpoint
  regs [hex|dec|bin]     show registers (* = changed by last step/run)
  mem <addr> <nwords>    show memory words
  list                   show the program listing (=> current, * breakpoint, k kernel)
  reset                  restart the program, keeping breakpoints
  quit                   leave";

/// Reads commands line by line until `quit` or end of input. Returns the
/// number of commands that failed.
pub fn cli_repl<B: Backend, R: BufRead, W: Write>(
    backend: &mut B,
    input: R,
    output: W,
    options: &ReplOptions,
) -> io::Result<usize> {
    let mut repl = Repl { backend, out: output, failures: 0 };
    let mut lines = input.lines();
    loop {
        if options.interactive {
            write!(repl.out, "(emu) ")?;
            repl.out.flush()?;
        }
        let Some(line) = lines.next() else { break };
        let line = line?;
        let line = line.split('#').next().unwrap_or_default().trim();
        if options.echo && !line.is_empty() {
            writeln!(repl.out, "> {line}")?;
        }
        if !repl.execute(line)? {
            break;
        }
        repl.out.flush()?;
    }
    Ok(repl.failures)
}
