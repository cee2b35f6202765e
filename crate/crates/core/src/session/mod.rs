//! Debug sessions: a loaded program, its machine state and breakpoints,
//! driven by the JSON command protocol.

mod protocol;
mod repl;
mod snapshot;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembler::{assemble, wrap_with_kernel, AsmError, AssembledProgram, KernelConfig};
use crate::emulator::{Breakpoints, EmuError, MachineState, DEFAULT_MAX_STEPS};
use crate::isa::Reg;

pub use protocol::{serve_lines, Backend};
pub use repl::{cli_repl, render_registers, Radix, ReplOptions};
pub use snapshot::{memory_regions, snapshot, ListingLine, MemoryRegion, MemoryWord, RegionName, StateSnapshot};

/// A request from a front-end. On the wire: `{"cmd": "step", "count": 3}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
pub enum Command {
    Load {
        source: String,
    },
    Step {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        count: Option<u64>,
    },
    Run {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_steps: Option<u64>,
    },
    SetBreak {
        address: u32,
    },
    ClearBreak {
        address: u32,
    },
    Reset,
    GetState,
}

/// Reply to exactly one `Command`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "WireResponse", try_from = "WireResponse")]
pub enum Response {
    Ok(Box<StateSnapshot>),
    Err { message: String, line: Option<usize> },
}

impl Response {
    pub fn err(message: impl Into<String>) -> Self {
        Response::Err { message: message.into(), line: None }
    }

    pub fn snapshot(&self) -> Option<&StateSnapshot> {
        match self {
            Response::Ok(s) => Some(s),
            Response::Err { .. } => None,
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, Response::Ok(_))
    }

    pub fn into_result(self) -> Result<StateSnapshot, (String, Option<usize>)> {
        match self {
            Response::Ok(s) => Ok(*s),
            Response::Err { message, line } => Err((message, line)),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct WireResponse {
    ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    snapshot: Option<Box<StateSnapshot>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    line: Option<usize>,
}

impl From<Response> for WireResponse {
    fn from(r: Response) -> Self {
        match r {
            Response::Ok(s) => WireResponse { ok: true, snapshot: Some(s), error: None, line: None },
            Response::Err { message, line } => WireResponse { ok: false, snapshot: None, error: Some(message), line },
        }
    }
}

impl TryFrom<WireResponse> for Response {
    type Error = String;

    fn try_from(w: WireResponse) -> Result<Self, Self::Error> {
        match (w.ok, w.snapshot, w.error) {
            (true, Some(s), _) => Ok(Response::Ok(s)),
            (false, _, Some(message)) => Ok(Response::Err { message, line: w.line }),
            (true, None, _) => Err("ok response without snapshot".into()),
            (false, _, None) => Err("error response without message".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("no program loaded")]
    NoProgramLoaded,
    #[error(transparent)]
    Emulator(#[from] EmuError),
}

#[derive(Debug, Clone)]
struct Loaded {
    program: AssembledProgram,
    state: MachineState,
}

/// One debugging session. Commands are applied one at a time; a failed
/// command leaves the session untouched.
#[derive(Debug, Clone, Default)]
pub struct Session {
    config: KernelConfig,
    loaded: Option<Loaded>,
    breakpoints: Breakpoints,
    last_changed: Vec<Reg>,
}

impl Session {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_config(config: KernelConfig) -> Self {
        Self { config, ..Self::default() }
    }

    pub fn program(&self) -> Option<&AssembledProgram> {
        self.loaded.as_ref().map(|l| &l.program)
    }

    pub fn state(&self) -> Option<&MachineState> {
        self.loaded.as_ref().map(|l| &l.state)
    }

    pub fn breakpoints(&self) -> &Breakpoints {
        &self.breakpoints
    }

    pub fn snapshot(&self) -> Result<StateSnapshot, SessionError> {
        let l = self.loaded.as_ref().ok_or(SessionError::NoProgramLoaded)?;
        Ok(snapshot(&l.state, &l.program, &self.breakpoints, &self.last_changed))
    }

    fn loaded_mut(&mut self) -> Result<&mut Loaded, SessionError> {
        self.loaded.as_mut().ok_or(SessionError::NoProgramLoaded)
    }

    /// Assembles and installs a program. Breakpoints from a previous program
    /// are dropped.
    pub fn load(&mut self, source: &str) -> Result<(), AsmError> {
        let program = assemble(source, &self.config)?;
        let state = MachineState::setup(&program);
        self.loaded = Some(Loaded { program, state });
        self.breakpoints = Breakpoints::new();
        self.last_changed.clear();
        Ok(())
    }

    pub fn step(&mut self, count: u64) -> Result<(), SessionError> {
        let l = self.loaded_mut()?;
        let changes = l.state.step_n(&l.program, count)?;
        self.last_changed = changes.registers;
        Ok(())
    }

    pub fn run(&mut self, max_steps: u64) -> Result<(), SessionError> {
        let breakpoints = self.breakpoints.clone();
        let l = self.loaded_mut()?;
        let changes = l.state.run(&l.program, &breakpoints, max_steps)?;
        self.last_changed = changes.registers;
        Ok(())
    }

    pub fn set_break(&mut self, address: u32) -> Result<(), SessionError> {
        let l = self.loaded.as_ref().ok_or(SessionError::NoProgramLoaded)?;
        self.breakpoints.set(&l.program, address)?;
        Ok(())
    }

    pub fn clear_break(&mut self, address: u32) -> Result<(), SessionError> {
        let l = self.loaded.as_ref().ok_or(SessionError::NoProgramLoaded)?;
        self.breakpoints.clear(&l.program, address)?;
        Ok(())
    }

    /// Restarts the loaded program from its entry point, keeping breakpoints.
    pub fn reset(&mut self) -> Result<(), SessionError> {
        let l = self.loaded_mut()?;
        l.state = MachineState::setup(&l.program);
        self.last_changed.clear();
        Ok(())
    }

    pub fn handle_command(&mut self, command: Command) -> Response {
        let outcome = match command {
            Command::Load { source } => {
                if let Err(e) = self.load(&source) {
                    return load_error(&source, &self.config, e);
                }
                Ok(())
            }
            Command::Step { count } => self.step(count.unwrap_or(1)),
            Command::Run { max_steps } => self.run(max_steps.unwrap_or(DEFAULT_MAX_STEPS)),
            Command::SetBreak { address } => self.set_break(address),
            Command::ClearBreak { address } => self.clear_break(address),
            Command::Reset => self.reset(),
            Command::GetState => Ok(()),
        };
        match outcome.and_then(|_| self.snapshot()) {
            Ok(s) => Response::Ok(Box::new(s)),
            Err(e) => Response::err(e.to_string()),
        }
    }
}

/// Error response for a failed load. Line numbers refer to the user's file.
fn load_error(source: &str, config: &KernelConfig, err: AsmError) -> Response {
    match err {
        AsmError::AssemblyHasErrors(diags) => {
            let line = diags.first().map(|d| d.user_line.unwrap_or(d.line));
            let message = diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n");
            Response::Err { message, line }
        }
        AsmError::UndefinedLabel { ref name, line } => {
            located(source, config, line, format!("undefined label `{name}`"))
        }
        AsmError::BranchOutOfRange { line, offset } => {
            located(source, config, line, format!("branch target out of range (offset {offset})"))
        }
        other => Response::err(other.to_string()),
    }
}

fn located(source: &str, config: &KernelConfig, line: usize, message: String) -> Response {
    match wrap_with_kernel(source, config).user_line(line) {
        Some(l) => Response::Err { message: format!("line {l}: {message}"), line: Some(l) },
        None => Response::Err { message, line: None },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commands_use_documented_wire_names() {
        let cases = [
            (Command::Load { source: "nop".into() }, r#"{"cmd":"load","source":"nop"}"#),
            (Command::Step { count: Some(2) }, r#"{"cmd":"step","count":2}"#),
            (Command::Run { max_steps: None }, r#"{"cmd":"run"}"#),
            (Command::SetBreak { address: 8 }, r#"{"cmd":"set_break","address":8}"#),
            (Command::ClearBreak { address: 8 }, r#"{"cmd":"clear_break","address":8}"#),
            (Command::Reset, r#"{"cmd":"reset"}"#),
            (Command::GetState, r#"{"cmd":"get_state"}"#),
        ];
        for (cmd, json) in cases {
            assert_eq!(serde_json::to_string(&cmd).unwrap(), json);
            assert_eq!(serde_json::from_str::<Command>(json).unwrap(), cmd);
        }
    }

    #[test]
    fn error_response_shape() {
        let r = Response::Err { message: "bad".into(), line: Some(3) };
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"ok":false,"error":"bad","line":3}"#);
        let r = Response::err("x");
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"ok":false,"error":"x"}"#);
        assert!(serde_json::from_str::<Response>(r#"{"ok":true}"#).is_err());
    }

    #[test]
    fn commands_without_program_fail() {
        let mut s = Session::new();
        for cmd in [Command::GetState, Command::Step { count: None }, Command::Reset, Command::SetBreak { address: 0 }]
        {
            assert_eq!(s.handle_command(cmd), Response::err("no program loaded"));
        }
    }

    #[test]
    fn undefined_label_reports_user_line() {
        let mut s = Session::new();
        let r = s.handle_command(Command::Load { source: "nop\nj nowhere".into() });
        match r {
            Response::Err { line, message } => {
                assert_eq!(line, Some(2));
                assert!(message.contains("nowhere"));
            }
            _ => panic!("expected error"),
        }
        assert!(s.program().is_none());
    }
}
