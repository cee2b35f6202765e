use std::io::{self, BufRead, Write};

use super::{Command, Response, Session};

/// Anything that answers commands: an in-process session or a remote one.
pub trait Backend {
    fn send(&mut self, command: Command) -> Response;
}

impl Backend for Session {
    fn send(&mut self, command: Command) -> Response {
        self.handle_command(command)
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn send(&mut self, command: Command) -> Response {
        (**self).send(command)
    }
}

/// Newline-delimited JSON loop: one command per input line, one response per
/// output line. Blank lines are skipped; unparseable lines get an error
/// response.
pub fn serve_lines<B: Backend, R: BufRead, W: Write>(backend: &mut B, input: R, mut output: W) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = match serde_json::from_str::<Command>(&line) {
            Ok(cmd) => backend.send(cmd),
            Err(e) => Response::err(format!("invalid command: {e}")),
        };
        serde_json::to_writer(&mut output, &response)?;
        output.write_all(b"\n")?;
        output.flush()?;
    }
    Ok(())
}
