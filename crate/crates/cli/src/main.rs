use std::io::{self, IsTerminal, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use workbench_client::Client;
use workbench_core::assembler::parse_number;
use workbench_core::emulator::{HaltStatus, DEFAULT_MAX_STEPS};
use workbench_core::session::{
    cli_repl, render_registers, Backend, Command, Radix, ReplOptions, Response, Session, StateSnapshot,
};

#[derive(Parser)]
#[command(name = "emu", version, about = "RV32IM assembler and debugger for teaching")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Interactive debugger; reads commands from stdin or a script.
    Repl {
        /// Replay commands from a file instead of stdin.
        #[arg(long)]
        script: Option<PathBuf>,
        #[command(flatten)]
        remote: Remote,
    },
    /// Assemble and run a program, then print the final state.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: u64,
        /// Breakpoint address or label; repeatable.
        #[arg(long = "break", value_name = "ADDR")]
        breaks: Vec<String>,
        /// Print the final snapshot as JSON.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        remote: Remote,
    },
    /// Serve sessions over HTTP, or NDJSON on stdin/stdout with --stdio.
    Serve {
        #[arg(long, default_value_t = 7878)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        #[arg(long, conflicts_with_all = ["port", "host"])]
        stdio: bool,
    },
}

#[derive(Args)]
struct Remote {
    /// Use a running `emu serve` instead of an in-process session.
    #[arg(long, value_name = "URL")]
    connect: Option<String>,
    /// Session id on the server.
    #[arg(long, default_value = "default", requires = "connect")]
    session: String,
}

impl Remote {
    fn backend(&self) -> Result<Box<dyn Backend>> {
        Ok(match &self.connect {
            Some(url) => {
                let client = Client::new(url)?;
                client.health().with_context(|| format!("cannot reach {url}"))?;
                Box::new(client.session(self.session.clone()))
            }
            None => Box::new(Session::new()),
        })
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Cmd::Repl { script, remote } => repl(script, &remote),
        Cmd::Run { file, max_steps, breaks, json, remote } => run(&file, max_steps, &breaks, json, &remote),
        Cmd::Serve { stdio: true, .. } => {
            workbench_server::serve_stdio()?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Serve { port, host, .. } => serve(SocketAddr::new(host, port)),
    }
}

fn repl(script: Option<PathBuf>, remote: &Remote) -> Result<ExitCode> {
    let mut backend = remote.backend()?;
    let stdout = io::stdout();
    let result = match script {
        Some(path) => {
            let file = std::fs::File::open(&path).with_context(|| format!("cannot open {}", path.display()))?;
            let opts = ReplOptions { interactive: false, echo: true };
            cli_repl(&mut backend, io::BufReader::new(file), stdout.lock(), &opts)
        }
        None => {
            let stdin = io::stdin();
            let opts = ReplOptions { interactive: stdin.is_terminal(), echo: false };
            cli_repl(&mut backend, stdin.lock(), stdout.lock(), &opts)
        }
    };
    let failures = match result {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => 0,
        other => other?,
    };
    Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn expect(r: Response) -> Result<StateSnapshot> {
    match r {
        Response::Ok(s) => Ok(*s),
        Response::Err { message, .. } => bail!("{message}"),
    }
}

fn resolve(snapshot: &StateSnapshot, target: &str) -> Result<u32> {
    parse_number(target)
        .and_then(|n| u32::try_from(n).ok())
        .or_else(|| snapshot.label_address(target))
        .with_context(|| format!("unknown breakpoint address or label `{target}`"))
}

fn run(file: &PathBuf, max_steps: u64, breaks: &[String], json: bool, remote: &Remote) -> Result<ExitCode> {
    let source = std::fs::read_to_string(file).with_context(|| format!("cannot read {}", file.display()))?;
    let mut backend = remote.backend()?;
    let loaded = expect(backend.send(Command::Load { source }))
        .with_context(|| format!("{} failed to assemble", file.display()))?;
    for b in breaks {
        let address = resolve(&loaded, b)?;
        expect(backend.send(Command::SetBreak { address }))?;
    }
    let snap = expect(backend.send(Command::Run { max_steps: Some(max_steps) }))?;
    let mut out = String::new();
    if json {
        out = serde_json::to_string_pretty(&snap)? + "\n";
    } else {
        out.push_str(&format!("halt: {}  pc: 0x{:08x}  steps: {}\n", snap.halt, snap.pc, snap.step_count));
        if snap.halt == HaltStatus::Fault {
            // the fault detail travels in the error of the next command
            if let Response::Err { message, .. } = backend.send(Command::Step { count: None }) {
                out.push_str(&format!("{message}\n"));
            }
        }
        out.push_str(&render_registers(&snap, Radix::Hex));
    }
    emit(&out)?;
    Ok(match snap.halt {
        HaltStatus::Fault => ExitCode::from(2),
        _ => ExitCode::SUCCESS,
    })
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> io::Result<()> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => other,
    }
}

fn serve(addr: SocketAddr) -> Result<ExitCode> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = workbench_server::bind(addr).await.with_context(|| format!("cannot bind {addr}"))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        workbench_server::serve_http(listener, Default::default()).await?;
        Ok(ExitCode::SUCCESS)
    })
}
