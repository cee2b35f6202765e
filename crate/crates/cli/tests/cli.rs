use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn emu() -> Command {
    Command::new(env!("CARGO_BIN_EXE_emu"))
}

fn program(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../programs").join(name)
}

fn text(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn source(contents: &str) -> tempfile::TempPath {
    let mut f = tempfile::Builder::new().suffix(".s").tempfile().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f.into_temp_path()
}

#[test]
fn version() {
    let o = emu().arg("--version").output().unwrap();
    assert!(o.status.success());
    assert_eq!(text(&o).trim(), format!("emu {}", env!("CARGO_PKG_VERSION")));
}

#[test]
fn run_prints_final_registers() {
    let o = emu().arg("run").arg(program("fib.s")).output().unwrap();
    assert!(o.status.success());
    let out = text(&o);
    assert!(out.starts_with("halt: exit"), "{out}");
    assert!(out.contains("x10 (a0) = 0x00000037"), "{out}");
}

#[test]
fn run_stops_at_label_and_address_breakpoints() {
    let o = emu().arg("run").arg(program("sum.s")).args(["--break", "loop"]).output().unwrap();
    assert!(text(&o).starts_with("halt: breakpoint  pc: 0x0000001c  steps: 7"), "{}", text(&o));
    let o = emu().arg("run").arg(program("sum.s")).args(["--break", "0x14", "--break", "0x1c"]).output().unwrap();
    assert!(text(&o).starts_with("halt: breakpoint  pc: 0x00000014"), "{}", text(&o));
    let o = emu().arg("run").arg(program("sum.s")).args(["--break", "nowhere"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nowhere"));
}

#[test]
fn run_respects_max_steps() {
    let src = source("spin: j spin");
    let o = emu().arg("run").arg(&src).args(["--max-steps", "50"]).output().unwrap();
    assert!(text(&o).starts_with("halt: step_limit  pc: 0x00000010  steps: 50"), "{}", text(&o));
}

#[test]
fn run_json_is_a_snapshot() {
    let o = emu().arg("run").arg(program("sum.s")).arg("--json").output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["registers"][10], 55);
    assert_eq!(v["halt"], "exit");
}

#[test]
fn run_reports_assembly_errors_with_lines() {
    let src = source("nop\naddi x1\nnop\nfoo");
    let o = emu().arg("run").arg(&src).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2:") && err.contains("line 4:"), "{err}");
}

#[test]
fn run_fault_exit_code_and_detail() {
    let src = source("lw a0, 2(gp)");
    let o = emu().arg("run").arg(&src).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).contains("misaligned 4-byte access at 0x10000002"), "{}", text(&o));
}

#[test]
fn repl_script_mode() {
    let script = format!(
        "load {}\nbreak loop\nrun\nregs dec\nunbreak loop\nrun\nregs hex\nmem 0x10000000 1\nbogus\n",
        program("sum.s").display()
    );
    let script_file = source(&script);
    let o = emu().arg("repl").arg("--script").arg(&script_file).output().unwrap();
    let out = text(&o);
    assert_eq!(o.status.code(), Some(1), "one failing command");
    assert!(out.contains("> break loop\nbreakpoint set at 0x0000001c (loop)"), "{out}");
    assert!(out.contains("x6 (t1) = 10 *"), "{out}");
    assert!(out.contains("x10 (a0) = 0x00000037 *"), "{out}");
    assert!(out.contains("unknown command `bogus`"), "{out}");
}

#[test]
fn repl_reads_stdin() {
    let mut child = emu().arg("repl").stdin(Stdio::piped()).stdout(Stdio::piped()).spawn().unwrap();
    let cmds = format!("load {}\nstep 4\nregs\nquit\nstep\n", program("sum.s").display());
    child.stdin.take().unwrap().write_all(cmds.as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    let out = text(&o);
    assert!(out.contains("x3 (gp) = 0x10000000 *"), "{out}");
    assert!(!out.contains("(emu)"));
}

#[test]
fn serve_stdio_speaks_ndjson() {
    let mut child = emu().args(["serve", "--stdio"]).stdin(Stdio::piped()).stdout(Stdio::piped()).spawn().unwrap();
    let input = "{\"cmd\":\"load\",\"source\":\"li a0, 9\"}\n{\"cmd\":\"run\"}\n{\"cmd\":\"nope\"}\n";
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    let lines: Vec<serde_json::Value> = text(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1]["snapshot"]["registers"][10], 9);
    assert_eq!(lines[2]["ok"], false);
}

struct Server(std::process::Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

#[test]
fn repl_and_run_against_http_server() {
    let mut child = emu().args(["serve", "--port", "0"]).stderr(Stdio::piped()).spawn().unwrap();
    let mut banner = String::new();
    BufReader::new(child.stderr.take().unwrap()).read_line(&mut banner).unwrap();
    let _server = Server(child);
    let url = banner.trim().strip_prefix("listening on ").expect(&banner).to_string();

    let o = emu().arg("run").arg(program("fib.s")).args(["--connect", &url]).output().unwrap();
    assert!(text(&o).contains("x10 (a0) = 0x00000037"), "{}", text(&o));

    // state persists on the server between client processes
    let load = source(&format!("load {}\nstep 3\n", program("sum.s").display()));
    emu().args(["repl", "--connect", &url, "--session", "shared", "--script"]).arg(&load).output().unwrap();
    let more = source("step 1\nregs\n");
    let o = emu().args(["repl", "--connect", &url, "--session", "shared", "--script"]).arg(&more).output().unwrap();
    let out = text(&o);
    assert!(out.contains("steps=4"), "{out}");
    // the fourth kernel instruction is `addi gp, gp, 0`: gp is set but unchanged by it
    assert!(out.contains("x3 (gp) = 0x10000000\n"), "{out}");
}

#[test]
fn connect_failure_is_reported() {
    let o = emu().args(["repl", "--connect", "http://127.0.0.1:9"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot reach"));
}
