use std::net::SocketAddr;

use workbench_client::{Client, ClientError};
use workbench_core::session::{cli_repl, Backend, Command, ReplOptions, Response, Session};
use workbench_server::{bind, serve_http, AppState};

fn start() -> Client {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        tokio::runtime::Runtime::new().unwrap().block_on(async move {
            let listener = bind(SocketAddr::from(([127, 0, 0, 1], 0))).await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            serve_http(listener, AppState::default()).await.unwrap();
        });
    });
    Client::new(&format!("http://{}/", rx.recv().unwrap())).unwrap()
}

const PROGRAM: &str = "\
.data
v: .word 5
.text
main:
    la t0, v
    lw a0, 0(t0)
    slli a0, a0, 3
    sw a0, 4(t0)
";

#[test]
fn remote_matches_local() {
    let client = start();
    client.health().unwrap();
    let mut remote = client.session("twin");
    let mut local = Session::new();
    let script = [
        Command::Load { source: PROGRAM.into() },
        Command::Step { count: Some(5) },
        Command::SetBreak { address: 28 },
        Command::Run { max_steps: None },
        Command::GetState,
        Command::ClearBreak { address: 28 },
        Command::Run { max_steps: None },
        Command::Step { count: None },
        Command::Reset,
    ];
    for cmd in script {
        let r = remote.send(cmd.clone());
        assert_eq!(r, local.handle_command(cmd.clone()), "{cmd:?}");
    }
}

#[test]
fn repl_over_http() {
    let client = start();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.s");
    std::fs::write(&path, PROGRAM).unwrap();
    let script = format!("load {}\nbreak main\nrun\nrun\nmem 0x10000000 2\n", path.display());
    let mut out = Vec::new();
    let failures = cli_repl(&mut client.session("r"), script.as_bytes(), &mut out, &ReplOptions::default()).unwrap();
    let out = String::from_utf8(out).unwrap();
    assert_eq!(failures, 0, "{out}");
    assert!(out.contains("[breakpoint] pc=0x00000010"), "{out}");
    assert!(out.contains("0x10000004: 0x00000028"), "{out}");
}

#[test]
fn delete_and_unreachable() {
    let client = start();
    assert!(!client.delete_session("nope").unwrap());
    client.session("x").send(Command::GetState);
    assert!(client.delete_session("x").unwrap());

    let dead = Client::new("http://127.0.0.1:9").unwrap();
    assert!(matches!(dead.health(), Err(ClientError::Http(_))));
    match dead.session("s").send(Command::GetState) {
        Response::Err { message, .. } => assert!(message.starts_with("request failed")),
        r => panic!("{r:?}"),
    }
}
