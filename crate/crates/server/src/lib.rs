//! Session host. Each session id maps to one `Session`; commands for a session
//! are applied one at a time, different sessions run in parallel.

use std::collections::HashMap;
use std::io;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use tokio::net::TcpListener;
use workbench_core::session::{serve_lines, Command, Response, Session};

type Shared = Arc<Mutex<Session>>;

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<String, Shared>>>,
}

impl AppState {
    fn session(&self, id: &str) -> Shared {
        let mut map = self.sessions.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(id.to_string()).or_default().clone()
    }

    fn remove(&self, id: &str) -> bool {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner()).remove(id).is_some()
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner()).len()
    }
}

/// Routes:
/// - `GET /health`
/// - `POST /session/{id}/command` with a JSON command body; the session is created on first use
/// - `DELETE /session/{id}`
pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/session/{id}/command", post(command))
        .route("/session/{id}", delete(remove))
        .with_state(state)
}

async fn command(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> impl IntoResponse {
    let cmd: Command = match serde_json::from_slice(&body) {
        Ok(c) => c,
        Err(e) => return (StatusCode::BAD_REQUEST, Json(Response::err(format!("invalid command: {e}")))),
    };
    let session = state.session(&id);
    // `run` may execute up to a million instructions; keep it off the async workers.
    let result = tokio::task::spawn_blocking(move || {
        let mut s = session.lock().unwrap_or_else(|e| e.into_inner());
        s.handle_command(cmd)
    })
    .await;
    match result {
        Ok(r) => (StatusCode::OK, Json(r)),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, Json(Response::err(e.to_string()))),
    }
}

async fn remove(State(state): State<AppState>, Path(id): Path<String>) -> StatusCode {
    if state.remove(&id) {
        StatusCode::NO_CONTENT
    } else {
        StatusCode::NOT_FOUND
    }
}

pub async fn serve_http(listener: TcpListener, state: AppState) -> io::Result<()> {
    axum::serve(listener, router(state)).await
}

pub async fn bind(addr: SocketAddr) -> io::Result<TcpListener> {
    TcpListener::bind(addr).await
}

/// NDJSON on stdin/stdout against a single session.
pub fn serve_stdio() -> io::Result<()> {
    let stdin = io::stdin();
    let stdout = io::stdout();
    serve_lines(&mut Session::new(), stdin.lock(), stdout.lock())
}
