use std::time::Duration;

use reqwest::blocking;
use thiserror::Error;
use workbench_core::session::{Backend, Command, Response};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),
    #[error("server returned {status}: {body}")]
    Status { status: u16, body: String },
}

/// Talks to a server started with `emu serve`.
#[derive(Debug, Clone)]
pub struct Client {
    http: blocking::Client,
    base: String,
}

impl Client {
    /// `base` is the server root, e.g. `http://127.0.0.1:7878`.
    pub fn new(base: &str) -> Result<Self, ClientError> {
        let http = blocking::Client::builder().timeout(Duration::from_secs(300)).build()?;
        Ok(Self { http, base: base.trim_end_matches('/').to_string() })
    }

    pub fn health(&self) -> Result<(), ClientError> {
        let r = self.http.get(format!("{}/health", self.base)).send()?;
        check(r).map(|_| ())
    }

    /// Sends one command. Protocol-level failures come back as `Response::Err`.
    pub fn command(&self, session: &str, cmd: &Command) -> Result<Response, ClientError> {
        let r = self.http.post(format!("{}/session/{session}/command", self.base)).json(cmd).send()?;
        if r.status().is_success() || r.status().as_u16() == 400 {
            Ok(r.json()?)
        } else {
            Err(status_error(r))
        }
    }

    pub fn delete_session(&self, session: &str) -> Result<bool, ClientError> {
        let r = self.http.delete(format!("{}/session/{session}", self.base)).send()?;
        match r.status().as_u16() {
            404 => Ok(false),
            _ => check(r).map(|_| true),
        }
    }

    pub fn session(&self, id: impl Into<String>) -> RemoteSession {
        RemoteSession { client: self.clone(), id: id.into() }
    }
}

fn check(r: blocking::Response) -> Result<blocking::Response, ClientError> {
    if r.status().is_success() {
        Ok(r)
    } else {
        Err(status_error(r))
    }
}

fn status_error(r: blocking::Response) -> ClientError {
    let status = r.status().as_u16();
    ClientError::Status { status, body: r.text().unwrap_or_default() }
}

/// One server-side session, usable wherever a local `Session` is.
#[derive(Debug, Clone)]
pub struct RemoteSession {
    client: Client,
    id: String,
}

impl RemoteSession {
    pub fn id(&self) -> &str {
        &self.id
    }
}

impl Backend for RemoteSession {
    fn send(&mut self, command: Command) -> Response {
        self.client.command(&self.id, &command).unwrap_or_else(|e| Response::err(e.to_string()))
    }
}
