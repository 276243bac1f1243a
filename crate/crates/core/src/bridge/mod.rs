//! Out-of-process plugins over a line-delimited JSON protocol.
//!
//! The host spawns the plugin and talks to it over its standard input and output, one JSON
//! object per LF-terminated line. The plugin's standard error is passed through.
//!
//! ```text
//! host   {"id":0,"method":"init","params":{"version":1,"role":"propagator","atoms":[{"id":1,"name":"a"}]}}
//! plugin {"id":0,"result":{"capabilities":["checkStableModel","getReasonsForCheckFailure"]}}
//! host   {"id":1,"method":"checkStableModel","params":{"atoms":[1]}}
//! plugin {"id":1,"result":{"stable":true}}
//! host   {"id":2,"method":"shutdown","params":{}}
//! plugin {"id":2,"result":{}}
//! ```
//!
//! Requests are strictly sequential and ids increase by one. A plugin reports failure with
//! `{"id":n,"error":{"code":int,"message":str}}`. Literals are signed atom ids.
//! See [`ScriptedPlugin`] for the payload of each method.

mod plugin;

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, ExitStatus, Stdio};
use std::rc::Rc;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::extension::Method;
use crate::program::AtomTable;

pub use plugin::ScriptedPlugin;

pub const PROTOCOL_VERSION: i64 = 1;

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("cannot start plugin `{command}`: {message}")]
    SpawnFailed { command: String, message: String },
    #[error("plugin did not answer init within {0:?}")]
    HandshakeTimeout(Duration),
    #[error("plugin speaks protocol version {found}, host speaks {expected}")]
    ProtocolVersionMismatch { expected: i64, found: i64 },
    #[error("handshake failed: {0}")]
    HandshakeError(String),
    #[error("protocol error: {message}; line: {line}")]
    ProtocolError { message: String, line: String },
    #[error("plugin exited during {method}: {status}")]
    PluginCrashed { method: String, status: String },
    #[error("plugin did not answer {method} within {timeout:?}")]
    ResponseTimeout { method: String, timeout: Duration },
    #[error("plugin failed {method} with code {code}: {message}")]
    Remote { method: String, code: i64, message: String },
    #[error("session is closed")]
    Closed,
}

impl BridgeError {
    fn protocol(message: impl Into<String>, line: &str) -> BridgeError {
        BridgeError::ProtocolError { message: message.into(), line: line.trim_end().to_owned() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Propagator,
    Heuristic,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Propagator => "propagator",
            Role::Heuristic => "heuristic",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BridgeConfig {
    pub handshake_timeout: Duration,
    pub response_timeout: Duration,
    pub shutdown_grace: Duration,
}

impl Default for BridgeConfig {
    fn default() -> BridgeConfig {
        BridgeConfig {
            handshake_timeout: Duration::from_secs(5),
            response_timeout: Duration::from_secs(30),
            shutdown_grace: Duration::from_secs(2),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Request,
    Response,
}

/// Shared record of every line exchanged with a plugin.
#[derive(Clone, Debug, Default)]
pub struct Transcript(Rc<RefCell<Vec<(Direction, String)>>>);

impl Transcript {
    pub fn new() -> Transcript {
        Transcript::default()
    }

    fn push(&self, dir: Direction, line: &str) {
        self.0.borrow_mut().push((dir, line.trim_end().to_owned()));
    }

    pub fn lines(&self) -> Vec<(Direction, String)> {
        self.0.borrow().clone()
    }

    pub fn requests(&self) -> Vec<String> {
        self.filter(Direction::Request)
    }

    pub fn responses(&self) -> Vec<String> {
        self.filter(Direction::Response)
    }

    fn filter(&self, dir: Direction) -> Vec<String> {
        self.0.borrow().iter().filter(|(d, _)| *d == dir).map(|(_, l)| l.clone()).collect()
    }
}

#[derive(Serialize)]
struct Request<'a, P: Serialize> {
    id: u64,
    method: &'a str,
    params: P,
}

#[derive(Serialize)]
struct InitParams<'a> {
    version: i64,
    role: &'a str,
    atoms: Vec<AtomEntry<'a>>,
}

#[derive(Serialize)]
struct AtomEntry<'a> {
    id: u32,
    name: &'a str,
}

/// A running plugin process with a completed handshake.
pub struct PluginSession {
    command: String,
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<String>,
    next_id: u64,
    capabilities: BTreeSet<Method>,
    response_timeout: Duration,
    shutdown_grace: Duration,
    transcript: Option<Transcript>,
    closed: bool,
    exit: Option<ExitStatus>,
}

impl PluginSession {
    /// Starts `command` (program and arguments) and performs the handshake.
    pub fn spawn(
        command: &[String],
        role: Role,
        atoms: &AtomTable,
        config: &BridgeConfig,
        transcript: Option<Transcript>,
    ) -> Result<PluginSession, BridgeError> {
        let mut session = PluginSession::start(command, config, transcript)?;
        let params = InitParams {
            version: PROTOCOL_VERSION,
            role: role.as_str(),
            atoms: atoms.iter().map(|(a, name)| AtomEntry { id: a.id(), name }).collect(),
        };
        session.next_id = 0;
        session.send("init", params)?;
        let reply = match session.receive(config.handshake_timeout) {
            Ok(reply) => reply,
            Err(Received::Timeout) => {
                session.kill();
                return Err(BridgeError::HandshakeTimeout(config.handshake_timeout));
            }
            Err(Received::Closed) => {
                let status = session.reap();
                return Err(BridgeError::HandshakeError(format!("plugin exited before init: {status}")));
            }
        };
        let result = match session.decode(0, "init", &reply) {
            Ok(result) => result,
            Err(e @ BridgeError::Remote { .. }) => {
                session.kill();
                return Err(BridgeError::HandshakeError(e.to_string()));
            }
            Err(e) => {
                session.kill();
                return Err(e);
            }
        };
        let checked = (|| {
            if let Some(v) = result.get("version") {
                let found = v.as_i64().ok_or_else(|| BridgeError::protocol("version is not an integer", &reply))?;
                if found != PROTOCOL_VERSION {
                    return Err(BridgeError::ProtocolVersionMismatch { expected: PROTOCOL_VERSION, found });
                }
            }
            let caps = result
                .get("capabilities")
                .and_then(Value::as_array)
                .ok_or_else(|| BridgeError::HandshakeError(format!("no capability list in {}", reply.trim_end())))?;
            let mut set = BTreeSet::new();
            for c in caps {
                let name = c
                    .as_str()
                    .ok_or_else(|| BridgeError::HandshakeError(format!("capability {c} is not a string")))?;
                if name == "shutdown" {
                    continue;
                }
                set.insert(name.parse::<Method>().map_err(|_| {
                    BridgeError::HandshakeError(format!("unknown capability `{name}`"))
                })?);
            }
            Ok(set)
        })();
        match checked {
            Ok(set) => session.capabilities = set,
            Err(e) => {
                session.kill();
                return Err(e);
            }
        }
        Ok(session)
    }

    fn start(
        command: &[String],
        config: &BridgeConfig,
        transcript: Option<Transcript>,
    ) -> Result<PluginSession, BridgeError> {
        let shown = command.join(" ");
        let (program, args) = command
            .split_first()
            .ok_or_else(|| BridgeError::SpawnFailed { command: shown.clone(), message: "empty command".into() })?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| BridgeError::SpawnFailed { command: shown.clone(), message: e.to_string() })?;
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            loop {
                let mut line = String::new();
                match reader.read_line(&mut line) {
                    Ok(0) | Err(_) => break,
                    Ok(_) => {
                        if tx.send(line).is_err() {
                            break;
                        }
                    }
                }
            }
        });
        Ok(PluginSession {
            command: shown,
            stdin: child.stdin.take(),
            child,
            lines: rx,
            next_id: 1,
            capabilities: BTreeSet::new(),
            response_timeout: config.response_timeout,
            shutdown_grace: config.shutdown_grace,
            transcript,
            closed: false,
            exit: None,
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn capabilities(&self) -> &BTreeSet<Method> {
        &self.capabilities
    }

    pub fn supports(&self, method: Method) -> bool {
        self.capabilities.contains(&method)
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// One synchronous round trip. Returns the `result` object.
    pub fn call(&mut self, method: &str, params: Value) -> Result<Value, BridgeError> {
        if self.closed {
            return Err(BridgeError::Closed);
        }
        let id = self.next_id;
        self.send(method, params)?;
        let line = match self.receive(self.response_timeout) {
            Ok(line) => line,
            Err(Received::Timeout) => {
                self.kill();
                return Err(BridgeError::ResponseTimeout { method: method.into(), timeout: self.response_timeout });
            }
            Err(Received::Closed) => {
                let status = self.reap();
                return Err(BridgeError::PluginCrashed { method: method.into(), status });
            }
        };
        self.decode(id, method, &line).inspect_err(|e| {
            if matches!(e, BridgeError::ProtocolError { .. }) {
                self.kill();
            }
        })
    }

    fn send(&mut self, method: &str, params: impl Serialize) -> Result<String, BridgeError> {
        let request = Request { id: self.next_id, method, params };
        self.next_id += 1;
        let line = serde_json::to_string(&request).expect("requests serialize");
        if let Some(t) = &self.transcript {
            t.push(Direction::Request, &line);
        }
        let stdin = self.stdin.as_mut().ok_or(BridgeError::Closed)?;
        let written = stdin.write_all(line.as_bytes()).and_then(|_| stdin.write_all(b"\n")).and_then(|_| stdin.flush());
        if written.is_err() {
            let status = self.reap();
            return Err(BridgeError::PluginCrashed { method: method.into(), status });
        }
        Ok(line)
    }

    fn receive(&mut self, timeout: Duration) -> Result<String, Received> {
        match self.lines.recv_timeout(timeout) {
            Ok(line) => {
                if let Some(t) = &self.transcript {
                    t.push(Direction::Response, &line);
                }
                Ok(line)
            }
            Err(RecvTimeoutError::Timeout) => Err(Received::Timeout),
            Err(RecvTimeoutError::Disconnected) => Err(Received::Closed),
        }
    }

    fn decode(&self, id: u64, method: &str, line: &str) -> Result<Value, BridgeError> {
        let value: Value =
            serde_json::from_str(line).map_err(|e| BridgeError::protocol(format!("invalid JSON ({e})"), line))?;
        let obj = value.as_object().ok_or_else(|| BridgeError::protocol("response is not an object", line))?;
        match obj.get("id").and_then(Value::as_u64) {
            Some(got) if got == id => {}
            Some(got) => return Err(BridgeError::protocol(format!("expected id {id}, got {got}"), line)),
            None => return Err(BridgeError::protocol("response without integer id", line)),
        }
        if let Some(err) = obj.get("error") {
            return Err(BridgeError::Remote {
                method: method.into(),
                code: err.get("code").and_then(Value::as_i64).unwrap_or(0),
                message: err.get("message").and_then(Value::as_str).unwrap_or("").to_owned(),
            });
        }
        obj.get("result").cloned().ok_or_else(|| BridgeError::protocol("response without result", line))
    }

    fn kill(&mut self) {
        self.closed = true;
        self.stdin = None;
        let _ = self.child.kill();
        self.exit = self.child.wait().ok();
    }

    fn reap(&mut self) -> String {
        self.closed = true;
        self.stdin = None;
        let deadline = Instant::now() + self.shutdown_grace;
        loop {
            match self.child.try_wait() {
                Ok(Some(status)) => {
                    self.exit = Some(status);
                    return status.to_string();
                }
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(5)),
                _ => {
                    self.kill();
                    return "killed".into();
                }
            }
        }
    }

    /// Sends `shutdown` and waits for the process to exit, killing it after the grace period.
    /// Safe to call more than once. Returns the exit status if the process was reaped.
    pub fn shutdown(&mut self) -> Option<ExitStatus> {
        if !self.closed {
            if self.send("shutdown", json!({})).is_ok() {
                let _ = self.receive(self.shutdown_grace);
            }
            self.reap();
        }
        self.exit
    }

    /// Sends raw request lines to a fresh plugin process and collects one raw response line
    /// per request.
    pub fn replay(command: &[String], requests: &[String], config: &BridgeConfig) -> Result<Vec<String>, BridgeError> {
        let mut session = PluginSession::start(command, config, None)?;
        let mut out = Vec::with_capacity(requests.len());
        for request in requests {
            let stdin = session.stdin.as_mut().ok_or(BridgeError::Closed)?;
            let method = serde_json::from_str::<Value>(request)
                .ok()
                .and_then(|v| v.get("method").and_then(Value::as_str).map(str::to_owned))
                .unwrap_or_default();
            if writeln!(stdin, "{request}").and_then(|_| stdin.flush()).is_err() {
                let status = session.reap();
                return Err(BridgeError::PluginCrashed { method, status });
            }
            match session.receive(config.response_timeout) {
                Ok(line) => out.push(line.trim_end().to_owned()),
                Err(Received::Timeout) => {
                    session.kill();
                    return Err(BridgeError::ResponseTimeout { method, timeout: config.response_timeout });
                }
                Err(Received::Closed) => {
                    let status = session.reap();
                    return Err(BridgeError::PluginCrashed { method, status });
                }
            }
        }
        session.reap();
        Ok(out)
    }
}

enum Received {
    Timeout,
    Closed,
}

impl Drop for PluginSession {
    fn drop(&mut self) {
        self.shutdown();
    }
}
