//! Client side of the line-delimited JSON predictor protocol.
//!
//! ```text
//! -> {"id":0,"op":"hello"}
//! <- {"id":0,"classes":C}
//! -> {"id":n,"op":"predict","series":[[...],...]}
//! <- {"id":n,"probs":[[...],...]}    or    {"id":n,"error":"..."}
//! ```

use std::io::{BufRead, BufReader, Read, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use super::{ProbMatrix, Predictor};
use crate::error::{Error, Result};
use crate::io::TimeSeries;

pub const DEFAULT_BATCH_CAP: usize = 256;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

/// Bytes of child stderr kept for diagnostics.
const STDERR_KEEP: usize = 4096;

struct Session {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
    broken: Option<String>,
}

/// A child process answering prediction requests over stdin/stdout.
///
/// One request is in flight at a time; concurrent callers are serialised.
pub struct ExternalPredictor {
    session: Mutex<Session>,
    stderr: Arc<Mutex<String>>,
    classes: usize,
    batch_cap: usize,
    timeout: Duration,
    command: String,
}

#[derive(Serialize)]
struct PredictRequest<'a> {
    id: u64,
    op: &'static str,
    series: Vec<&'a [f64]>,
}

impl ExternalPredictor {
    /// Spawns `program args...` and performs the hello handshake.
    pub fn spawn<S: AsRef<str>>(program: &str, args: &[S]) -> Result<Self> {
        Self::spawn_with(program, args, DEFAULT_TIMEOUT)
    }

    pub fn spawn_with<S: AsRef<str>>(program: &str, args: &[S], timeout: Duration) -> Result<Self> {
        let command = std::iter::once(program)
            .chain(args.iter().map(AsRef::as_ref))
            .collect::<Vec<_>>()
            .join(" ");
        let mut child = Command::new(program)
            .args(args.iter().map(AsRef::as_ref))
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Transport(format!("cannot start {command:?}: {e}")))?;

        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });

        let stderr = Arc::new(Mutex::new(String::new()));
        let mut child_err = child.stderr.take().expect("stderr is piped");
        let sink = Arc::clone(&stderr);
        thread::spawn(move || {
            let mut buf = [0u8; 1024];
            while let Ok(n) = child_err.read(&mut buf) {
                if n == 0 {
                    break;
                }
                let mut s = sink.lock().unwrap();
                s.push_str(&String::from_utf8_lossy(&buf[..n]));
                if s.len() > STDERR_KEEP {
                    let cut = s.len() - STDERR_KEEP;
                    let cut = (cut..s.len()).find(|&i| s.is_char_boundary(i)).unwrap_or(s.len());
                    s.drain(..cut);
                }
            }
        });

        let stdin = child.stdin.take();
        let mut session = Session {
            child,
            stdin,
            lines: rx,
            next_id: 1,
            broken: None,
        };
        let reply = exchange(&mut session, 0, r#"{"id":0,"op":"hello"}"#, timeout, &stderr)?;
        let classes = reply
            .get("classes")
            .and_then(Value::as_u64)
            .filter(|&c| c >= 1)
            .ok_or_else(|| Error::Protocol(format!("hello reply lacks a positive class count: {reply}")))?
            as usize;
        Ok(ExternalPredictor {
            session: Mutex::new(session),
            stderr,
            classes,
            batch_cap: DEFAULT_BATCH_CAP,
            timeout,
            command,
        })
    }

    /// Splits `line` on whitespace and spawns it.
    pub fn from_command_line(line: &str) -> Result<Self> {
        let mut parts = line.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| Error::Config("empty external predictor command".into()))?;
        let args: Vec<&str> = parts.collect();
        Self::spawn(program, &args)
    }

    pub fn with_batch_cap(mut self, cap: usize) -> Self {
        self.batch_cap = cap.max(1);
        self
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    /// Most recent stderr output of the child.
    pub fn diagnostics(&self) -> String {
        self.stderr.lock().unwrap().clone()
    }

    fn predict_chunk(&self, session: &mut Session, chunk: &[TimeSeries], offset: usize) -> Result<Vec<Vec<f64>>> {
        let id = session.next_id;
        session.next_id += 1;
        let request = PredictRequest {
            id,
            op: "predict",
            series: chunk.iter().map(|s| s.values()).collect(),
        };
        let line = serde_json::to_string(&request)?;
        let reply = exchange(session, id, &line, self.timeout, &self.stderr)?;
        let probs = reply
            .get("probs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Protocol(format!("reply {id} has neither probs nor error")))?;
        if probs.len() != chunk.len() {
            return Err(Error::Protocol(format!(
                "reply {id} has {} rows for {} series",
                probs.len(),
                chunk.len()
            )));
        }
        probs
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let row = row
                    .as_array()
                    .ok_or_else(|| Error::Protocol(format!("row {} is not an array", offset + r)))?;
                let values = row
                    .iter()
                    .map(|v| v.as_f64())
                    .collect::<Option<Vec<f64>>>()
                    .ok_or_else(|| Error::Protocol(format!("row {} has a non-numeric entry", offset + r)))?;
                if values.len() != self.classes {
                    return Err(Error::Protocol(format!(
                        "row {} has {} entries, expected {}",
                        offset + r,
                        values.len(),
                        self.classes
                    )));
                }
                ProbMatrix::new(vec![values.clone()], self.classes)
                    .map_err(|e| Error::Protocol(e.to_string().replace("row 0", &format!("row {}", offset + r))))?;
                Ok(values)
            })
            .collect()
    }
}

/// Sends one request line and waits for the reply with the same id.
fn exchange(
    session: &mut Session,
    id: u64,
    line: &str,
    timeout: Duration,
    stderr: &Mutex<String>,
) -> Result<Value> {
    if let Some(why) = &session.broken {
        return Err(Error::Transport(format!("predictor session unusable: {why}")));
    }
    let result = exchange_inner(session, id, line, timeout, stderr);
    if let Err(e) = &result {
        session.broken = Some(e.to_string());
    }
    result
}

fn exchange_inner(
    session: &mut Session,
    id: u64,
    line: &str,
    timeout: Duration,
    stderr: &Mutex<String>,
) -> Result<Value> {
    let diag = || {
        let s = stderr.lock().unwrap();
        if s.trim().is_empty() {
            String::new()
        } else {
            format!(" (stderr: {})", s.trim())
        }
    };
    let stdin = session
        .stdin
        .as_mut()
        .ok_or_else(|| Error::Transport("stdin closed".into()))?;
    writeln!(stdin, "{line}")
        .and_then(|_| stdin.flush())
        .map_err(|e| Error::Transport(format!("write failed: {e}{}", diag())))?;
    let reply = match session.lines.recv_timeout(timeout) {
        Ok(Ok(reply)) => reply,
        Ok(Err(e)) => return Err(Error::Transport(format!("read failed: {e}{}", diag()))),
        Err(RecvTimeoutError::Timeout) => {
            return Err(Error::Protocol(format!(
                "no reply to request {id} within {timeout:?}{}",
                diag()
            )))
        }
        Err(RecvTimeoutError::Disconnected) => {
            // Give the stderr reader a moment to drain before reporting.
            let status = session.child.wait().ok();
            thread::sleep(Duration::from_millis(20));
            return Err(Error::Transport(format!(
                "predictor exited ({}){}",
                status.map_or("unknown status".into(), |s| s.to_string()),
                diag()
            )));
        }
    };
    let value: Value = serde_json::from_str(&reply)
        .map_err(|e| Error::Protocol(format!("malformed reply to request {id}: {e}: {reply:?}")))?;
    let got = value.get("id").and_then(Value::as_u64);
    if got != Some(id) {
        return Err(Error::Protocol(format!(
            "reply id {got:?} does not match request {id}"
        )));
    }
    if let Some(msg) = value.get("error") {
        let msg = msg.as_str().map_or_else(|| msg.to_string(), str::to_owned);
        return Err(Error::Protocol(format!("predictor error on request {id}: {msg}")));
    }
    Ok(value)
}

impl std::fmt::Debug for ExternalPredictor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalPredictor")
            .field("command", &self.command)
            .field("classes", &self.classes)
            .field("batch_cap", &self.batch_cap)
            .finish_non_exhaustive()
    }
}

impl Predictor for ExternalPredictor {
    fn class_count(&self) -> usize {
        self.classes
    }

    fn predict_proba(&self, batch: &[TimeSeries]) -> Result<ProbMatrix> {
        if let Some(s) = batch.iter().find(|s| s.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidSeries(format!("non-finite value in {:?}", &s[..s.len().min(4)])));
        }
        let mut session = self.session.lock().unwrap();
        let mut rows = Vec::with_capacity(batch.len());
        for (c, chunk) in batch.chunks(self.batch_cap).enumerate() {
            rows.extend(self.predict_chunk(&mut session, chunk, c * self.batch_cap)?);
        }
        ProbMatrix::new(rows, self.classes)
    }
}

impl Drop for ExternalPredictor {
    fn drop(&mut self) {
        if let Ok(session) = self.session.get_mut() {
            // Closing stdin asks the child to finish.
            session.stdin.take();
            for _ in 0..50 {
                if let Ok(Some(_)) = session.child.try_wait() {
                    return;
                }
                thread::sleep(Duration::from_millis(10));
            }
            let _ = session.child.kill();
            let _ = session.child.wait();
        }
    }
}
