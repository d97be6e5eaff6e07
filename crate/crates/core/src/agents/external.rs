use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use super::protocol::{parse_response, Request};
use super::{Agent, AgentError};
use crate::engine::{Action, Observation};

struct Session {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

impl Session {
    fn spawn(command: &[String]) -> Result<Session, AgentError> {
        let (program, args) = command.split_first().ok_or_else(|| AgentError::Process("empty command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| AgentError::Process(format!("spawn {program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Session { child, stdin, lines })
    }

    fn kill(mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// A child process answering one request line with one response line.
/// The process is started on first use and kept for later decisions; it
/// is killed when it misses a deadline.
pub struct ExternalAgent {
    name: String,
    command: Vec<String>,
    timeout_ms: u64,
    match_id: String,
    session: Option<Session>,
}

impl ExternalAgent {
    pub fn new(name: impl Into<String>, command: Vec<String>, timeout_ms: u64) -> ExternalAgent {
        ExternalAgent { name: name.into(), command, timeout_ms, match_id: String::new(), session: None }
    }

    fn roundtrip(&mut self, line: &str) -> Result<String, AgentError> {
        if self.session.is_none() {
            self.session = Some(Session::spawn(&self.command)?);
        }
        let session = self.session.as_mut().expect("spawned");
        let sent = writeln!(session.stdin, "{line}").and_then(|_| session.stdin.flush());
        if let Err(e) = sent {
            self.session.take().map(Session::kill);
            return Err(AgentError::Process(format!("write: {e}")));
        }
        match session.lines.recv_timeout(Duration::from_millis(self.timeout_ms)) {
            Ok(reply) => Ok(reply),
            Err(RecvTimeoutError::Timeout) => {
                self.session.take().map(Session::kill);
                Err(AgentError::Timeout(self.timeout_ms))
            }
            Err(RecvTimeoutError::Disconnected) => {
                self.session.take().map(Session::kill);
                Err(AgentError::Process("process closed its output".into()))
            }
        }
    }
}

impl Agent for ExternalAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn begin_match(&mut self, match_id: &str, _seat: usize) {
        self.match_id = match_id.to_string();
    }

    fn act(&mut self, obs: &Observation) -> Result<Action, AgentError> {
        let request = Request::new(self.match_id.clone(), obs.clone());
        let reply = self.roundtrip(&request.to_line())?;
        parse_response(&reply, &obs.legal_actions)
    }

    fn wants_history(&self) -> bool {
        true
    }
}

impl Drop for ExternalAgent {
    fn drop(&mut self) {
        if let Some(s) = self.session.take() {
            s.kill();
        }
    }
}
