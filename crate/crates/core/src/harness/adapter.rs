use std::io::{BufRead, BufReader, Write};
use std::process::{Child, Command, ExitStatus, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use super::protocol::{parse_handshake, parse_response, Handshake, ProtocolError, Response};

#[derive(Debug, thiserror::Error)]
pub enum AdapterError {
    #[error("cannot start adapter: {0}")]
    Spawn(#[source] std::io::Error),
    #[error("adapter closed its output before the handshake")]
    NoHandshake,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("adapter announced parser `{found}`, expected `{expected}`")]
    WrongParser { expected: String, found: String },
    #[error("adapter timed out after {0:?}")]
    Timeout(Duration),
    #[error("adapter answered {got} lines for {expected} inputs")]
    LineCount { expected: usize, got: usize },
    #[error("adapter exited with {0}")]
    Exit(ExitStatus),
}

/// Handshake plus one response per input line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdapterSession {
    pub handshake: Handshake,
    pub responses: Vec<Response>,
}

fn kill(child: &mut Child) {
    let _ = child.kill();
    let _ = child.wait();
}

/// Runs `command` through `sh -c`, feeds it `lines` and collects the
/// session. The whole exchange must finish within `timeout`.
pub fn run_adapter(
    command: &str,
    lines: &[&str],
    timeout: Duration,
) -> Result<AdapterSession, AdapterError> {
    let deadline = Instant::now() + timeout;
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(AdapterError::Spawn)?;

    let mut stdin = child.stdin.take().expect("stdin is piped");
    let input: String = lines.iter().flat_map(|l| [*l, "\n"]).collect();
    let writer = thread::spawn(move || {
        // a failed write surfaces as a line-count mismatch
        let _ = stdin.write_all(input.as_bytes());
    });

    let stdout = child.stdout.take().expect("stdout is piped");
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            let Ok(line) = line else { break };
            if tx.send(line).is_err() {
                break;
            }
        }
    });

    let mut received = Vec::with_capacity(lines.len() + 1);
    loop {
        let left = deadline.saturating_duration_since(Instant::now());
        match rx.recv_timeout(left) {
            Ok(line) => received.push(line),
            Err(mpsc::RecvTimeoutError::Disconnected) => break,
            Err(mpsc::RecvTimeoutError::Timeout) => {
                kill(&mut child);
                return Err(AdapterError::Timeout(timeout));
            }
        }
    }
    let status = loop {
        if let Some(status) = child.try_wait().map_err(AdapterError::Spawn)? {
            break status;
        }
        if Instant::now() >= deadline {
            kill(&mut child);
            return Err(AdapterError::Timeout(timeout));
        }
        thread::sleep(Duration::from_millis(1));
    };
    let _ = writer.join();

    let mut received = received.into_iter();
    let handshake = parse_handshake(&received.next().ok_or(AdapterError::NoHandshake)?)?;
    let responses = received
        .map(|l| parse_response(&l))
        .collect::<Result<Vec<_>, _>>()?;
    if responses.len() != lines.len() {
        return Err(AdapterError::LineCount {
            expected: lines.len(),
            got: responses.len(),
        });
    }
    if !status.success() {
        return Err(AdapterError::Exit(status));
    }
    Ok(AdapterSession {
        handshake,
        responses,
    })
}

/// Starts the adapter with no input to learn its parser id and version.
pub fn probe(command: &str, timeout: Duration) -> Result<Handshake, AdapterError> {
    run_adapter(command, &[], timeout).map(|s| s.handshake)
}
