//! Oracle backed by a long-running child process.
//!
//! Protocol: one input point per line on the child's stdin, coordinates
//! separated by spaces; the child answers with one line of response values.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use krigrisk::oracle::check_output;
use krigrisk::{Error, Oracle, Result};

pub struct CommandOracle {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    dim: usize,
    responses: usize,
    timeout: Duration,
    program: String,
}

impl CommandOracle {
    pub fn spawn(argv: &[String], dim: usize, responses: usize, timeout: Duration) -> Result<Self> {
        let (program, args) = argv
            .split_first()
            .ok_or_else(|| Error::InvalidInput("empty oracle command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Oracle(format!("cannot start {program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self {
            child,
            stdin,
            lines,
            dim,
            responses,
            timeout,
            program: program.clone(),
        })
    }

    fn fail(&self, msg: impl std::fmt::Display) -> Error {
        Error::Oracle(format!("{}: {msg}", self.program))
    }
}

pub fn format_point(x: &[f64]) -> String {
    x.iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(" ")
}

pub fn parse_response(line: &str) -> std::result::Result<Vec<f64>, String> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("not a number: {t:?}")))
        .collect()
}

impl Oracle for CommandOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn responses(&self) -> usize {
        self.responses
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        writeln!(self.stdin, "{}", format_point(x))
            .and_then(|_| self.stdin.flush())
            .map_err(|e| self.fail(format!("write failed: {e}")))?;
        let line = match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(self.fail(format!("read failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                let _ = self.child.kill();
                return Err(self.fail(format!("no answer within {:?}", self.timeout)));
            }
            Err(RecvTimeoutError::Disconnected) => return Err(self.fail("process exited")),
        };
        let y = parse_response(&line).map_err(|e| self.fail(e))?;
        check_output(&y, self.responses)?;
        Ok(y)
    }
}

impl Drop for CommandOracle {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sh(script: &str) -> Vec<String> {
        vec!["sh".into(), "-c".into(), script.into()]
    }

    #[test]
    fn parses_response_lines() {
        assert_eq!(parse_response(" 1.5  -2e-3\n").unwrap(), vec![1.5, -2e-3]);
        assert_eq!(parse_response("1,2").unwrap(), vec![1.0, 2.0]);
        assert!(parse_response("1 x").is_err());
    }

    #[test]
    fn point_format_round_trips() {
        let x = [0.1, -1e-300, 123456.789];
        let back = parse_response(&format_point(&x)).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn echoes_through_persistent_process() {
        // echoes each point back
        let cmd = sh("while read a b; do echo \"$a $b\"; done");
        let mut o = CommandOracle::spawn(&cmd, 2, 2, Duration::from_secs(5)).unwrap();
        assert_eq!(o.evaluate(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(o.evaluate(&[0.5, -3.0]).unwrap(), vec![0.5, -3.0]);
    }

    #[test]
    fn wrong_arity_is_an_oracle_error() {
        let cmd = sh("while read a; do echo 1 2; done");
        let mut o = CommandOracle::spawn(&cmd, 1, 1, Duration::from_secs(5)).unwrap();
        assert!(matches!(o.evaluate(&[0.0]), Err(Error::Oracle(_))));
    }

    #[test]
    fn timeout_and_exit_are_reported() {
        let mut o = CommandOracle::spawn(&sh("sleep 5"), 1, 1, Duration::from_millis(100)).unwrap();
        assert!(matches!(o.evaluate(&[0.0]), Err(Error::Oracle(_))));
        let mut o = CommandOracle::spawn(&sh("exit 0"), 1, 1, Duration::from_secs(5)).unwrap();
        assert!(matches!(o.evaluate(&[0.0]), Err(Error::Oracle(_))));
    }
}
