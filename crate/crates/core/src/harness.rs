//! Runs candidate programs against stdin/stdout test cases.
//!
//! Each test runs in its own process group inside a fresh temporary
//! directory; the whole group is killed once the test finishes, so a
//! candidate that forks cannot leave processes behind.

use std::io::{Read, Write};
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, ExitStatus, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::corpus::TestCase;
use crate::source;

const CANDIDATE_FILE: &str = "candidate.py";
const STDERR_KEEP: usize = 4096;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("interpreter `{0}` not found or not executable")]
    InterpreterMissing(String),
    #[error("io error while executing candidate: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecLimits {
    pub wall_timeout_s: f64,
    pub max_output_bytes: usize,
    /// Parent directory for per-execution scratch directories.
    pub temp_root: Option<PathBuf>,
}

impl Default for ExecLimits {
    fn default() -> Self {
        Self {
            wall_timeout_s: 10.0,
            max_output_bytes: 1 << 20,
            temp_root: None,
        }
    }
}

impl ExecLimits {
    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.wall_timeout_s.max(0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestStatus {
    Pass,
    WrongOutput,
    RuntimeError,
    Timeout,
    ParseError,
}

impl TestStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TestStatus::Pass => "pass",
            TestStatus::WrongOutput => "wrong-output",
            TestStatus::RuntimeError => "runtime-error",
            TestStatus::Timeout => "timeout",
            TestStatus::ParseError => "parse-error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub test_id: String,
    pub status: TestStatus,
    pub actual_output: String,
    pub stderr_tail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<u64>,
}

/// Line endings unified, each line right-trimmed, trailing blank lines dropped.
pub fn normalize_output(text: &str) -> String {
    let unified = text.replace("\r\n", "\n").replace('\r', "\n");
    let mut lines: Vec<&str> = unified.split('\n').map(str::trim_end).collect();
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines.join("\n")
}

/// Exact comparison after [`normalize_output`]; no numeric tolerance.
pub fn outcome_pass(expected: &str, actual: &str) -> bool {
    normalize_output(expected) == normalize_output(actual)
}

/// True iff every outcome passed (and there is at least one).
pub fn all_passed(outcomes: &[TestOutcome]) -> bool {
    !outcomes.is_empty() && outcomes.iter().all(|o| o.status == TestStatus::Pass)
}

/// Executes candidates with a fixed interpreter and limits.
#[derive(Debug, Clone)]
pub struct Runner {
    interpreter: String,
    limits: ExecLimits,
}

impl Runner {
    pub fn new(interpreter: impl Into<String>, limits: ExecLimits) -> Self {
        Self {
            interpreter: interpreter.into(),
            limits,
        }
    }

    pub fn interpreter(&self) -> &str {
        &self.interpreter
    }

    pub fn limits(&self) -> &ExecLimits {
        &self.limits
    }

    /// Checks the interpreter runs and returns its version banner.
    pub fn probe(&self) -> Result<String, HarnessError> {
        let out = Command::new(&self.interpreter)
            .arg("--version")
            .stdin(Stdio::null())
            .output()
            .map_err(|_| HarnessError::InterpreterMissing(self.interpreter.clone()))?;
        if !out.status.success() {
            return Err(HarnessError::InterpreterMissing(self.interpreter.clone()));
        }
        let mut banner = String::from_utf8_lossy(&out.stdout).trim().to_string();
        if banner.is_empty() {
            banner = String::from_utf8_lossy(&out.stderr).trim().to_string();
        }
        Ok(banner)
    }

    /// One outcome per test, in input order. A candidate that does not parse
    /// is reported as `parse-error` on every test without being executed.
    pub fn run_tests(
        &self,
        source: &str,
        tests: &[TestCase],
    ) -> Result<Vec<TestOutcome>, HarnessError> {
        if let Err(err) = source::parse_module(source) {
            let message = err.to_string();
            return Ok(tests
                .iter()
                .map(|t| TestOutcome {
                    test_id: t.test_id.clone(),
                    status: TestStatus::ParseError,
                    actual_output: String::new(),
                    stderr_tail: message.clone(),
                    duration_ms: Some(0),
                })
                .collect());
        }
        tests.iter().map(|t| self.run_one(source, t)).collect()
    }

    fn scratch_dir(&self) -> std::io::Result<tempfile::TempDir> {
        let builder = {
            let mut b = tempfile::Builder::new();
            b.prefix("emr-run-");
            b
        };
        match &self.limits.temp_root {
            Some(root) => {
                std::fs::create_dir_all(root)?;
                builder.tempdir_in(root)
            }
            None => builder.tempdir(),
        }
    }

    fn run_one(&self, source: &str, test: &TestCase) -> Result<TestOutcome, HarnessError> {
        let dir = self.scratch_dir()?;
        std::fs::write(dir.path().join(CANDIDATE_FILE), source)?;

        let started = Instant::now();
        let mut child = Command::new(&self.interpreter)
            .arg(CANDIDATE_FILE)
            .current_dir(dir.path())
            .env("PYTHONHASHSEED", "0")
            .env("PYTHONDONTWRITEBYTECODE", "1")
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .process_group(0)
            .spawn()
            .map_err(|err| match err.kind() {
                std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied => {
                    HarnessError::InterpreterMissing(self.interpreter.clone())
                }
                _ => HarnessError::Io(err),
            })?;

        let run = self.supervise(&mut child, &test.input_text, started);
        // Reap anything the candidate left running in its group.
        kill_group(&child);
        let _ = child.wait();
        let run = run?;

        let duration_ms = started.elapsed().as_millis() as u64;
        let stderr_tail = sanitize(&tail(&run.stderr, STDERR_KEEP), dir.path());
        let actual_output = String::from_utf8_lossy(&run.stdout).into_owned();
        let status = if run.timed_out {
            TestStatus::Timeout
        } else if run.overflowed {
            TestStatus::WrongOutput
        } else if !run.status.is_some_and(|s| s.success()) {
            TestStatus::RuntimeError
        } else if outcome_pass(&test.expected_output, &actual_output) {
            TestStatus::Pass
        } else {
            TestStatus::WrongOutput
        };
        Ok(TestOutcome {
            test_id: test.test_id.clone(),
            status,
            actual_output,
            stderr_tail,
            duration_ms: Some(duration_ms),
        })
    }

    fn supervise(
        &self,
        child: &mut Child,
        input: &str,
        started: Instant,
    ) -> Result<RawRun, HarnessError> {
        let cap = self.limits.max_output_bytes;
        let overflow = Arc::new(AtomicBool::new(false));

        let mut stdin = child.stdin.take().expect("stdin piped");
        let input = input.as_bytes().to_vec();
        let writer = thread::spawn(move || {
            // The candidate may exit without reading its input.
            let _ = stdin.write_all(&input);
        });

        let mut stdout = child.stdout.take().expect("stdout piped");
        let flag = Arc::clone(&overflow);
        let out_reader = thread::spawn(move || {
            let mut kept = Vec::new();
            let mut buf = [0u8; 8192];
            loop {
                match stdout.read(&mut buf) {
                    Ok(0) | Err(_) => break,
                    Ok(n) => {
                        let room = cap.saturating_sub(kept.len());
                        kept.extend_from_slice(&buf[..n.min(room)]);
                        if n > room {
                            flag.store(true, Ordering::SeqCst);
                            break;
                        }
                    }
                }
            }
            kept
        });

        let mut stderr = child.stderr.take().expect("stderr piped");
        let err_reader = thread::spawn(move || {
            let mut kept: Vec<u8> = Vec::new();
            let mut buf = [0u8; 8192];
            loop {
                match stderr.read(&mut buf) {
                    Ok(0) | Err(_) => break,
                    Ok(n) => {
                        kept.extend_from_slice(&buf[..n]);
                        if kept.len() > 2 * STDERR_KEEP {
                            kept.drain(..kept.len() - STDERR_KEEP);
                        }
                    }
                }
            }
            kept
        });

        let deadline = started + self.limits.timeout();
        let mut timed_out = false;
        let mut status = None;
        loop {
            if let Some(s) = child.try_wait()? {
                status = Some(s);
                break;
            }
            if overflow.load(Ordering::SeqCst) {
                break;
            }
            if Instant::now() >= deadline {
                timed_out = true;
                break;
            }
            thread::sleep(Duration::from_millis(5));
        }
        if status.is_none() {
            kill_group(child);
            status = Some(child.wait()?);
        }
        // Ensure pipes held open by grandchildren are released.
        kill_group(child);

        let _ = writer.join();
        let stdout = out_reader.join().unwrap_or_default();
        let stderr = err_reader.join().unwrap_or_default();
        Ok(RawRun {
            stdout,
            stderr,
            status: if timed_out { None } else { status },
            timed_out,
            overflowed: overflow.load(Ordering::SeqCst),
        })
    }
}

struct RawRun {
    stdout: Vec<u8>,
    stderr: Vec<u8>,
    status: Option<ExitStatus>,
    timed_out: bool,
    overflowed: bool,
}

fn kill_group(child: &Child) {
    let pgid = child.id() as libc::pid_t;
    // SAFETY: signalling a process group we created; ESRCH is harmless.
    unsafe {
        libc::kill(-pgid, libc::SIGKILL);
    }
}

fn tail(bytes: &[u8], keep: usize) -> String {
    let start = bytes.len().saturating_sub(keep);
    String::from_utf8_lossy(&bytes[start..]).into_owned()
}

/// Strips the scratch directory from tracebacks so messages are stable.
fn sanitize(text: &str, dir: &Path) -> String {
    let mut prefix = dir.to_string_lossy().into_owned();
    prefix.push('/');
    text.replace(&prefix, "")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(id: &str, input: &str, expected: &str) -> TestCase {
        TestCase {
            test_id: id.into(),
            input_text: input.into(),
            expected_output: expected.into(),
        }
    }

    fn runner(timeout: f64) -> Runner {
        Runner::new(
            "python3",
            ExecLimits {
                wall_timeout_s: timeout,
                ..ExecLimits::default()
            },
        )
    }

    #[test]
    fn normalization_rules() {
        assert_eq!(normalize_output("6 \n"), "6");
        assert_eq!(normalize_output("a\r\nb\r\n"), "a\nb");
        assert_eq!(normalize_output("1\n\n\n"), normalize_output("1"));
        assert!(outcome_pass("6", "6"));
        assert!(!outcome_pass("6", "06"));
        assert!(!outcome_pass("3.0", "3"));
    }

    #[test]
    fn doubling_program_passes() {
        let out = runner(10.0)
            .run_tests("x = int(input())\nprint(x * 2)\n", &[case("t1", "3\n", "6\n")])
            .unwrap();
        assert_eq!(out[0].status, TestStatus::Pass);
    }

    #[test]
    fn infinite_loop_times_out() {
        let out = runner(1.0)
            .run_tests("while True:\n    pass\n", &[case("t1", "", "")])
            .unwrap();
        assert_eq!(out[0].status, TestStatus::Timeout);
        assert!(out[0].duration_ms.unwrap() >= 1000);
    }

    #[test]
    fn malformed_source_short_circuits() {
        let tests = [case("a", "", ""), case("b", "", "")];
        let out = runner(10.0).run_tests("def f(:\n", &tests).unwrap();
        assert!(out.iter().all(|o| o.status == TestStatus::ParseError));
        assert!(out[0].stderr_tail.contains("line 1"));
    }

    #[test]
    fn nonzero_exit_is_runtime_error() {
        let out = runner(10.0)
            .run_tests("print(1)\nraise SystemExit(3)\n", &[case("t", "", "1")])
            .unwrap();
        assert_eq!(out[0].status, TestStatus::RuntimeError);
        let out = runner(10.0)
            .run_tests("x = 1 / 0\n", &[case("t", "", "")])
            .unwrap();
        assert_eq!(out[0].status, TestStatus::RuntimeError);
        assert!(out[0].stderr_tail.contains("ZeroDivisionError"));
        assert!(out[0].stderr_tail.contains("\"candidate.py\""));
    }

    #[test]
    fn output_overflow_is_wrong_output() {
        let r = Runner::new(
            "python3",
            ExecLimits {
                max_output_bytes: 1000,
                ..ExecLimits::default()
            },
        );
        let out = r
            .run_tests("while True:\n    print('x' * 100)\n", &[case("t", "", "")])
            .unwrap();
        assert_eq!(out[0].status, TestStatus::WrongOutput);
        assert!(out[0].actual_output.len() <= 1000);
    }

    #[test]
    fn missing_interpreter_is_fatal() {
        let r = Runner::new("/nonexistent/python-zzz", ExecLimits::default());
        let err = r.run_tests("print(1)\n", &[case("t", "", "1")]).unwrap_err();
        assert!(matches!(err, HarnessError::InterpreterMissing(_)));
        assert!(r.probe().is_err());
    }

    #[test]
    fn executions_do_not_share_directories() {
        let src = "import os\nprint(len(os.listdir('.')))\nopen('junk.txt', 'w').write('x')\n";
        let r = runner(10.0);
        let tests = [case("a", "", "1"), case("b", "", "1")];
        let out = r.run_tests(src, &tests).unwrap();
        assert!(out.iter().all(|o| o.status == TestStatus::Pass));
    }
}
