//! Subprocess evaluation of candidate programs.
//!
//! A candidate receives one instance document on stdin and must print one
//! solution document on stdout before its timeout:
//!
//! ```text
//! in : {"type":"tsp","n":N,"matrix":[[...],...]}
//!      {"type":"bpp","n":N,"capacity":C,"sizes":[...]}
//! out: {"tour":[i0,...]}            {"bins":[[idx,...],...]}
//! ```
//!
//! Exit status 0 is required; stderr is kept for diagnostics.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::archive::Descriptor;
use crate::heuristics::{
    cycle_length, validate_packing, validate_tour, Packing, Tour, Violation,
};
use crate::instances::{Instance, InstanceSet};
use crate::oracles::relative_error;

/// Captured diagnostics are cut to this many bytes.
pub const DIAGNOSTIC_LIMIT: usize = 4096;

/// Objectives below `optimum * (1 - SUPER_OPTIMAL_TOLERANCE)` are rejected.
pub const SUPER_OPTIMAL_TOLERANCE: f64 = 1e-9;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct CandidateId(pub u64);

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h{}", self.0)
    }
}

/// A heuristic program and its place in the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: CandidateId,
    pub source: String,
    pub language: String,
    pub parent_id: Option<CandidateId>,
    pub island: usize,
    pub generation: u32,
    /// Strategy name, or `"seed"` for initial programs.
    pub strategy_used: String,
    pub descriptor: Option<Descriptor>,
    /// Negated mean relative error; present only after a fully valid evaluation.
    pub performance: Option<f64>,
}

impl Candidate {
    pub fn seed(id: CandidateId, source: impl Into<String>, language: impl Into<String>, island: usize) -> Self {
        Self {
            id,
            source: source.into(),
            language: language.into(),
            parent_id: None,
            island,
            generation: 0,
            strategy_used: "seed".into(),
            descriptor: None,
            performance: None,
        }
    }

    pub fn is_seed(&self) -> bool {
        self.parent_id.is_none()
    }

    /// Mean relative error implied by the performance score.
    pub fn mean_error(&self) -> Option<f64> {
        self.performance.map(|p| -p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunnerSpec {
    /// Command and arguments; `{source}` is replaced by the program path.
    pub command: Vec<String>,
    pub extension: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunnerConfig {
    pub runners: BTreeMap<String, RunnerSpec>,
    pub timeout: Duration,
    /// Optional budget shared by all instances of one candidate.
    pub candidate_timeout: Option<Duration>,
    pub max_output_bytes: usize,
    /// Environment variables passed through to the child; all others are cleared.
    pub env_allow: Vec<String>,
    pub workers: usize,
    pub diagnostic_limit: usize,
}

impl Default for RunnerConfig {
    fn default() -> Self {
        let mut runners = BTreeMap::new();
        runners.insert(
            "python".to_string(),
            RunnerSpec {
                command: vec!["python3".into(), "-I".into(), "{source}".into()],
                extension: "py".into(),
            },
        );
        Self {
            runners,
            timeout: Duration::from_secs(600),
            candidate_timeout: None,
            max_output_bytes: 1 << 20,
            env_allow: vec!["PATH".into(), "LANG".into(), "LC_ALL".into(), "SYSTEMROOT".into()],
            workers: 1,
            diagnostic_limit: DIAGNOSTIC_LIMIT,
        }
    }
}

impl RunnerConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.timeout.is_zero() {
            return Err(EvalError::Config("timeout must be positive".into()));
        }
        if self.candidate_timeout.is_some_and(|t| t.is_zero()) {
            return Err(EvalError::Config("candidate timeout must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("instance `{0}` has no known optimum")]
    MissingOptimum(String),
    #[error("no runner configured for language `{0}`")]
    UnknownLanguage(String),
    #[error("invalid runner configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureClass {
    /// Syntax error, crash, non-zero exit or spawn failure.
    StartFailure,
    Timeout,
    InvalidOutput,
    ConstraintViolation,
    SuperOptimal,
}

impl fmt::Display for FailureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureClass::StartFailure => "syntax/start failure",
            FailureClass::Timeout => "timeout",
            FailureClass::InvalidOutput => "invalid-output",
            FailureClass::ConstraintViolation => "constraint-violation",
            FailureClass::SuperOptimal => "super-optimal",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    Tour(Tour),
    Packing(Packing),
}

/// Everything that can go wrong for one candidate on one instance.
#[derive(Debug, Clone, PartialEq)]
pub enum RunFailure {
    Spawn(String),
    Exit { code: Option<i32>, stderr: String },
    Timeout { after: Duration, stderr: String },
    OversizedOutput { limit: usize },
    Unparseable { reason: String, stdout: String },
    Invalid(Violation),
    SuperOptimal { value: f64, optimum: f64 },
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub result: Result<Solution, RunFailure>,
    pub stderr: String,
    pub wall: Duration,
}

/// Class plus a diagnostic whose tail is kept within `limit` bytes.
pub fn classify_failure(failure: &RunFailure, limit: usize) -> (FailureClass, String) {
    let (class, text) = match failure {
        RunFailure::Spawn(msg) => (FailureClass::StartFailure, format!("failed to start: {msg}")),
        RunFailure::Exit { code, stderr } => {
            let code = code.map_or_else(|| "signal".to_string(), |c| c.to_string());
            (
                FailureClass::StartFailure,
                format!("exited with status {code}\n{}", stderr.trim_end()),
            )
        }
        RunFailure::Timeout { after, stderr } => (
            FailureClass::Timeout,
            format!(
                "terminated after {:.3}s time limit\n{}",
                after.as_secs_f64(),
                stderr.trim_end()
            ),
        ),
        RunFailure::OversizedOutput { limit } => (
            FailureClass::InvalidOutput,
            format!("output exceeded {limit} bytes"),
        ),
        RunFailure::Unparseable { reason, stdout } => (
            FailureClass::InvalidOutput,
            format!("unparseable output ({reason}): {}", stdout.trim()),
        ),
        RunFailure::Invalid(v) if v.is_capacity() => {
            (FailureClass::ConstraintViolation, v.to_string())
        }
        RunFailure::Invalid(v) => (FailureClass::InvalidOutput, v.to_string()),
        RunFailure::SuperOptimal { value, optimum } => (
            FailureClass::SuperOptimal,
            format!("objective {value} is below the known optimum {optimum}; data or solution is corrupt"),
        ),
    };
    (class, truncate_tail(text.trim_end(), limit))
}

/// Keeps the last `limit` bytes (on a char boundary), marking the cut.
pub fn truncate_tail(text: &str, limit: usize) -> String {
    if text.len() <= limit {
        return text.to_string();
    }
    let mut start = text.len() - limit;
    while !text.is_char_boundary(start) {
        start += 1;
    }
    format!("...{}", &text[start..])
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TourDoc {
    tour: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BinsDoc {
    bins: Vec<Vec<usize>>,
}

fn parse_solution(instance: &Instance, stdout: &str) -> Result<Solution, RunFailure> {
    let text = stdout.trim();
    let unparseable = |reason: String| RunFailure::Unparseable {
        reason,
        stdout: truncate_tail(text, 512),
    };
    if text.is_empty() {
        return Err(unparseable("empty output".into()));
    }
    match instance {
        Instance::Tsp(_) => serde_json::from_str::<TourDoc>(text)
            .map(|d| Solution::Tour(Tour(d.tour)))
            .map_err(|e| unparseable(e.to_string())),
        Instance::Bpp(_) => serde_json::from_str::<BinsDoc>(text)
            .map(|d| Solution::Packing(Packing(d.bins)))
            .map_err(|e| unparseable(e.to_string())),
    }
}

/// Objective of a valid solution: tour length or bin count.
pub fn objective(instance: &Instance, solution: &Solution) -> Result<f64, Violation> {
    match (instance, solution) {
        (Instance::Tsp(t), Solution::Tour(tour)) => {
            validate_tour(t, tour)?;
            Ok(cycle_length(&t.matrix, &tour.0))
        }
        (Instance::Bpp(b), Solution::Packing(p)) => {
            validate_packing(b, p)?;
            Ok(p.bin_count() as f64)
        }
        _ => unreachable!("solution kind always follows the instance kind"),
    }
}

fn drain_capped<R: Read>(mut reader: R, cap: usize, overflow: &AtomicBool) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut chunk = [0u8; 8192];
    loop {
        match reader.read(&mut chunk) {
            Ok(0) | Err(_) => break,
            Ok(k) => {
                if buf.len() + k > cap {
                    overflow.store(true, Ordering::SeqCst);
                    break;
                }
                buf.extend_from_slice(&chunk[..k]);
            }
        }
    }
    buf
}

/// Keeps only the tail of the stream, up to `cap` bytes.
fn drain_tail<R: Read>(mut reader: R, cap: usize) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut chunk = [0u8; 8192];
    loop {
        match reader.read(&mut chunk) {
            Ok(0) | Err(_) => break,
            Ok(k) => {
                buf.extend_from_slice(&chunk[..k]);
                if buf.len() > 2 * cap {
                    buf.drain(..buf.len() - cap);
                }
            }
        }
    }
    if buf.len() > cap {
        buf.drain(..buf.len() - cap);
    }
    buf
}

/// Runs the program stored at `program` on one instance.
pub fn run_program(
    program: &Path,
    spec: &RunnerSpec,
    instance: &Instance,
    cfg: &RunnerConfig,
    timeout: Duration,
) -> RunOutcome {
    let started = Instant::now();
    // temp paths would make diagnostics differ between otherwise identical runs
    let scrub = program
        .parent()
        .map(|d| format!("{}{}", d.display(), std::path::MAIN_SEPARATOR))
        .filter(|d| d.len() > 1);
    let finish = |result, stderr: String| RunOutcome {
        result,
        stderr,
        wall: started.elapsed(),
    };
    let program_str = program.to_string_lossy();
    let argv: Vec<String> = spec
        .command
        .iter()
        .map(|a| a.replace("{source}", &program_str))
        .collect();
    let Some((exe, args)) = argv.split_first() else {
        return finish(Err(RunFailure::Spawn("empty runner command".into())), String::new());
    };
    let mut cmd = Command::new(exe);
    cmd.args(args)
        .env_clear()
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    if let Some(dir) = program.parent() {
        cmd.current_dir(dir);
    }
    for key in &cfg.env_allow {
        if let Ok(val) = std::env::var(key) {
            cmd.env(key, val);
        }
    }
    let mut child = match cmd.spawn() {
        Ok(c) => c,
        Err(e) => return finish(Err(RunFailure::Spawn(format!("{exe}: {e}"))), String::new()),
    };

    let input = instance.to_protocol_json();
    let mut stdin = child.stdin.take().expect("stdin is piped");
    let writer = thread::spawn(move || {
        // a candidate that exits early closes the pipe; that's not our error
        let _ = stdin.write_all(input.as_bytes());
        let _ = stdin.write_all(b"\n");
    });
    let overflow = Arc::new(AtomicBool::new(false));
    let stdout = child.stdout.take().expect("stdout is piped");
    let stderr = child.stderr.take().expect("stderr is piped");
    let cap = cfg.max_output_bytes;
    let flag = Arc::clone(&overflow);
    let out_reader = thread::spawn(move || drain_capped(stdout, cap, &flag));
    let err_cap = cfg.diagnostic_limit.max(1024) * 4;
    let err_reader = thread::spawn(move || drain_tail(stderr, err_cap));

    let deadline = started + timeout;
    let mut sleep = Duration::from_micros(200);
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) => {}
            Err(_) => break None,
        }
        if overflow.load(Ordering::SeqCst) || Instant::now() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            break None;
        }
        thread::sleep(sleep);
        sleep = (sleep * 2).min(Duration::from_millis(10));
    };
    let _ = writer.join();
    let out = out_reader.join().unwrap_or_default();
    let mut err = String::from_utf8_lossy(&err_reader.join().unwrap_or_default()).into_owned();
    if let Some(d) = &scrub {
        err = err.replace(d.as_str(), "");
    }

    if overflow.load(Ordering::SeqCst) {
        return finish(Err(RunFailure::OversizedOutput { limit: cap }), err);
    }
    let Some(status) = status else {
        return finish(
            Err(RunFailure::Timeout {
                after: timeout,
                stderr: err.clone(),
            }),
            err,
        );
    };
    if !status.success() {
        return finish(
            Err(RunFailure::Exit {
                code: status.code(),
                stderr: err.clone(),
            }),
            err,
        );
    }
    let stdout = String::from_utf8_lossy(&out);
    finish(parse_solution(instance, &stdout), err)
}

/// Writes the candidate to a scratch directory and runs it on one instance.
/// Validation against the instance (and its optimum, when known) is part of
/// the outcome.
pub fn run_candidate(
    candidate: &Candidate,
    instance: &Instance,
    cfg: &RunnerConfig,
) -> Result<RunOutcome, EvalError> {
    let spec = cfg
        .runners
        .get(&candidate.language)
        .ok_or_else(|| EvalError::UnknownLanguage(candidate.language.clone()))?;
    let dir = tempfile::tempdir()?;
    let program = write_program(dir.path(), candidate, spec)?;
    let mut outcome = run_program(&program, spec, instance, cfg, cfg.timeout);
    check_solution(instance, &mut outcome);
    Ok(outcome)
}

fn write_program(dir: &Path, candidate: &Candidate, spec: &RunnerSpec) -> std::io::Result<std::path::PathBuf> {
    let program = dir.join(format!("candidate.{}", spec.extension));
    std::fs::write(&program, &candidate.source)?;
    Ok(program)
}

fn check_solution(instance: &Instance, outcome: &mut RunOutcome) {
    if let Ok(solution) = &outcome.result {
        match objective(instance, solution) {
            Err(v) => outcome.result = Err(RunFailure::Invalid(v)),
            Ok(value) => {
                if let Some(optimum) = instance.known_optimal() {
                    if value < optimum * (1.0 - SUPER_OPTIMAL_TOLERANCE) {
                        outcome.result = Err(RunFailure::SuperOptimal { value, optimum });
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub instance: String,
    pub objective: Option<f64>,
    pub relative_error: Option<f64>,
    /// Wall time in seconds; excluded from reproducibility comparisons.
    pub wall_seconds: f64,
    pub failure: Option<FailureClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub candidate_id: CandidateId,
    pub records: Vec<InstanceRecord>,
    pub mean_relative_error: Option<f64>,
    pub failure_class: Option<FailureClass>,
    pub diagnostic: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn is_success(&self) -> bool {
        self.mean_relative_error.is_some()
    }

    /// `g(h)`: the negated mean relative error.
    pub fn performance(&self) -> Option<f64> {
        self.mean_relative_error.map(|e| -e)
    }

    /// Copy with wall times zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        for rec in &mut r.records {
            rec.wall_seconds = 0.0;
        }
        r
    }

    pub fn with_candidate(&self, id: CandidateId) -> Self {
        let mut r = self.clone();
        r.candidate_id = id;
        r
    }

    /// Failure report for a candidate that never reached execution.
    pub fn not_run(candidate_id: CandidateId, class: FailureClass, diagnostic: String) -> Self {
        Self {
            candidate_id,
            records: Vec::new(),
            mean_relative_error: None,
            failure_class: Some(class),
            diagnostic,
            warnings: Vec::new(),
        }
    }
}

/// Runs the candidate on every instance (in parallel up to `cfg.workers`) and
/// assembles the report in instance order.
pub fn evaluate_candidate(
    candidate: &Candidate,
    set: &InstanceSet,
    cfg: &RunnerConfig,
) -> Result<EvalReport, EvalError> {
    cfg.validate()?;
    if let Some(inst) = set.iter().find(|i| i.known_optimal().is_none()) {
        return Err(EvalError::MissingOptimum(inst.name().to_string()));
    }
    let spec = cfg
        .runners
        .get(&candidate.language)
        .ok_or_else(|| EvalError::UnknownLanguage(candidate.language.clone()))?;
    let dir = tempfile::tempdir()?;
    let program = write_program(dir.path(), candidate, spec)?;

    let started = Instant::now();
    let budget_end = cfg.candidate_timeout.map(|t| started + t);
    let n = set.len();
    let next = AtomicUsize::new(0);
    let workers = cfg.workers.clamp(1, n.max(1));
    let mut outcomes: Vec<Option<RunOutcome>> = vec![None; n];
    thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::SeqCst);
                        if i >= n {
                            break;
                        }
                        let instance = &set.instances[i];
                        let timeout = match budget_end {
                            Some(end) => end.saturating_duration_since(Instant::now()).min(cfg.timeout),
                            None => cfg.timeout,
                        };
                        let mut outcome = if timeout.is_zero() {
                            RunOutcome {
                                result: Err(RunFailure::Timeout {
                                    after: Duration::ZERO,
                                    stderr: "candidate time budget exhausted".into(),
                                }),
                                stderr: String::new(),
                                wall: Duration::ZERO,
                            }
                        } else {
                            run_program(&program, spec, instance, cfg, timeout)
                        };
                        check_solution(instance, &mut outcome);
                        done.push((i, outcome));
                    }
                    done
                })
            })
            .collect();
        for h in handles {
            for (i, outcome) in h.join().expect("evaluation worker panicked") {
                outcomes[i] = Some(outcome);
            }
        }
    });

    let mut records = Vec::with_capacity(n);
    let mut first_failure: Option<(FailureClass, String)> = None;
    let mut errors = Vec::with_capacity(n);
    for (instance, outcome) in set.iter().zip(outcomes) {
        let outcome = outcome.expect("every instance was evaluated");
        let wall_seconds = outcome.wall.as_secs_f64();
        match &outcome.result {
            Ok(solution) => {
                let value = objective(instance, solution).expect("checked above");
                let optimum = instance.known_optimal().expect("checked above");
                let err = relative_error(value, optimum).expect("optimum is positive");
                errors.push(err);
                records.push(InstanceRecord {
                    instance: instance.name().to_string(),
                    objective: Some(value),
                    relative_error: Some(err),
                    wall_seconds,
                    failure: None,
                });
            }
            Err(f) => {
                let (class, diag) = classify_failure(f, cfg.diagnostic_limit);
                if first_failure.is_none() {
                    first_failure = Some((
                        class,
                        truncate_tail(&format!("instance {}: {diag}", instance.name()), cfg.diagnostic_limit),
                    ));
                }
                records.push(InstanceRecord {
                    instance: instance.name().to_string(),
                    objective: None,
                    relative_error: None,
                    wall_seconds,
                    failure: Some(class),
                });
            }
        }
    }
    let (mean, failure_class, diagnostic) = match first_failure {
        None => (
            Some(errors.iter().sum::<f64>() / errors.len() as f64),
            None,
            String::new(),
        ),
        Some((class, diag)) => (None, Some(class), diag),
    };
    Ok(EvalReport {
        candidate_id: candidate.id,
        records,
        mean_relative_error: mean,
        failure_class,
        diagnostic,
        warnings: Vec::new(),
    })
}
