//! Per-sample refactoring pipelines and run-level aggregation.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corpus::{CodeSample, TestCase};
use crate::harness::{all_passed, HarnessError, Runner, TestOutcome, TestStatus};
use crate::llm::{extract_code, ChatModel};
use crate::metrics::{file_metrics, MetricReport};
use crate::prompt::{
    append_feedback, render_one_shot, render_rci_initial, Conversation, Exemplar, PromptError,
    PromptTemplate, Strategy, TestFailureSummary,
};
use crate::source::normalized_tokens;

pub const DEFAULT_MAX_ATTEMPTS: usize = 3;

#[derive(Debug, thiserror::Error)]
pub enum OrchestratorError {
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("max_attempts must be at least 1")]
    ZeroAttempts,
    #[error("no run records to evaluate")]
    NoRecords,
}

/// A baseline-validated sample with the tests of its problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkItem {
    pub sample: CodeSample,
    pub tests: Vec<TestCase>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttemptFailure {
    WrongOutput,
    RuntimeError,
    Timeout,
    ParseError,
    ModelError,
}

impl AttemptFailure {
    pub fn as_str(self) -> &'static str {
        match self {
            AttemptFailure::WrongOutput => "wrong-output",
            AttemptFailure::RuntimeError => "runtime-error",
            AttemptFailure::Timeout => "timeout",
            AttemptFailure::ParseError => "parse-error",
            AttemptFailure::ModelError => "model-error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub sample_id: String,
    pub model_name: String,
    pub strategy: Strategy,
    pub attempt_index: usize,
    pub candidate_source: String,
    pub outcomes: Vec<TestOutcome>,
    pub passed_all: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_kind: Option<AttemptFailure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_error: Option<String>,
    #[serde(default)]
    pub truncated: bool,
    /// Candidate is token-identical to the input.
    #[serde(default)]
    pub no_op_refactoring: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum FinalStatus {
    Success { attempt: usize },
    Unsuccessful,
}

impl FinalStatus {
    pub fn is_success(self) -> bool {
        matches!(self, FinalStatus::Success { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub sample_id: String,
    pub problem_id: String,
    pub model_name: String,
    pub strategy: Strategy,
    pub approach: String,
    #[serde(rename = "final")]
    pub status: FinalStatus,
    pub attempts: Vec<AttemptRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub original_metrics: Option<MetricReport>,
    pub transcript: Conversation,
    /// sha256 of the run manifest this record was produced under.
    pub config_hash: String,
}

impl RunRecord {
    /// Copy without timing fields, for byte-stable output.
    pub fn without_timings(&self) -> RunRecord {
        let mut r = self.clone();
        for a in &mut r.attempts {
            a.wall_time_ms = None;
            for o in &mut a.outcomes {
                o.duration_ms = None;
            }
        }
        r
    }

    pub fn key(&self) -> (String, String) {
        (self.approach.clone(), self.sample_id.clone())
    }
}

pub fn approach_name(model_label: &str, strategy: Strategy) -> String {
    format!("{model_label}-{}", strategy.label())
}

/// Everything needed to refactor samples with one model.
pub struct Refactorer<'a> {
    pub model: &'a dyn ChatModel,
    /// Label used in records and approach names.
    pub model_name: String,
    pub runner: &'a Runner,
    pub one_shot_template: &'a PromptTemplate,
    pub rci_template: &'a PromptTemplate,
    pub exemplar: &'a Exemplar,
    pub config_hash: String,
}

fn failure_of(outcomes: &[TestOutcome]) -> Option<AttemptFailure> {
    outcomes.iter().find_map(|o| match o.status {
        TestStatus::Pass => None,
        TestStatus::WrongOutput => Some(AttemptFailure::WrongOutput),
        TestStatus::RuntimeError => Some(AttemptFailure::RuntimeError),
        TestStatus::Timeout => Some(AttemptFailure::Timeout),
        TestStatus::ParseError => Some(AttemptFailure::ParseError),
    })
}

fn same_tokens(a: &str, b: &str) -> bool {
    match (normalized_tokens(a), normalized_tokens(b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

struct Step {
    record: AttemptRecord,
    reply: Option<String>,
}

impl Refactorer<'_> {
    fn attempt(&self, item: &BenchmarkItem, conv: &Conversation) -> Result<Step, OrchestratorError> {
        let started = Instant::now();
        let base = |source: String| AttemptRecord {
            sample_id: item.sample.sample_id.clone(),
            model_name: self.model_name.clone(),
            strategy: conv.strategy,
            attempt_index: conv.attempt_index,
            candidate_source: source,
            outcomes: Vec::new(),
            passed_all: false,
            failure_kind: None,
            model_error: None,
            truncated: false,
            no_op_refactoring: false,
            metrics: None,
            wall_time_ms: None,
        };
        let reply = match self.model.chat_complete(conv) {
            Ok(r) => r,
            Err(e) => {
                let mut record = base(String::new());
                record.failure_kind = Some(AttemptFailure::ModelError);
                record.model_error = Some(e.to_string());
                record.wall_time_ms = Some(started.elapsed().as_millis() as u64);
                return Ok(Step { record, reply: None });
            }
        };
        let code = extract_code(&reply.raw_text);
        let outcomes = if code.trim().is_empty() {
            item.tests
                .iter()
                .map(|t| TestOutcome {
                    test_id: t.test_id.clone(),
                    status: TestStatus::ParseError,
                    actual_output: String::new(),
                    stderr_tail: "no code could be extracted from the reply".into(),
                    duration_ms: Some(0),
                })
                .collect()
        } else {
            self.runner.run_tests(&code, &item.tests)?
        };
        let mut passed = all_passed(&outcomes);
        let metrics = if passed { file_metrics(&code).ok() } else { None };
        passed &= metrics.is_some();
        let mut record = base(code);
        record.no_op_refactoring = same_tokens(&record.candidate_source, &item.sample.source);
        record.failure_kind = if passed {
            None
        } else {
            Some(failure_of(&outcomes).unwrap_or(AttemptFailure::ParseError))
        };
        record.passed_all = passed;
        record.metrics = metrics;
        record.outcomes = outcomes;
        record.truncated = reply.truncated;
        record.wall_time_ms = Some(started.elapsed().as_millis() as u64);
        Ok(Step {
            record,
            reply: Some(reply.raw_text),
        })
    }

    fn finish(
        &self,
        item: &BenchmarkItem,
        strategy: Strategy,
        attempts: Vec<AttemptRecord>,
        transcript: Conversation,
    ) -> RunRecord {
        let status = match attempts.last() {
            Some(a) if a.passed_all => FinalStatus::Success {
                attempt: a.attempt_index,
            },
            _ => FinalStatus::Unsuccessful,
        };
        RunRecord {
            sample_id: item.sample.sample_id.clone(),
            problem_id: item.sample.problem_id.clone(),
            model_name: self.model_name.clone(),
            strategy,
            approach: approach_name(&self.model_name, strategy),
            status,
            attempts,
            original_metrics: file_metrics(&item.sample.source).ok(),
            transcript,
            config_hash: self.config_hash.clone(),
        }
    }

    /// Single attempt with the exemplar prompt; failures are logged, not retried.
    pub fn refactor_one_shot(&self, item: &BenchmarkItem) -> Result<RunRecord, OrchestratorError> {
        let conv = render_one_shot(&item.sample, self.one_shot_template, Some(self.exemplar))?;
        let step = self.attempt(item, &conv)?;
        let transcript = match &step.reply {
            Some(r) => conv.with_reply(r),
            None => conv,
        };
        Ok(self.finish(item, Strategy::OneShot, vec![step.record], transcript))
    }

    /// Zero-shot first attempt, then test-failure feedback until a pass or
    /// `max_attempts`. A model error ends the chain.
    pub fn refactor_rci(&self, item: &BenchmarkItem, max_attempts: usize) -> Result<RunRecord, OrchestratorError> {
        if max_attempts == 0 {
            return Err(OrchestratorError::ZeroAttempts);
        }
        let mut conv = render_rci_initial(&item.sample, self.rci_template)?;
        let mut attempts = Vec::new();
        loop {
            let step = self.attempt(item, &conv)?;
            let done = step.record.passed_all || conv.attempt_index >= max_attempts;
            let Some(reply) = step.reply else {
                attempts.push(step.record);
                break;
            };
            if done {
                attempts.push(step.record);
                conv = conv.with_reply(&reply);
                break;
            }
            let expected = |id: &str| {
                item.tests
                    .iter()
                    .find(|t| t.test_id == id)
                    .map(|t| t.expected_output.as_str())
            };
            let summary = TestFailureSummary::from_outcomes(&step.record.outcomes, expected)
                .expect("failing attempt has failing outcomes");
            attempts.push(step.record);
            conv = append_feedback(&conv, &reply, &summary, self.rci_template)?;
        }
        Ok(self.finish(item, Strategy::Rci, attempts, conv))
    }

    pub fn refactor(
        &self,
        item: &BenchmarkItem,
        strategy: Strategy,
        max_attempts: usize,
    ) -> Result<RunRecord, OrchestratorError> {
        match strategy {
            Strategy::OneShot => self.refactor_one_shot(item),
            Strategy::Rci => self.refactor_rci(item, max_attempts),
        }
    }
}

/// Runs `work` over `jobs` on `workers` threads, handing each finished
/// result to `on_done` on the calling thread. Stops early on the first error.
pub fn run_pool<J, R, E>(
    jobs: &[J],
    workers: usize,
    work: impl Fn(&J) -> Result<R, E> + Sync,
    mut on_done: impl FnMut(R) -> Result<(), E>,
) -> Result<(), E>
where
    J: Sync,
    R: Send,
    E: Send,
{
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<Result<R, E>>();
    std::thread::scope(|scope| {
        for _ in 0..workers.max(1).min(jobs.len().max(1)) {
            let tx = tx.clone();
            let (next, stop, work) = (&next, &stop, &work);
            scope.spawn(move || loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(job) = jobs.get(i) else { break };
                if tx.send(work(job)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut first_err = None;
        for result in rx {
            let handled = result.and_then(&mut on_done);
            if let Err(e) = handled {
                stop.store(true, Ordering::SeqCst);
                first_err.get_or_insert(e);
            }
        }
        first_err.map_or(Ok(()), Err)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproachStats {
    pub approach: String,
    pub model_name: String,
    pub strategy: Strategy,
    pub samples: usize,
    pub successes: usize,
    pub tpp: f64,
    /// Mean of avg LOC/method over passing final candidates.
    pub mean_loc: Option<f64>,
    /// Mean of max CC over passing final candidates.
    pub mean_cc: Option<f64>,
    pub no_op: usize,
    pub model_errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemStats {
    pub approach: String,
    pub problem_id: String,
    pub samples: usize,
    pub successes: usize,
    pub tpp: f64,
    pub mean_loc: Option<f64>,
    pub mean_cc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginalStats {
    pub samples: usize,
    pub mean_loc: Option<f64>,
    pub mean_cc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationTable {
    pub approaches: Vec<ApproachStats>,
    pub problems: Vec<ProblemStats>,
    /// RCI approaches only: successes keyed by the attempt that passed.
    pub iterations: BTreeMap<String, BTreeMap<usize, usize>>,
    pub original: OriginalStats,
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

#[derive(Default)]
struct Acc {
    samples: usize,
    successes: usize,
    locs: Vec<f64>,
    ccs: Vec<f64>,
    no_op: usize,
    model_errors: usize,
}

impl Acc {
    fn add(&mut self, r: &RunRecord) {
        self.samples += 1;
        let last = r.attempts.last();
        if r.status.is_success() {
            self.successes += 1;
            if let Some(m) = last.and_then(|a| a.metrics.as_ref()) {
                self.locs.push(m.avg_loc_per_method);
                self.ccs.push(m.max_cc as f64);
            }
            if last.is_some_and(|a| a.no_op_refactoring) {
                self.no_op += 1;
            }
        }
        if last.is_some_and(|a| a.failure_kind == Some(AttemptFailure::ModelError)) {
            self.model_errors += 1;
        }
    }

    fn tpp(&self) -> f64 {
        self.successes as f64 / self.samples as f64
    }
}

/// Row order within a model: RCI before one-shot.
fn strategy_rank(s: Strategy) -> u8 {
    match s {
        Strategy::Rci => 0,
        Strategy::OneShot => 1,
    }
}

/// Aggregates run records into TPP and metric means.
pub fn evaluate_run(records: &[RunRecord]) -> Result<EvaluationTable, OrchestratorError> {
    if records.is_empty() {
        return Err(OrchestratorError::NoRecords);
    }
    let mut by_approach: BTreeMap<(String, u8, String), (Strategy, Acc)> = BTreeMap::new();
    let mut by_problem: BTreeMap<(String, String), Acc> = BTreeMap::new();
    let mut iterations: BTreeMap<String, BTreeMap<usize, usize>> = BTreeMap::new();
    let mut originals: BTreeMap<&str, &MetricReport> = BTreeMap::new();
    for r in records {
        by_approach
            .entry((r.model_name.clone(), strategy_rank(r.strategy), r.approach.clone()))
            .or_insert_with(|| (r.strategy, Acc::default()))
            .1
            .add(r);
        by_problem
            .entry((r.approach.clone(), r.problem_id.clone()))
            .or_default()
            .add(r);
        if r.strategy == Strategy::Rci {
            let hist = iterations.entry(r.approach.clone()).or_default();
            if let FinalStatus::Success { attempt } = r.status {
                *hist.entry(attempt).or_default() += 1;
            }
        }
        if let Some(m) = &r.original_metrics {
            originals.entry(r.sample_id.as_str()).or_insert(m);
        }
    }
    let approaches = by_approach
        .into_iter()
        .map(|((model_name, _, approach), (strategy, acc))| ApproachStats {
            approach,
            model_name,
            strategy,
            samples: acc.samples,
            successes: acc.successes,
            tpp: acc.tpp(),
            mean_loc: mean(&acc.locs),
            mean_cc: mean(&acc.ccs),
            no_op: acc.no_op,
            model_errors: acc.model_errors,
        })
        .collect();
    let problems = by_problem
        .into_iter()
        .map(|((approach, problem_id), acc)| ProblemStats {
            approach,
            problem_id,
            samples: acc.samples,
            successes: acc.successes,
            tpp: acc.tpp(),
            mean_loc: mean(&acc.locs),
            mean_cc: mean(&acc.ccs),
        })
        .collect();
    let orig_loc: Vec<f64> = originals.values().map(|m| m.avg_loc_per_method).collect();
    let orig_cc: Vec<f64> = originals.values().map(|m| m.max_cc as f64).collect();
    let original = OriginalStats {
        samples: originals.len(),
        mean_loc: mean(&orig_loc),
        mean_cc: mean(&orig_cc),
    };
    Ok(EvaluationTable {
        approaches,
        problems,
        iterations,
        original,
    })
}

/// Sample ids that appear under more than one problem across records.
pub fn inconsistent_samples(records: &[RunRecord]) -> BTreeSet<String> {
    let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
    let mut bad = BTreeSet::new();
    for r in records {
        if let Some(p) = seen.insert(&r.sample_id, &r.problem_id) {
            if p != r.problem_id {
                bad.insert(r.sample_id.clone());
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::ExecLimits;
    use crate::llm::{MockEntry, MockModel};

    fn item(id: &str, problem: &str) -> BenchmarkItem {
        BenchmarkItem {
            sample: CodeSample::new(problem, id, "x = int(input())\nprint(x * 2)\n").unwrap(),
            tests: vec![
                TestCase {
                    test_id: "t1".into(),
                    input_text: "3\n".into(),
                    expected_output: "6\n".into(),
                },
                TestCase {
                    test_id: "t2".into(),
                    input_text: "5\n".into(),
                    expected_output: "10\n".into(),
                },
            ],
        }
    }

    fn entry(sample: &str, attempt: usize, reply: &str) -> MockEntry {
        MockEntry {
            sample_id: sample.into(),
            attempt,
            reply: reply.into(),
            strategy: None,
            truncated: false,
            error: None,
            echo: false,
        }
    }

    const GOOD: &str = "```python\ndef double(x):\n    return x * 2\n\n\ndef main():\n    print(double(int(input())))\n\n\nmain()\n```";
    const BAD: &str = "```python\nprint(int(input()) + 1)\n```";

    fn with_refactorer<T>(mock: MockModel, f: impl FnOnce(&Refactorer) -> T) -> T {
        let runner = Runner::new("python3", ExecLimits::default());
        let (one, rci, ex) = (
            PromptTemplate::default_one_shot(),
            PromptTemplate::default_rci(),
            Exemplar::default(),
        );
        let r = Refactorer {
            model: &mock,
            model_name: "Mock".into(),
            runner: &runner,
            one_shot_template: &one,
            rci_template: &rci,
            exemplar: &ex,
            config_hash: "h".into(),
        };
        f(&r)
    }

    #[test]
    fn one_shot_success_and_failure() {
        let mock = MockModel::from_entries([entry("ok", 1, GOOD), entry("bad", 1, BAD)]);
        with_refactorer(mock, |r| {
            let ok = r.refactor_one_shot(&item("ok", "p1")).unwrap();
            assert_eq!(ok.status, FinalStatus::Success { attempt: 1 });
            assert!(ok.attempts[0].metrics.is_some());
            assert_eq!(ok.attempts[0].metrics.as_ref().unwrap().method_count, 2);
            assert_eq!(ok.approach, "Mock-Oneshot");
            let bad = r.refactor_one_shot(&item("bad", "p1")).unwrap();
            assert_eq!(bad.status, FinalStatus::Unsuccessful);
            assert_eq!(bad.attempts.len(), 1);
            assert!(bad.attempts[0].metrics.is_none());
            assert_eq!(bad.attempts[0].failure_kind, Some(AttemptFailure::WrongOutput));
        });
    }

    #[test]
    fn rci_fail_then_fix() {
        let mock = MockModel::from_entries([entry("s", 1, BAD), entry("s", 2, GOOD)]);
        with_refactorer(mock, |r| {
            let rec = r.refactor_rci(&item("s", "p1"), 3).unwrap();
            assert_eq!(rec.status, FinalStatus::Success { attempt: 2 });
            assert_eq!(rec.attempts.len(), 2);
            assert_eq!(rec.transcript.attempt_index, 2);
            // system, user, assistant, feedback, assistant
            assert_eq!(rec.transcript.turns.len(), 5);
            assert!(rec.transcript.turns[3].content.contains("t1"));
        });
    }

    #[test]
    fn rci_cap_and_model_error() {
        let mut err = entry("e", 1, "");
        err.error = Some("connection refused".into());
        let mock = MockModel::from_entries([entry("s", 1, BAD), err]);
        with_refactorer(mock, |r| {
            let rec = r.refactor_rci(&item("s", "p1"), 3).unwrap();
            assert_eq!(rec.status, FinalStatus::Unsuccessful);
            assert_eq!(rec.attempts.len(), 3);
            assert_eq!(rec.transcript.feedback_turns(), 2);
            let rec = r.refactor_rci(&item("e", "p1"), 3).unwrap();
            assert_eq!(rec.attempts.len(), 1);
            assert_eq!(rec.attempts[0].failure_kind, Some(AttemptFailure::ModelError));
            assert!(matches!(r.refactor_rci(&item("s", "p1"), 0), Err(OrchestratorError::ZeroAttempts)));
        });
    }

    #[test]
    fn echo_is_flagged_no_op() {
        with_refactorer(MockModel::echo(), |r| {
            let rec = r.refactor_one_shot(&item("s", "p1")).unwrap();
            assert!(rec.status.is_success());
            assert!(rec.attempts[0].no_op_refactoring);
        });
    }

    #[test]
    fn empty_extraction_is_parse_error() {
        let mock = MockModel::from_entries([entry("s", 1, "```python\n```")]);
        with_refactorer(mock, |r| {
            let rec = r.refactor_one_shot(&item("s", "p1")).unwrap();
            assert_eq!(rec.attempts[0].failure_kind, Some(AttemptFailure::ParseError));
        });
    }

    fn fake(approach: &str, strategy: Strategy, sample: &str, problem: &str, status: FinalStatus) -> RunRecord {
        let metrics = status.is_success().then(|| MetricReport {
            per_method_loc: vec![4, 6],
            per_method_cc: vec![1, 3],
            avg_loc_per_method: 5.0,
            max_cc: 3,
            method_count: 2,
        });
        let attempt = match status {
            FinalStatus::Success { attempt } => attempt,
            FinalStatus::Unsuccessful => 1,
        };
        RunRecord {
            sample_id: sample.into(),
            problem_id: problem.into(),
            model_name: "M".into(),
            strategy,
            approach: approach.into(),
            status,
            attempts: vec![AttemptRecord {
                sample_id: sample.into(),
                model_name: "M".into(),
                strategy,
                attempt_index: attempt,
                candidate_source: String::new(),
                outcomes: vec![],
                passed_all: status.is_success(),
                failure_kind: None,
                model_error: None,
                truncated: false,
                no_op_refactoring: false,
                metrics,
                wall_time_ms: None,
            }],
            original_metrics: None,
            transcript: Conversation {
                sample_id: sample.into(),
                strategy,
                attempt_index: 1,
                turns: vec![],
            },
            config_hash: String::new(),
        }
    }

    #[test]
    fn tpp_three_of_four() {
        let s = FinalStatus::Success { attempt: 1 };
        let records = vec![
            fake("M-RCI", Strategy::Rci, "a", "p1", s),
            fake("M-RCI", Strategy::Rci, "b", "p1", FinalStatus::Success { attempt: 2 }),
            fake("M-RCI", Strategy::Rci, "c", "p2", s),
            fake("M-RCI", Strategy::Rci, "d", "p2", FinalStatus::Unsuccessful),
        ];
        let t = evaluate_run(&records).unwrap();
        assert_eq!(t.approaches.len(), 1);
        assert_eq!(t.approaches[0].tpp, 0.75);
        assert_eq!(t.approaches[0].mean_cc, Some(3.0));
        assert_eq!(t.problems[0].tpp, 1.0);
        assert_eq!(t.problems[1].tpp, 0.5);
        assert_eq!(t.iterations["M-RCI"][&1], 2);
        assert_eq!(t.iterations["M-RCI"][&2], 1);
        assert!(matches!(evaluate_run(&[]), Err(OrchestratorError::NoRecords)));
    }

    #[test]
    fn pool_runs_every_job_once() {
        let jobs: Vec<usize> = (0..100).collect();
        let mut seen = Vec::new();
        run_pool(&jobs, 8, |j| Ok::<_, ()>(j * 2), |r| {
            seen.push(r);
            Ok(())
        })
        .unwrap();
        seen.sort();
        assert_eq!(seen, (0..100).map(|j| j * 2).collect::<Vec<_>>());
        let err = run_pool(&jobs, 4, |j| if *j == 50 { Err(*j) } else { Ok(*j) }, |_| Ok(()));
        assert_eq!(err, Err(50));
    }
}
