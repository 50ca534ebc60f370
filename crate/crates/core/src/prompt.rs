//! Conversation construction for one-shot and RCI (recursive criticism and
//! improvement) prompting.
//!
//! Templates are plain text with `{code}`, `{example}`, `{failed_tests}` and
//! `{stderr}` placeholders. Rendering is single-pass: substituted content is
//! never rescanned, so braces inside Python code are left alone.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::CodeSample;
use crate::harness::{TestOutcome, TestStatus};

pub const EXCERPT_BUDGET: usize = 512;
pub const STDERR_BUDGET: usize = 1024;

pub const DEFAULT_SYSTEM: &str = "You are an expert Python developer performing Extract Method refactoring.\n\
Output only executable Python code in a single ```python code block. Avoid explanations.\n\
Limit changes to Extract Method refactoring: move cohesive fragments of long functions into \
well-named helper functions and keep the program's input/output behaviour identical.";

pub const DEFAULT_ONE_SHOT_TASK: &str = "Here is an example of an Extract Method refactoring.\n\n{example}\n\n\
Apply Extract Method refactoring to the following code in the same way. \
Output only executable code.\n\n```python\n{code}\n```";

pub const DEFAULT_RCI_TASK: &str = "Apply Extract Method refactoring to the following code. \
Output only executable code.\n\n```python\n{code}\n```";

pub const DEFAULT_FEEDBACK: &str = "Your refactored code does not behave like the original. \
These test cases failed:\n\n{failed_tests}\n\nError output:\n```\n{stderr}\n```\n\n\
Fix the refactoring so every test passes. Output only executable code.";

const DEFAULT_EXEMPLAR_BEFORE: &str = r#"def main():
    n = int(input())
    values = list(map(int, input().split()))
    total = 0
    for v in values:
        if v % 2 == 0:
            total += v
    best = values[0]
    for v in values:
        if v > best:
            best = v
    print(total, best)


main()
"#;

const DEFAULT_EXEMPLAR_AFTER: &str = r#"def read_values():
    n = int(input())
    return list(map(int, input().split()))


def sum_even(values):
    total = 0
    for v in values:
        if v % 2 == 0:
            total += v
    return total


def maximum(values):
    best = values[0]
    for v in values:
        if v > best:
            best = v
    return best


def main():
    values = read_values()
    print(sum_even(values), maximum(values))


main()
"#;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("template has no {{{0}}} placeholder")]
    MissingPlaceholder(&'static str),
    #[error("placeholder {{{0}}} is not bound for this strategy")]
    UnboundPlaceholder(String),
    #[error("one-shot prompting needs an exemplar")]
    MissingExemplar,
    #[error("feedback can only be appended to an RCI conversation")]
    NotRci,
    #[error("feedback needs at least one failed test")]
    EmptyFeedback,
    #[error("cannot read template {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "one-shot")]
    OneShot,
    #[serde(rename = "rci")]
    Rci,
}

impl Strategy {
    /// Suffix used in approach names (`<model>-RCI`, `<model>-Oneshot`).
    pub fn label(self) -> &'static str {
        match self {
            Strategy::OneShot => "Oneshot",
            Strategy::Rci => "RCI",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::OneShot => "one-shot",
            Strategy::Rci => "rci",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "one-shot" | "oneshot" | "one_shot" => Ok(Strategy::OneShot),
            "rci" => Ok(Strategy::Rci),
            other => Err(format!("unknown strategy `{other}` (expected one-shot or rci)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub role: Role,
    pub content: String,
}

/// An attempt chain for one sample. Immutable: appending returns a new value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conversation {
    pub sample_id: String,
    pub strategy: Strategy,
    pub attempt_index: usize,
    pub turns: Vec<Turn>,
}

impl Conversation {
    /// Number of user turns after the first one.
    pub fn feedback_turns(&self) -> usize {
        self.turns
            .iter()
            .filter(|t| t.role == Role::User)
            .count()
            .saturating_sub(1)
    }

    /// Closes the transcript with the model's last reply.
    pub fn with_reply(&self, reply: &str) -> Conversation {
        let mut next = self.clone();
        next.turns.push(Turn {
            role: Role::Assistant,
            content: reply.to_string(),
        });
        next
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub system_text: String,
    pub task_text: String,
    pub feedback_text: String,
}

impl PromptTemplate {
    pub fn default_one_shot() -> Self {
        Self {
            system_text: DEFAULT_SYSTEM.into(),
            task_text: DEFAULT_ONE_SHOT_TASK.into(),
            feedback_text: DEFAULT_FEEDBACK.into(),
        }
    }

    pub fn default_rci() -> Self {
        Self {
            system_text: DEFAULT_SYSTEM.into(),
            task_text: DEFAULT_RCI_TASK.into(),
            feedback_text: DEFAULT_FEEDBACK.into(),
        }
    }
}

/// A before/after refactoring pair shown to the model in one-shot prompts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exemplar {
    pub before: String,
    pub after: String,
}

impl Default for Exemplar {
    fn default() -> Self {
        Self {
            before: DEFAULT_EXEMPLAR_BEFORE.into(),
            after: DEFAULT_EXEMPLAR_AFTER.into(),
        }
    }
}

impl Exemplar {
    fn render(&self) -> String {
        format!(
            "Original code:\n```python\n{}\n```\n\nRefactored code:\n```python\n{}\n```",
            self.before.trim_end(),
            self.after.trim_end()
        )
    }
}

pub fn read_template_file(path: &Path) -> Result<String, PromptError> {
    std::fs::read_to_string(path).map_err(|e| PromptError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

const PLACEHOLDERS: &[&str] = &["code", "example", "failed_tests", "stderr"];

/// Substitutes known placeholders from `bindings`. A known placeholder with
/// no binding is an error; unknown `{...}` text is copied through.
fn render(template: &str, bindings: &[(&str, &str)]) -> Result<String, PromptError> {
    let mut out = String::with_capacity(template.len() + 256);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let close = after.find('}');
        let name = close.map(|c| &after[..c]);
        match name {
            Some(name) if PLACEHOLDERS.contains(&name) => {
                let value = bindings
                    .iter()
                    .find(|(k, _)| *k == name)
                    .map(|(_, v)| *v)
                    .ok_or_else(|| PromptError::UnboundPlaceholder(name.to_string()))?;
                out.push_str(value);
                rest = &after[name.len() + 1..];
            }
            _ => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    Ok(out)
}

fn require(template: &str, name: &'static str) -> Result<(), PromptError> {
    if template.contains(&format!("{{{name}}}")) {
        Ok(())
    } else {
        Err(PromptError::MissingPlaceholder(name))
    }
}

fn opening(sample: &CodeSample, strategy: Strategy, system: &str, user: String) -> Conversation {
    Conversation {
        sample_id: sample.sample_id.clone(),
        strategy,
        attempt_index: 1,
        turns: vec![
            Turn {
                role: Role::System,
                content: system.to_string(),
            },
            Turn {
                role: Role::User,
                content: user,
            },
        ],
    }
}

pub fn render_one_shot(
    sample: &CodeSample,
    template: &PromptTemplate,
    exemplar: Option<&Exemplar>,
) -> Result<Conversation, PromptError> {
    let exemplar = exemplar.ok_or(PromptError::MissingExemplar)?;
    require(&template.task_text, "code")?;
    require(&template.task_text, "example")?;
    let example = exemplar.render();
    let user = render(
        &template.task_text,
        &[("code", sample.source.trim_end()), ("example", &example)],
    )?;
    Ok(opening(sample, Strategy::OneShot, &template.system_text, user))
}

/// Zero-shot opening turn of an RCI chain: task and code, nothing else.
pub fn render_rci_initial(sample: &CodeSample, template: &PromptTemplate) -> Result<Conversation, PromptError> {
    require(&template.task_text, "code")?;
    let user = render(&template.task_text, &[("code", sample.source.trim_end())])?;
    Ok(opening(sample, Strategy::Rci, &template.system_text, user))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    WrongOutput,
    RuntimeError,
    Timeout,
    ParseError,
}

impl FailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureKind::WrongOutput => "wrong-output",
            FailureKind::RuntimeError => "runtime-error",
            FailureKind::Timeout => "timeout",
            FailureKind::ParseError => "parse-error",
        }
    }

    fn of(status: TestStatus) -> Option<Self> {
        match status {
            TestStatus::Pass => None,
            TestStatus::WrongOutput => Some(FailureKind::WrongOutput),
            TestStatus::RuntimeError => Some(FailureKind::RuntimeError),
            TestStatus::Timeout => Some(FailureKind::Timeout),
            TestStatus::ParseError => Some(FailureKind::ParseError),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedTest {
    pub test_id: String,
    pub expected_excerpt: String,
    pub actual_excerpt: String,
    pub failure_kind: FailureKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestFailureSummary {
    pub failed: Vec<FailedTest>,
    pub stderr_tail: String,
}

/// First `budget` bytes of `text`, cut at a character boundary.
pub fn head_excerpt(text: &str, budget: usize) -> &str {
    if text.len() <= budget {
        return text;
    }
    let mut end = budget;
    while !text.is_char_boundary(end) {
        end -= 1;
    }
    &text[..end]
}

/// Last `budget` bytes of `text`, cut at a character boundary.
pub fn tail_excerpt(text: &str, budget: usize) -> &str {
    if text.len() <= budget {
        return text;
    }
    let mut start = text.len() - budget;
    while !text.is_char_boundary(start) {
        start += 1;
    }
    &text[start..]
}

impl TestFailureSummary {
    /// Summarizes the failing outcomes; `None` when every test passed.
    /// `expected` yields the expected output for a test id.
    pub fn from_outcomes<'a>(
        outcomes: &[TestOutcome],
        expected: impl Fn(&str) -> Option<&'a str>,
    ) -> Option<Self> {
        let failing: Vec<&TestOutcome> = outcomes
            .iter()
            .filter(|o| o.status != TestStatus::Pass)
            .collect();
        if failing.is_empty() {
            return None;
        }
        let failed = failing
            .iter()
            .map(|o| FailedTest {
                test_id: o.test_id.clone(),
                expected_excerpt: head_excerpt(expected(&o.test_id).unwrap_or(""), EXCERPT_BUDGET)
                    .to_string(),
                actual_excerpt: head_excerpt(&o.actual_output, EXCERPT_BUDGET).to_string(),
                failure_kind: FailureKind::of(o.status).expect("non-passing status"),
            })
            .collect();
        let stderr = failing
            .iter()
            .map(|o| o.stderr_tail.as_str())
            .find(|s| !s.trim().is_empty())
            .unwrap_or("");
        Some(Self {
            failed,
            stderr_tail: tail_excerpt(stderr, STDERR_BUDGET).to_string(),
        })
    }

    fn render_failed_tests(&self) -> String {
        let mut out = String::new();
        for f in &self.failed {
            let _ = write!(out, "- test {} ({})", f.test_id, f.failure_kind.as_str());
            if f.failure_kind == FailureKind::WrongOutput {
                let _ = write!(
                    out,
                    "\n  expected:\n```\n{}\n```\n  got:\n```\n{}\n```",
                    f.expected_excerpt.trim_end(),
                    f.actual_excerpt.trim_end()
                );
            }
            out.push('\n');
        }
        out.trim_end().to_string()
    }
}

/// Extends an RCI conversation with the failed candidate and a feedback turn.
pub fn append_feedback(
    conv: &Conversation,
    assistant_reply: &str,
    failures: &TestFailureSummary,
    template: &PromptTemplate,
) -> Result<Conversation, PromptError> {
    if conv.strategy != Strategy::Rci {
        return Err(PromptError::NotRci);
    }
    if failures.failed.is_empty() {
        return Err(PromptError::EmptyFeedback);
    }
    let failed_tests = failures.render_failed_tests();
    let stderr = if failures.stderr_tail.trim().is_empty() {
        "(none)"
    } else {
        failures.stderr_tail.trim_end()
    };
    let feedback = render(
        &template.feedback_text,
        &[("failed_tests", &failed_tests), ("stderr", stderr)],
    )?;
    let mut next = conv.clone();
    next.turns.push(Turn {
        role: Role::Assistant,
        content: assistant_reply.to_string(),
    });
    next.turns.push(Turn {
        role: Role::User,
        content: feedback,
    });
    next.attempt_index += 1;
    Ok(next)
}
