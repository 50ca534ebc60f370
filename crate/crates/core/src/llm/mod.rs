//! Chat-completion clients: an HTTP client for OpenAI-style endpoints and a
//! scripted mock, plus code extraction from replies.

mod http;
mod mock;

pub use http::HttpModel;
pub use mock::{MockEntry, MockModel};

use serde::{Deserialize, Serialize};

use crate::prompt::Conversation;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("endpoint returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed response: {0}")]
    Protocol(String),
    #[error("auth token variable {0} is not set")]
    MissingToken(String),
    #[error("mock has no reply for sample {sample_id} attempt {attempt}")]
    NoScript { sample_id: String, attempt: usize },
    #[error("mock fixture {path}: {message}")]
    Fixture { path: String, message: String },
    #[error("invalid model config: {0}")]
    Config(String),
}

fn default_temperature() -> f64 {
    0.2
}
fn default_max_tokens() -> u32 {
    2048
}
fn default_timeout() -> f64 {
    120.0
}
fn default_retries() -> u32 {
    2
}
fn default_concurrency() -> usize {
    4
}
fn default_backoff() -> u64 {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Model id sent to the endpoint.
    pub model_name: String,
    /// Label used in approach names; defaults to `model_name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub display_name: Option<String>,
    #[serde(default)]
    pub endpoint_url: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_timeout")]
    pub request_timeout_s: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// Name of the environment variable holding a bearer token.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_env: Option<String>,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    /// Base delay before the first retry; doubles per retry.
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
    /// Scripted mock fixture. When set, no HTTP requests are made.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mock: Option<std::path::PathBuf>,
}

impl ModelConfig {
    pub fn new(model_name: impl Into<String>, endpoint_url: impl Into<String>) -> Self {
        Self {
            model_name: model_name.into(),
            display_name: None,
            endpoint_url: endpoint_url.into(),
            temperature: default_temperature(),
            max_tokens: default_max_tokens(),
            request_timeout_s: default_timeout(),
            max_retries: default_retries(),
            auth_env: None,
            concurrency: default_concurrency(),
            backoff_ms: default_backoff(),
            mock: None,
        }
    }

    pub fn label(&self) -> &str {
        self.display_name.as_deref().unwrap_or(&self.model_name)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.model_name.trim().is_empty() {
            return Err(ModelError::Config("model_name is empty".into()));
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(ModelError::Config(format!(
                "{}: temperature must be >= 0",
                self.model_name
            )));
        }
        if self.request_timeout_s.is_nan() || self.request_timeout_s <= 0.0 {
            return Err(ModelError::Config(format!(
                "{}: request_timeout_s must be > 0",
                self.model_name
            )));
        }
        if self.concurrency == 0 {
            return Err(ModelError::Config(format!(
                "{}: concurrency must be >= 1",
                self.model_name
            )));
        }
        if self.mock.is_none() && self.endpoint_url.trim().is_empty() {
            return Err(ModelError::Config(format!(
                "{}: endpoint_url is required without a mock fixture",
                self.model_name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReply {
    pub raw_text: String,
    pub latency_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_usage: Option<TokenUsage>,
    pub truncated: bool,
}

/// Anything that can answer a conversation. Implementations are shared
/// across worker threads.
pub trait ChatModel: Send + Sync {
    fn chat_complete(&self, conv: &Conversation) -> Result<ModelReply, ModelError>;
}

/// Builds the client described by `cfg`: the mock when a fixture is set,
/// the HTTP client otherwise.
pub fn connect(cfg: &ModelConfig) -> Result<Box<dyn ChatModel>, ModelError> {
    cfg.validate()?;
    match &cfg.mock {
        Some(path) => Ok(Box::new(MockModel::from_file(path)?)),
        None => Ok(Box::new(HttpModel::new(cfg.clone())?)),
    }
}

fn is_fence(line: &str) -> bool {
    line.trim_start().starts_with("```")
}

fn trim_blank_lines(lines: &[&str]) -> String {
    let first = lines.iter().position(|l| !l.trim().is_empty());
    let last = lines.iter().rposition(|l| !l.trim().is_empty());
    match (first, last) {
        (Some(a), Some(b)) => {
            let mut out = lines[a..=b].join("\n");
            out.push('\n');
            out
        }
        _ => String::new(),
    }
}

/// Candidate source from a model reply: the first fenced block if there is
/// one (an unterminated fence runs to the end), otherwise the whole reply.
/// Leading and trailing blank lines are dropped.
pub fn extract_code(reply: &str) -> String {
    let lines: Vec<&str> = reply.lines().collect();
    match lines.iter().position(|l| is_fence(l)) {
        Some(open) => {
            let body = &lines[open + 1..];
            let close = body.iter().position(|l| is_fence(l)).unwrap_or(body.len());
            trim_blank_lines(&body[..close])
        }
        None => trim_blank_lines(&lines),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bare_code_is_unchanged() {
        let code = "x = int(input())\nprint(x * 2)\n";
        assert_eq!(extract_code(code), code);
        assert_eq!(extract_code(&format!("\n\n{code}\n\n")), code);
    }

    #[test]
    fn prose_and_single_block() {
        let reply = "Here you go:\n```python\ndef f():\n    return 1\n```\nHope it helps.";
        assert_eq!(extract_code(reply), "def f():\n    return 1\n");
    }

    #[test]
    fn first_of_two_blocks() {
        let reply = "```python\na = 1\n```\ntext\n```\nb = 2\n```\n";
        assert_eq!(extract_code(reply), "a = 1\n");
    }

    #[test]
    fn unterminated_fence_runs_to_end() {
        assert_eq!(extract_code("```python\nprint(1)\nprint("), "print(1)\nprint(\n");
    }

    #[test]
    fn empty_reply_extracts_nothing() {
        assert_eq!(extract_code(""), "");
        assert_eq!(extract_code("```\n\n```"), "");
    }

    #[test]
    fn config_validation() {
        let mut cfg = ModelConfig::new("m", "http://localhost:1");
        assert!(cfg.validate().is_ok());
        cfg.temperature = -0.1;
        assert!(cfg.validate().is_err());
        cfg.temperature = 0.0;
        cfg.request_timeout_s = 0.0;
        assert!(cfg.validate().is_err());
    }

    proptest! {
        #[test]
        fn extract_is_idempotent(s in "(```(python)?\n|[a-z =()]{0,12}\n|\n| {0,4}```\n){0,10}") {
            let once = extract_code(&s);
            prop_assert_eq!(extract_code(&once), once);
        }
    }
}
