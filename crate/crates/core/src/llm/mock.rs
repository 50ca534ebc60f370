use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ChatModel, ModelError, ModelReply};
use crate::prompt::{Conversation, Role, Strategy};

/// One scripted reply. It answers every attempt from `attempt` upward until
/// a later entry for the same key takes over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockEntry {
    /// Sample id, or `*` for any sample without its own entries.
    pub sample_id: String,
    pub attempt: usize,
    #[serde(default)]
    pub reply: String,
    /// Restricts the entry to one strategy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    #[serde(default)]
    pub truncated: bool,
    /// Simulated transport failure instead of a reply.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Reply with the target code unchanged.
    #[serde(default)]
    pub echo: bool,
}

/// Deterministic scripted model keyed by `(sample_id, attempt)`.
#[derive(Debug, Clone, Default)]
pub struct MockModel {
    entries: HashMap<String, Vec<MockEntry>>,
    echo_unscripted: bool,
}

/// The last fenced block of the first user turn, which default templates
/// place after any exemplar.
fn target_code(conv: &Conversation) -> String {
    let Some(user) = conv.turns.iter().find(|t| t.role == Role::User) else {
        return String::new();
    };
    let lines: Vec<&str> = user.content.lines().collect();
    let fences: Vec<usize> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| l.trim_start().starts_with("```"))
        .map(|(i, _)| i)
        .collect();
    if fences.len() < 2 {
        return user.content.clone();
    }
    let (open, close) = (fences[fences.len() - 2], fences[fences.len() - 1]);
    let mut code = lines[open + 1..close].join("\n");
    code.push('\n');
    code
}

impl MockModel {
    /// Mock that echoes the target code for every request.
    pub fn echo() -> Self {
        Self {
            entries: HashMap::new(),
            echo_unscripted: true,
        }
    }

    pub fn from_entries(entries: impl IntoIterator<Item = MockEntry>) -> Self {
        let mut map: HashMap<String, Vec<MockEntry>> = HashMap::new();
        for e in entries {
            map.entry(e.sample_id.clone()).or_default().push(e);
        }
        for list in map.values_mut() {
            list.sort_by_key(|e| (e.attempt, e.strategy.is_some()));
        }
        Self {
            entries: map,
            echo_unscripted: false,
        }
    }

    /// Loads a JSON-lines fixture. Blank lines and `#` comments are skipped.
    pub fn from_file(path: &Path) -> Result<Self, ModelError> {
        let fixture_err = |message: String| ModelError::Fixture {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| fixture_err(e.to_string()))?;
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let entry: MockEntry = serde_json::from_str(line)
                .map_err(|e| fixture_err(format!("line {}: {e}", i + 1)))?;
            entries.push(entry);
        }
        Ok(Self::from_entries(entries))
    }

    pub fn with_echo_fallback(mut self, on: bool) -> Self {
        self.echo_unscripted = on;
        self
    }

    fn lookup(&self, sample_id: &str, strategy: Strategy, attempt: usize) -> Option<&MockEntry> {
        // Entries are sorted by (attempt, specific); the last eligible one
        // wins, so a strategy-specific entry beats a generic one.
        fn pick(list: &[MockEntry], strategy: Strategy, attempt: usize) -> Option<&MockEntry> {
            list.iter()
                .rev()
                .find(|e| e.attempt <= attempt && e.strategy.is_none_or(|s| s == strategy))
        }
        self.entries
            .get(sample_id)
            .and_then(|l| pick(l, strategy, attempt))
            .or_else(|| self.entries.get("*").and_then(|l| pick(l, strategy, attempt)))
    }
}

impl ChatModel for MockModel {
    fn chat_complete(&self, conv: &Conversation) -> Result<ModelReply, ModelError> {
        let entry = self.lookup(&conv.sample_id, conv.strategy, conv.attempt_index);
        let (text, truncated) = match entry {
            Some(e) => {
                if let Some(err) = &e.error {
                    return Err(ModelError::Transport(err.clone()));
                }
                if e.echo {
                    (format!("```python\n{}```", target_code(conv)), e.truncated)
                } else {
                    (e.reply.clone(), e.truncated)
                }
            }
            None if self.echo_unscripted => (format!("```python\n{}```", target_code(conv)), false),
            None => {
                return Err(ModelError::NoScript {
                    sample_id: conv.sample_id.clone(),
                    attempt: conv.attempt_index,
                })
            }
        };
        Ok(ModelReply {
            raw_text: text,
            latency_ms: 0,
            token_usage: None,
            truncated,
        })
    }
}
