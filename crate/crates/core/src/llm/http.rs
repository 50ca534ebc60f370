use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::{ChatModel, ModelConfig, ModelError, ModelReply, TokenUsage};
use crate::prompt::{Conversation, Role};

/// Counting semaphore bounding in-flight requests.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

/// Client for an endpoint speaking the chat-completions protocol.
pub struct HttpModel {
    cfg: ModelConfig,
    client: reqwest::blocking::Client,
    gate: Gate,
}

enum Failure {
    Retryable(ModelError),
    Fatal(ModelError),
}

impl HttpModel {
    pub fn new(cfg: ModelConfig) -> Result<Self, ModelError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(cfg.request_timeout_s))
            .build()
            .map_err(|e| ModelError::Transport(e.to_string()))?;
        let gate = Gate::new(cfg.concurrency.max(1));
        Ok(Self { cfg, client, gate })
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.cfg.endpoint_url.trim_end_matches('/'))
    }

    fn body(&self, conv: &Conversation) -> Value {
        let messages: Vec<Value> = conv
            .turns
            .iter()
            .map(|t| {
                let role = match t.role {
                    Role::System => "system",
                    Role::User => "user",
                    Role::Assistant => "assistant",
                };
                json!({ "role": role, "content": t.content })
            })
            .collect();
        json!({
            "model": self.cfg.model_name,
            "messages": messages,
            "temperature": self.cfg.temperature,
            "max_tokens": self.cfg.max_tokens,
        })
    }

    fn token(&self) -> Result<Option<String>, ModelError> {
        match &self.cfg.auth_env {
            None => Ok(None),
            Some(var) => std::env::var(var)
                .map(Some)
                .map_err(|_| ModelError::MissingToken(var.clone())),
        }
    }

    fn send_once(&self, body: &Value, token: Option<&str>) -> Result<ModelReply, Failure> {
        let started = Instant::now();
        let mut req = self.client.post(self.url()).json(body);
        if let Some(token) = token {
            req = req.bearer_auth(token);
        }
        let resp = req
            .send()
            .map_err(|e| Failure::Retryable(ModelError::Transport(e.to_string())))?;
        let status = resp.status();
        let text = resp
            .text()
            .map_err(|e| Failure::Retryable(ModelError::Transport(e.to_string())))?;
        if !status.is_success() {
            let err = ModelError::Http {
                status: status.as_u16(),
                body: text.chars().take(200).collect(),
            };
            return Err(if status.is_server_error() || status.as_u16() == 429 {
                Failure::Retryable(err)
            } else {
                Failure::Fatal(err)
            });
        }
        let latency_ms = started.elapsed().as_millis() as u64;
        parse_response(&text, latency_ms).map_err(Failure::Fatal)
    }
}

fn parse_response(text: &str, latency_ms: u64) -> Result<ModelReply, ModelError> {
    let v: Value = serde_json::from_str(text).map_err(|e| ModelError::Protocol(e.to_string()))?;
    let choice = v
        .get("choices")
        .and_then(|c| c.get(0))
        .ok_or_else(|| ModelError::Protocol("no choices in response".into()))?;
    let content = choice
        .pointer("/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| ModelError::Protocol("choices[0].message.content missing".into()))?;
    let truncated = choice.get("finish_reason").and_then(Value::as_str) == Some("length");
    let token_usage = v.get("usage").and_then(|u| {
        Some(TokenUsage {
            prompt_tokens: u.get("prompt_tokens")?.as_u64()?,
            completion_tokens: u.get("completion_tokens")?.as_u64()?,
        })
    });
    Ok(ModelReply {
        raw_text: content.to_string(),
        latency_ms,
        token_usage,
        truncated,
    })
}

impl ChatModel for HttpModel {
    fn chat_complete(&self, conv: &Conversation) -> Result<ModelReply, ModelError> {
        let token = self.token()?;
        let body = self.body(conv);
        let _permit = self.gate.acquire();
        let mut attempt = 0u32;
        loop {
            match self.send_once(&body, token.as_deref()) {
                Ok(reply) => return Ok(reply),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable(e)) => {
                    if attempt >= self.cfg.max_retries {
                        return Err(e);
                    }
                    log::warn!("{}: {e}; retrying", self.cfg.model_name);
                    let delay = self.cfg.backoff_ms.saturating_mul(1 << attempt.min(16));
                    std::thread::sleep(Duration::from_millis(delay));
                    attempt += 1;
                }
            }
        }
    }
}
