//! Blocking chat-completion client: message list in, assistant text out.
//!
//! Credentials never appear in config files; the config names an
//! environment variable and the key is read from the process environment
//! at call time. A named variable that is unset or empty fails before any
//! network traffic. Transient failures (HTTP 429, 5xx, timeouts,
//! connection drops) are retried with exponential backoff; anything else
//! surfaces immediately.

use crate::AgentError;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage { role: ChatRole::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: ChatRole::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: ChatRole::Assistant, content: content.into() }
    }
}

/// Where and how to call one endpoint. `auth_env_var` names the variable
/// holding the key; an empty name means the endpoint needs no auth header
/// (local stubs). The key itself has no field here by design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChatEndpointConfig {
    /// API root; the client appends `/chat/completions`.
    pub base_url: String,
    pub model_name: String,
    pub auth_env_var: String,
    pub timeout_ms: u64,
    /// Extra attempts after the first, spent only on transient failures.
    pub max_retries: u32,
    /// Sliding-window request budget; 0 disables client-side limiting.
    pub rate_limit_per_min: u32,
    /// First backoff delay; doubles per retry.
    pub backoff_ms: u64,
    pub temperature: f64,
    pub top_p: Option<f64>,
    pub max_tokens: Option<u32>,
}

impl Default for ChatEndpointConfig {
    fn default() -> Self {
        ChatEndpointConfig {
            base_url: "http://127.0.0.1:8080".to_string(),
            model_name: "unnamed-model".to_string(),
            auth_env_var: String::new(),
            timeout_ms: 60_000,
            max_retries: 3,
            rate_limit_per_min: 0,
            backoff_ms: 250,
            temperature: 0.7,
            top_p: None,
            max_tokens: None,
        }
    }
}

/// Sliding-window limiter shared across clones of a client.
#[derive(Debug)]
struct RateLimiter {
    capacity: u32,
    window: Duration,
    sent: Mutex<VecDeque<Instant>>,
}

impl RateLimiter {
    fn new(capacity: u32, window: Duration) -> Self {
        RateLimiter { capacity, window, sent: Mutex::new(VecDeque::new()) }
    }

    /// Blocks until a request slot is free, then claims it.
    fn acquire(&self) {
        if self.capacity == 0 {
            return;
        }
        loop {
            let wait = {
                let mut sent = self.sent.lock().expect("limiter lock");
                let now = Instant::now();
                while sent.front().is_some_and(|t| now.duration_since(*t) >= self.window) {
                    sent.pop_front();
                }
                if (sent.len() as u32) < self.capacity {
                    sent.push_back(now);
                    None
                } else {
                    let oldest = *sent.front().expect("nonempty at capacity");
                    Some(self.window.saturating_sub(now.duration_since(oldest)))
                }
            };
            match wait {
                None => return,
                // Re-check in short steps; another clone may free a slot view.
                Some(d) => std::thread::sleep(d.min(Duration::from_millis(25)).max(
                    Duration::from_millis(1),
                )),
            }
        }
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    top_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_tokens: Option<u32>,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: AssistantMessage,
}

#[derive(Deserialize)]
struct AssistantMessage {
    content: String,
}

/// Thread-safe endpoint client. Clones share the HTTP pool, the rate
/// limiter, and the retry counters.
#[derive(Debug, Clone)]
pub struct ChatClient {
    config: ChatEndpointConfig,
    http: reqwest::blocking::Client,
    limiter: Arc<RateLimiter>,
    last_retries: Arc<AtomicU32>,
    total_retries: Arc<AtomicU32>,
}

impl ChatClient {
    pub fn new(config: ChatEndpointConfig) -> Result<Self, AgentError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| AgentError::Transport { detail: e.to_string() })?;
        let limiter =
            Arc::new(RateLimiter::new(config.rate_limit_per_min, Duration::from_secs(60)));
        Ok(ChatClient {
            config,
            http,
            limiter,
            last_retries: Arc::new(AtomicU32::new(0)),
            total_retries: Arc::new(AtomicU32::new(0)),
        })
    }

    pub fn config(&self) -> &ChatEndpointConfig {
        &self.config
    }

    pub fn endpoint_url(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    /// Retries spent on the most recent `complete` call.
    pub fn last_retries(&self) -> u32 {
        self.last_retries.load(Ordering::Relaxed)
    }

    /// Retries spent across the client's lifetime (all clones).
    pub fn total_retries(&self) -> u32 {
        self.total_retries.load(Ordering::Relaxed)
    }

    /// Reads the key from the environment, failing before any network
    /// traffic when the named variable is unset or empty.
    fn bearer_key(&self) -> Result<Option<String>, AgentError> {
        let var = self.config.auth_env_var.trim();
        if var.is_empty() {
            return Ok(None);
        }
        match std::env::var(var) {
            Ok(v) if !v.trim().is_empty() => Ok(Some(v)),
            _ => Err(AgentError::AuthMissing { var: var.to_string() }),
        }
    }

    /// Sends the message list and returns the assistant's text.
    pub fn complete(&self, messages: &[ChatMessage]) -> Result<String, AgentError> {
        let key = self.bearer_key()?;
        let url = self.endpoint_url();
        let body = CompletionRequest {
            model: &self.config.model_name,
            messages,
            temperature: self.config.temperature,
            top_p: self.config.top_p,
            max_tokens: self.config.max_tokens,
        };

        let mut retries = 0u32;
        self.last_retries.store(0, Ordering::Relaxed);
        loop {
            self.limiter.acquire();
            let mut request = self.http.post(&url).json(&body);
            if let Some(k) = &key {
                request = request.bearer_auth(k);
            }
            let fault = match request.send() {
                Ok(resp) => {
                    let status = resp.status().as_u16();
                    if (200..300).contains(&status) {
                        return self.extract_text(resp);
                    }
                    let detail = resp.text().unwrap_or_default();
                    let fault = AgentError::Http { status, detail };
                    if status == 429 || (500..=599).contains(&status) {
                        fault
                    } else {
                        return Err(fault);
                    }
                }
                Err(e) if e.is_timeout() => {
                    AgentError::Timeout { after_ms: self.config.timeout_ms }
                }
                Err(e) => AgentError::Transport { detail: e.to_string() },
            };

            if retries >= self.config.max_retries {
                return Err(match fault {
                    AgentError::Http { status: 429, .. } => {
                        AgentError::RateLimited { attempts: retries + 1 }
                    }
                    other => other,
                });
            }
            let delay = self.config.backoff_ms.saturating_mul(1 << retries.min(16));
            std::thread::sleep(Duration::from_millis(delay));
            retries += 1;
            self.last_retries.store(retries, Ordering::Relaxed);
            self.total_retries.fetch_add(1, Ordering::Relaxed);
        }
    }

    fn extract_text(&self, resp: reqwest::blocking::Response) -> Result<String, AgentError> {
        let parsed: CompletionResponse = resp
            .json()
            .map_err(|e| AgentError::MalformedResponse { detail: e.to_string() })?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| AgentError::MalformedResponse {
                detail: "response carried no choices".to_string(),
            })
    }
}
