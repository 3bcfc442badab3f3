//! Chat-completion clients: a scripted mock and an HTTP backend speaking the
//! common `/chat/completions` JSON shape.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub const DEFAULT_TEMPERATURE: f64 = 0.8;
pub const DEFAULT_TOP_P: f64 = 0.95;
pub const DEFAULT_MAX_TOKENS: u32 = 4096;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("transport failed after {attempts} attempts: {last}")]
    Transport { attempts: u32, last: String },
    #[error("endpoint returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response envelope: {0}")]
    Envelope(String),
    #[error("mock script exhausted (tags: {0})")]
    ScriptExhausted(String),
    #[error("call cap of {0} reached")]
    CallCap(u64),
    #[error("empty response")]
    EmptyResponse,
    #[error("mock script: {0}")]
    Script(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
    pub model: String,
    /// Routing keys for the mock, most specific first. Not sent on the wire.
    #[serde(default)]
    pub tags: Vec<String>,
}

impl CompletionRequest {
    pub fn user(content: impl Into<String>) -> Self {
        Self {
            messages: vec![Message {
                role: Role::User,
                content: content.into(),
            }],
            temperature: DEFAULT_TEMPERATURE,
            top_p: DEFAULT_TOP_P,
            max_tokens: DEFAULT_MAX_TOKENS,
            model: String::new(),
            tags: Vec::new(),
        }
    }

    pub fn tagged(mut self, tags: impl IntoIterator<Item = String>) -> Self {
        self.tags = tags.into_iter().collect();
        self
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.messages.is_empty() {
            return Err(LlmError::InvalidRequest("no messages".into()));
        }
        if !(self.temperature >= 0.0) {
            return Err(LlmError::InvalidRequest(format!(
                "temperature {} must be non-negative",
                self.temperature
            )));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(LlmError::InvalidRequest(format!("top_p {} outside (0, 1]", self.top_p)));
        }
        Ok(())
    }

    fn wire_body(&self) -> Value {
        json!({
            "model": self.model,
            "messages": self.messages,
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_tokens": self.max_tokens,
        })
    }
}

/// Sampling settings shared by every request of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestParams {
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
    pub model: String,
}

impl Default for RequestParams {
    fn default() -> Self {
        Self {
            temperature: DEFAULT_TEMPERATURE,
            top_p: DEFAULT_TOP_P,
            max_tokens: DEFAULT_MAX_TOKENS,
            model: String::new(),
        }
    }
}

impl RequestParams {
    pub fn request(&self, prompt: impl Into<String>, tags: Vec<String>) -> CompletionRequest {
        CompletionRequest {
            temperature: self.temperature,
            top_p: self.top_p,
            max_tokens: self.max_tokens,
            model: self.model.clone(),
            ..CompletionRequest::user(prompt)
        }
        .tagged(tags)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResponse {
    pub text: String,
    pub finish_reason: String,
    pub usage: Usage,
    pub latency: Duration,
}

pub trait LlmBackend: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, LlmError>;

    /// Resumable backend state (cursors, counters).
    fn snapshot(&self) -> Value {
        Value::Null
    }

    fn restore(&self, _state: &Value) -> Result<(), LlmError> {
        Ok(())
    }

    fn calls(&self) -> u64;
}

/// Scripted responses. A request is answered from the first of its tags
/// with a non-empty `keyed` queue, then from `sequence`, then from the first
/// of its tags with a `repeat` entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MockScript {
    #[serde(default)]
    pub sequence: Vec<String>,
    #[serde(default)]
    pub keyed: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub repeat: BTreeMap<String, String>,
}

impl MockScript {
    pub fn sequence<S: Into<String>>(items: impl IntoIterator<Item = S>) -> Self {
        Self {
            sequence: items.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Script(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| LlmError::Script(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
struct MockCursor {
    sequence: usize,
    keyed: BTreeMap<String, usize>,
    calls: u64,
}

#[derive(Debug)]
pub struct MockLlm {
    script: MockScript,
    cursor: Mutex<MockCursor>,
    log: Mutex<Vec<CompletionRequest>>,
}

impl MockLlm {
    pub fn new(script: MockScript) -> Self {
        Self {
            script,
            cursor: Mutex::new(MockCursor::default()),
            log: Mutex::new(Vec::new()),
        }
    }

    /// Requests seen so far, in call order.
    pub fn requests(&self) -> Vec<CompletionRequest> {
        self.log.lock().expect("mock log").clone()
    }

    fn next_text(&self, request: &CompletionRequest) -> Result<String, LlmError> {
        let mut cur = self.cursor.lock().expect("mock cursor");
        cur.calls += 1;
        for tag in &request.tags {
            if let Some(queue) = self.script.keyed.get(tag) {
                let pos = cur.keyed.entry(tag.clone()).or_insert(0);
                if *pos < queue.len() {
                    *pos += 1;
                    return Ok(queue[*pos - 1].clone());
                }
            }
        }
        if cur.sequence < self.script.sequence.len() {
            cur.sequence += 1;
            return Ok(self.script.sequence[cur.sequence - 1].clone());
        }
        for tag in &request.tags {
            if let Some(text) = self.script.repeat.get(tag) {
                return Ok(text.clone());
            }
        }
        Err(LlmError::ScriptExhausted(request.tags.join(", ")))
    }
}

impl LlmBackend for MockLlm {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        request.validate()?;
        self.log.lock().expect("mock log").push(request.clone());
        let text = self.next_text(request)?;
        Ok(CompletionResponse {
            usage: Usage {
                prompt_tokens: request.messages.iter().map(|m| m.content.len() as u64 / 4).sum(),
                completion_tokens: text.len() as u64 / 4,
            },
            text,
            finish_reason: "stop".into(),
            latency: Duration::ZERO,
        })
    }

    fn snapshot(&self) -> Value {
        serde_json::to_value(&*self.cursor.lock().expect("mock cursor")).expect("cursor serializes")
    }

    fn restore(&self, state: &Value) -> Result<(), LlmError> {
        if state.is_null() {
            return Ok(());
        }
        let cur: MockCursor =
            serde_json::from_value(state.clone()).map_err(|e| LlmError::Script(format!("cursor: {e}")))?;
        *self.cursor.lock().expect("mock cursor") = cur;
        Ok(())
    }

    fn calls(&self) -> u64 {
        self.cursor.lock().expect("mock cursor").calls
    }
}

/// One HTTP POST; returns status and body, or a transport error message.
pub trait Transport: Send + Sync {
    fn post(
        &self,
        url: &str,
        headers: &[(String, String)],
        body: &str,
        timeout: Duration,
    ) -> Result<(u16, String), String>;
}

pub struct UreqTransport;

impl Transport for UreqTransport {
    fn post(
        &self,
        url: &str,
        headers: &[(String, String)],
        body: &str,
        timeout: Duration,
    ) -> Result<(u16, String), String> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut req = agent.post(url).content_type("application/json");
        for (k, v) in headers {
            req = req.header(k.as_str(), v.as_str());
        }
        let mut resp = req.send(body).map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
        Ok((status, text))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiveConfig {
    /// Full chat-completions URL.
    pub endpoint: String,
    pub api_key: Option<String>,
    pub model: String,
    pub timeout: Duration,
    pub retries: u32,
    pub backoff_base: Duration,
    pub call_cap: Option<u64>,
}

impl Default for LiveConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://localhost:8000/v1/chat/completions".into(),
            api_key: None,
            model: String::new(),
            timeout: Duration::from_secs(300),
            retries: 3,
            backoff_base: Duration::from_millis(500),
            call_cap: None,
        }
    }
}

pub struct LiveLlm {
    cfg: LiveConfig,
    transport: Box<dyn Transport>,
    calls: Mutex<u64>,
}

impl LiveLlm {
    pub fn new(cfg: LiveConfig) -> Self {
        Self::with_transport(cfg, Box::new(UreqTransport))
    }

    pub fn with_transport(cfg: LiveConfig, transport: Box<dyn Transport>) -> Self {
        Self {
            cfg,
            transport,
            calls: Mutex::new(0),
        }
    }
}

fn parse_envelope(body: &str) -> Result<(String, String, Usage), LlmError> {
    let v: Value = serde_json::from_str(body).map_err(|e| LlmError::Envelope(e.to_string()))?;
    let choice = v
        .get("choices")
        .and_then(|c| c.get(0))
        .ok_or_else(|| LlmError::Envelope("missing choices[0]".into()))?;
    let text = choice
        .pointer("/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| LlmError::Envelope("missing choices[0].message.content".into()))?;
    let finish = choice
        .get("finish_reason")
        .and_then(Value::as_str)
        .unwrap_or("stop")
        .to_string();
    let usage = Usage {
        prompt_tokens: v.pointer("/usage/prompt_tokens").and_then(Value::as_u64).unwrap_or(0),
        completion_tokens: v.pointer("/usage/completion_tokens").and_then(Value::as_u64).unwrap_or(0),
    };
    Ok((text.to_string(), finish, usage))
}

impl LlmBackend for LiveLlm {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        request.validate()?;
        {
            let mut calls = self.calls.lock().expect("call counter");
            if let Some(cap) = self.cfg.call_cap {
                if *calls >= cap {
                    return Err(LlmError::CallCap(cap));
                }
            }
            *calls += 1;
        }
        let mut req = request.clone();
        if req.model.is_empty() {
            req.model = self.cfg.model.clone();
        }
        let body = req.wire_body().to_string();
        let mut headers = Vec::new();
        if let Some(key) = &self.cfg.api_key {
            headers.push(("Authorization".to_string(), format!("Bearer {key}")));
        }
        let started = Instant::now();
        let mut last = String::new();
        let attempts = self.cfg.retries.max(1);
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(self.cfg.backoff_base * 2u32.pow(attempt - 1));
            }
            match self.transport.post(&self.cfg.endpoint, &headers, &body, self.cfg.timeout) {
                Ok((200..=299, text)) => {
                    let (text, finish_reason, usage) = parse_envelope(&text)?;
                    return Ok(CompletionResponse {
                        text,
                        finish_reason,
                        usage,
                        latency: started.elapsed(),
                    });
                }
                Ok((status, text)) if status == 429 || status >= 500 => {
                    last = format!("status {status}: {}", text.chars().take(200).collect::<String>());
                }
                Ok((status, text)) => {
                    return Err(LlmError::Status {
                        status,
                        body: text.chars().take(500).collect(),
                    })
                }
                Err(e) => last = e,
            }
        }
        Err(LlmError::Transport { attempts, last })
    }

    fn snapshot(&self) -> Value {
        json!({ "calls": *self.calls.lock().expect("call counter") })
    }

    fn restore(&self, state: &Value) -> Result<(), LlmError> {
        if let Some(c) = state.get("calls").and_then(Value::as_u64) {
            *self.calls.lock().expect("call counter") = c;
        }
        Ok(())
    }

    fn calls(&self) -> u64 {
        *self.calls.lock().expect("call counter")
    }
}

/// First fenced block's body, or the whole text trimmed.
pub fn extract_code(text: &str) -> Result<String, LlmError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(LlmError::EmptyResponse);
    }
    if let Some(open) = trimmed.find("```") {
        let after = &trimmed[open + 3..];
        // skip the info string up to the end of the fence line
        let body_start = after.find('\n').map_or(after.len(), |i| i + 1);
        let body = &after[body_start..];
        if let Some(close) = body.find("```") {
            let code = body[..close].trim();
            if !code.is_empty() {
                return Ok(code.to_string());
            }
        }
    }
    Ok(trimmed.to_string())
}
