//! OpenAI-compatible chat-completion client.
//!
//! `POST {base_url}/chat/completions` with one user message whose content is
//! a text part followed by `image_url` parts carrying base64 data URIs.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::client::{Completion, CompletionRequest, ModelClient, ModelError, Usage};

/// Environment variable holding the bearer token.
pub const API_KEY_ENV: &str = "DWT_API_KEY";

#[derive(Debug, Clone)]
pub struct HttpClientConfig {
    pub base_url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
    /// Retries after a 429, a 5xx or a transport failure.
    pub max_retries: u32,
    /// First retry delay; doubles per retry unless the server sends Retry-After.
    pub backoff: Duration,
    /// Minimum spacing between request starts, shared by all callers.
    pub min_interval: Option<Duration>,
}

impl HttpClientConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> HttpClientConfig {
        HttpClientConfig {
            base_url: base_url.into(),
            model: model.into(),
            api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
            timeout: Duration::from_secs(300),
            max_retries: 3,
            backoff: Duration::from_secs(2),
            min_interval: None,
        }
    }
}

pub struct HttpClient {
    config: HttpClientConfig,
    agent: ureq::Agent,
    last_start: Mutex<Option<Instant>>,
}

const MAX_RETRY_AFTER: Duration = Duration::from_secs(60);

impl HttpClient {
    pub fn new(config: HttpClientConfig) -> HttpClient {
        let agent: ureq::Agent =
            ureq::Agent::config_builder().timeout_global(Some(config.timeout)).http_status_as_error(false).build().into();
        HttpClient { config, agent, last_start: Mutex::new(None) }
    }

    pub fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    pub fn request_body(&self, request: &CompletionRequest) -> Value {
        let mut content = vec![json!({"type": "text", "text": request.prompt})];
        for image in &request.images {
            content.push(json!({"type": "image_url", "image_url": {"url": image.data_uri()}}));
        }
        json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": content}],
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
        })
    }

    fn pace(&self) {
        let Some(interval) = self.config.min_interval else { return };
        let mut last = self.last_start.lock().expect("pace lock");
        if let Some(prev) = *last {
            let ready = prev + interval;
            let now = Instant::now();
            if ready > now {
                std::thread::sleep(ready - now);
            }
        }
        *last = Some(Instant::now());
    }

    fn attempt(&self, body: &Value) -> Result<Result<Completion, ModelError>, (ModelError, Option<Duration>)> {
        self.pace();
        let mut req = self.agent.post(&self.endpoint());
        if let Some(key) = &self.config.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = match req.send_json(body) {
            Ok(r) => r,
            Err(e) => return Err((ModelError::Transport(e.to_string()), None)),
        };
        let status = resp.status().as_u16();
        let retry_after = resp
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(|s| Duration::from_secs(s).min(MAX_RETRY_AFTER));
        let text = resp.body_mut().read_to_string().map_err(|e| (ModelError::Transport(e.to_string()), None))?;
        if status == 429 || status >= 500 {
            return Err((ModelError::Http { status, body: truncate(&text) }, retry_after));
        }
        if !(200..300).contains(&status) {
            return Ok(Err(ModelError::Http { status, body: truncate(&text) }));
        }
        Ok(parse_response(&text))
    }
}

fn truncate(text: &str) -> String {
    text.chars().take(500).collect()
}

/// Extracts text and usage from a chat-completion response body.
pub fn parse_response(body: &str) -> Result<Completion, ModelError> {
    let v: Value = serde_json::from_str(body).map_err(|e| ModelError::Malformed(e.to_string()))?;
    let message = v.pointer("/choices/0/message").ok_or_else(|| ModelError::Malformed("no choices[0].message".into()))?;
    if let Some(refusal) = message.get("refusal").and_then(Value::as_str) {
        return Err(ModelError::Refusal(refusal.to_string()));
    }
    let text = match message.get("content") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Array(parts)) => parts.iter().filter_map(|p| p.get("text").and_then(Value::as_str)).collect::<Vec<_>>().join(""),
        _ => String::new(),
    };
    if text.trim().is_empty() {
        return Err(ModelError::Refusal("empty content".into()));
    }
    let count = |key: &str| v.pointer(&format!("/usage/{key}")).and_then(Value::as_u64).unwrap_or(0);
    Ok(Completion { text, usage: Usage::new(count("prompt_tokens"), count("completion_tokens")) })
}

impl ModelClient for HttpClient {
    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ModelError> {
        let body = self.request_body(request);
        let mut delay = self.config.backoff;
        let mut retries = 0;
        loop {
            match self.attempt(&body) {
                Ok(result) => return result,
                Err((err, _)) if retries >= self.config.max_retries => return Err(err),
                Err((_, retry_after)) => {
                    std::thread::sleep(retry_after.unwrap_or(delay));
                    delay = delay.saturating_mul(2);
                    retries += 1;
                }
            }
        }
    }
}
