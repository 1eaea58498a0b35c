use std::collections::VecDeque;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::image::InputDiagram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl Usage {
    pub fn new(prompt_tokens: u64, completion_tokens: u64) -> Usage {
        Usage { prompt_tokens, completion_tokens }
    }

    pub fn total(&self) -> u64 {
        self.prompt_tokens + self.completion_tokens
    }
}

impl std::ops::AddAssign for Usage {
    fn add_assign(&mut self, rhs: Usage) {
        self.prompt_tokens += rhs.prompt_tokens;
        self.completion_tokens += rhs.completion_tokens;
    }
}

impl std::iter::Sum for Usage {
    fn sum<I: Iterator<Item = Usage>>(iter: I) -> Usage {
        iter.fold(Usage::default(), |mut acc, u| {
            acc += u;
            acc
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub prompt: String,
    pub images: Vec<InputDiagram>,
    pub max_tokens: u32,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    #[serde(default)]
    pub usage: Usage,
}

impl Completion {
    pub fn new(text: impl Into<String>, usage: Usage) -> Completion {
        Completion { text: text.into(), usage }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("endpoint returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("model refused or returned no content: {0}")]
    Refusal(String),
    #[error("malformed endpoint response: {0}")]
    Malformed(String),
    #[error("scripted client has no responses left")]
    ScriptExhausted,
}

/// A multimodal completion endpoint. Implementations keep no conversation
/// state between calls and must tolerate concurrent use.
pub trait ModelClient: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ModelError>;
}

impl<T: ModelClient + ?Sized> ModelClient for &T {
    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ModelError> {
        (**self).complete(request)
    }
}

/// Replays canned completions in order and records every request.
#[derive(Debug, Default)]
pub struct ScriptedClient {
    queue: Mutex<VecDeque<Completion>>,
    log: Mutex<Vec<CompletionRequest>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScriptFile {
    responses: Vec<Completion>,
}

impl ScriptedClient {
    pub fn new(responses: impl IntoIterator<Item = Completion>) -> ScriptedClient {
        ScriptedClient { queue: Mutex::new(responses.into_iter().collect()), log: Mutex::new(Vec::new()) }
    }

    /// Responses with a fixed usage of 100 prompt and 50 completion tokens.
    pub fn from_texts<S: Into<String>>(texts: impl IntoIterator<Item = S>) -> ScriptedClient {
        ScriptedClient::new(texts.into_iter().map(|t| Completion::new(t, Usage::new(100, 50))))
    }

    /// Loads `{"responses": [{"text": ..., "usage": {...}}]}`.
    pub fn load(path: &Path) -> std::io::Result<ScriptedClient> {
        let text = std::fs::read_to_string(path)?;
        let script: ScriptFile = serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        Ok(ScriptedClient::new(script.responses))
    }

    pub fn requests(&self) -> Vec<CompletionRequest> {
        self.log.lock().expect("log lock").clone()
    }

    pub fn call_count(&self) -> usize {
        self.log.lock().expect("log lock").len()
    }

    pub fn remaining(&self) -> usize {
        self.queue.lock().expect("queue lock").len()
    }
}

impl ModelClient for ScriptedClient {
    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ModelError> {
        self.log.lock().expect("log lock").push(request.clone());
        self.queue.lock().expect("queue lock").pop_front().ok_or(ModelError::ScriptExhausted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request() -> CompletionRequest {
        CompletionRequest { prompt: "p".into(), images: vec![], max_tokens: 10, temperature: 0.0 }
    }

    #[test]
    fn replays_in_order_then_exhausts() {
        let client = ScriptedClient::from_texts(["a", "b"]);
        assert_eq!(client.complete(&request()).unwrap().text, "a");
        assert_eq!(client.complete(&request()).unwrap().text, "b");
        assert_eq!(client.complete(&request()), Err(ModelError::ScriptExhausted));
        assert_eq!(client.call_count(), 3);
    }

    #[test]
    fn usage_sums() {
        let total: Usage = [Usage::new(1, 2), Usage::new(10, 20)].into_iter().sum();
        assert_eq!(total, Usage::new(11, 22));
        assert_eq!(total.total(), 33);
    }
}
