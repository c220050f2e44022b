//! Chat-completion backend over HTTP(S).
//!
//! `BTXP_LLM_ENDPOINT` is the full completion URL, for example
//! `https://api.openai.com/v1/chat/completions`; `BTXP_LLM_API_KEY` is sent as
//! a bearer token. The request carries `model`, `temperature` and a single
//! user message holding the prompt.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use btxp_core::llm::{Backend, BackendError, CompletionSettings};
use serde_json::{json, Value};

pub const ENDPOINT_VAR: &str = "BTXP_LLM_ENDPOINT";
pub const API_KEY_VAR: &str = "BTXP_LLM_API_KEY";

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub api_key: String,
    pub model: String,
    pub temperature: f32,
    /// Attempts per call; only transport errors are retried.
    pub max_attempts: u32,
    pub initial_backoff: Duration,
    pub timeout: Duration,
    pub max_in_flight: usize,
}

impl RemoteConfig {
    /// Reads endpoint and key from the environment.
    pub fn from_env(model: &str) -> Result<Self, BackendError> {
        let get = |var: &str| {
            std::env::var(var)
                .ok()
                .filter(|v| !v.trim().is_empty())
                .ok_or_else(|| BackendError::Unavailable(format!("{var} is not set")))
        };
        Ok(RemoteConfig::new(&get(ENDPOINT_VAR)?, &get(API_KEY_VAR)?, model))
    }

    pub fn new(endpoint: &str, api_key: &str, model: &str) -> Self {
        RemoteConfig {
            endpoint: endpoint.to_string(),
            api_key: api_key.to_string(),
            model: model.to_string(),
            temperature: 0.0,
            max_attempts: 3,
            initial_backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(120),
            max_in_flight: 4,
        }
    }
}

struct Gate {
    busy: Mutex<usize>,
    freed: Condvar,
    limit: usize,
}

impl Gate {
    fn enter(&self) -> GateGuard<'_> {
        let mut n = self.busy.lock().unwrap_or_else(|e| e.into_inner());
        while *n >= self.limit {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n += 1;
        GateGuard(self)
    }
}

struct GateGuard<'a>(&'a Gate);

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.0.busy.lock().unwrap_or_else(|e| e.into_inner()) -= 1;
        self.0.freed.notify_one();
    }
}

pub struct RemoteBackend {
    config: RemoteConfig,
    agent: ureq::Agent,
    gate: Gate,
    audit: Option<Mutex<PathBuf>>,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
        let gate = Gate {
            busy: Mutex::new(0),
            freed: Condvar::new(),
            limit: config.max_in_flight.max(1),
        };
        RemoteBackend {
            config,
            agent,
            gate,
            audit: None,
        }
    }

    /// Appends every exchange to `path` as one JSON line.
    pub fn with_audit_log(mut self, path: PathBuf) -> Self {
        self.audit = Some(Mutex::new(path));
        self
    }

    pub fn model(&self) -> &str {
        &self.config.model
    }

    fn request(&self, prompt: &str, settings: &CompletionSettings) -> Value {
        let model = if settings.model.is_empty() {
            &self.config.model
        } else {
            &settings.model
        };
        json!({
            "model": model,
            "temperature": settings.temperature,
            "messages": [{ "role": "user", "content": prompt }],
        })
    }

    fn once(&self, body: &Value) -> Result<String, Attempt> {
        let resp = self
            .agent
            .post(&self.config.endpoint)
            .set("Authorization", &format!("Bearer {}", self.config.api_key))
            .send_json(body.clone());
        match resp {
            Ok(r) => {
                let v: Value = r
                    .into_json()
                    .map_err(|e| Attempt::Fatal(BackendError::Transport(format!("unreadable body: {e}"))))?;
                v.pointer("/choices/0/message/content")
                    .and_then(Value::as_str)
                    .map(str::to_string)
                    .ok_or_else(|| Attempt::Fatal(BackendError::Transport("response has no message content".into())))
            }
            Err(ureq::Error::Status(429, r)) => Err(Attempt::Fatal(BackendError::RateLimited {
                retry_after_secs: r.header("retry-after").and_then(|h| h.trim().parse().ok()),
            })),
            Err(ureq::Error::Status(code @ (401 | 403), _)) => {
                Err(Attempt::Fatal(BackendError::Unavailable(format!("endpoint refused the key ({code})"))))
            }
            Err(ureq::Error::Status(code, r)) => {
                let text = r.into_string().unwrap_or_default();
                Err(Attempt::Fatal(BackendError::Transport(format!("status {code}: {}", text.trim()))))
            }
            Err(ureq::Error::Transport(t)) => Err(Attempt::Retry(t.to_string())),
        }
    }

    fn log(&self, settings: &CompletionSettings, prompt: &str, outcome: &Result<String, BackendError>) {
        let Some(path) = &self.audit else { return };
        let path = path.lock().unwrap_or_else(|e| e.into_inner());
        let line = json!({
            "role": settings.role.key(),
            "scenario": settings.scenario,
            "model": if settings.model.is_empty() { &self.config.model } else { &settings.model },
            "prompt": prompt,
            "response": outcome.as_ref().ok(),
            "error": outcome.as_ref().err().map(|e| e.to_string()),
        });
        let written = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&*path)
            .and_then(|mut f| writeln!(f, "{line}"));
        if let Err(e) = written {
            log::warn!("cannot append to audit log {}: {e}", path.display());
        }
    }
}

enum Attempt {
    Retry(String),
    Fatal(BackendError),
}

impl Backend for RemoteBackend {
    fn complete(&self, prompt: &str, settings: &CompletionSettings) -> Result<String, BackendError> {
        let body = self.request(prompt, settings);
        let _slot = self.gate.enter();
        let mut delay = self.config.initial_backoff;
        let mut attempt = 1;
        let outcome = loop {
            match self.once(&body) {
                Ok(text) => break Ok(text),
                Err(Attempt::Fatal(e)) => break Err(e),
                Err(Attempt::Retry(msg)) if attempt >= self.config.max_attempts => {
                    break Err(BackendError::Transport(msg))
                }
                Err(Attempt::Retry(msg)) => {
                    log::warn!("attempt {attempt} failed: {msg}; retrying in {delay:?}");
                    std::thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
            }
        };
        self.log(settings, prompt, &outcome);
        outcome
    }
}
