//! Text-completion endpoint client shared by the benchmark runner and the
//! remote step judge: JSON over HTTP POST, retries with exponential backoff,
//! and an on-disk response cache keyed by the SHA-256 of the prompt.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EndpointError {
    #[error("credential variable `{0}` is not set")]
    MissingCredential(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("endpoint returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("reply has no text at `{0}`")]
    MissingText(String),
    #[error("cache error: {0}")]
    Cache(String),
}

impl EndpointError {
    fn retryable(&self) -> bool {
        match self {
            EndpointError::Transport(_) => true,
            EndpointError::Status { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointConfig {
    pub url: String,
    pub model: String,
    pub max_tokens: u32,
    pub temperature: f64,
    /// JSON pointer to the reply text, e.g. `/choices/0/text`.
    pub text_pointer: String,
    /// Environment variable holding a bearer token.
    pub api_key_env: Option<String>,
    pub timeout_secs: u64,
    pub max_attempts: u32,
    pub backoff_ms: u64,
    pub cache_dir: Option<PathBuf>,
    /// Maximum requests in flight.
    pub concurrency: usize,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            url: String::new(),
            model: String::new(),
            max_tokens: 2048,
            temperature: 0.0,
            text_pointer: "/text".into(),
            api_key_env: None,
            timeout_secs: 120,
            max_attempts: 3,
            backoff_ms: 500,
            cache_dir: None,
            concurrency: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub latency_ms: u64,
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
    #[serde(skip)]
    pub cached: bool,
}

pub trait Completer: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<Completion, EndpointError>;
}

/// Runs every prompt through `completer` on the current rayon pool; results
/// keep input order.
pub fn complete_batch<C: Completer + ?Sized>(completer: &C, prompts: &[String]) -> Vec<Result<Completion, EndpointError>> {
    prompts.par_iter().map(|p| completer.complete(p)).collect()
}

pub fn prompt_digest(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, EndpointError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| EndpointError::Cache(format!("{}: {e}", dir.display())))?;
        Ok(ResponseCache { dir })
    }

    pub fn path_for(&self, prompt: &str) -> PathBuf {
        self.dir.join(format!("{}.json", prompt_digest(prompt)))
    }

    pub fn get(&self, prompt: &str) -> Option<Completion> {
        let raw = fs::read_to_string(self.path_for(prompt)).ok()?;
        let mut c: Completion = serde_json::from_str(&raw).ok()?;
        c.cached = true;
        Some(c)
    }

    pub fn put(&self, prompt: &str, c: &Completion) -> Result<(), EndpointError> {
        let path = self.path_for(prompt);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let body = serde_json::to_string(c).map_err(|e| EndpointError::Cache(e.to_string()))?;
        fs::write(&tmp, body)
            .and_then(|_| fs::rename(&tmp, &path))
            .map_err(|e| EndpointError::Cache(format!("{}: {e}", path.display())))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

/// Counting semaphore bounding requests in flight.
struct Permits {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Permits {
    fn acquire(&self) -> PermitGuard<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
        PermitGuard(self)
    }
}

struct PermitGuard<'a>(&'a Permits);

impl Drop for PermitGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

pub struct HttpCompleter {
    config: EndpointConfig,
    agent: ureq::Agent,
    cache: Option<ResponseCache>,
    permits: Permits,
    requests: AtomicU64,
}

impl HttpCompleter {
    pub fn new(config: EndpointConfig) -> Result<Self, EndpointError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs.max(1))))
            .http_status_as_error(false)
            .build()
            .into();
        let cache = config.cache_dir.as_ref().map(ResponseCache::new).transpose()?;
        Ok(HttpCompleter {
            permits: Permits {
                free: Mutex::new(config.concurrency.max(1)),
                cv: Condvar::new(),
            },
            config,
            agent,
            cache,
            requests: AtomicU64::new(0),
        })
    }

    /// Number of HTTP requests actually sent (cache hits excluded).
    pub fn network_requests(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }

    fn request_once(&self, prompt: &str, token: Option<&str>) -> Result<Completion, EndpointError> {
        let _permit = self.permits.acquire();
        self.requests.fetch_add(1, Ordering::SeqCst);
        let body = json!({
            "model": self.config.model,
            "prompt": prompt,
            "max_tokens": self.config.max_tokens,
            "temperature": self.config.temperature,
        });
        let mut req = self.agent.post(&self.config.url).header("Content-Type", "application/json");
        if let Some(t) = token {
            req = req.header("Authorization", format!("Bearer {t}"));
        }
        let started = Instant::now();
        let mut resp = req
            .send(serde_json::to_vec(&body).expect("request serializes"))
            .map_err(|e| EndpointError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| EndpointError::Transport(e.to_string()))?;
        let latency_ms = started.elapsed().as_millis() as u64;
        if !(200..300).contains(&status) {
            return Err(EndpointError::Status { status, body: text });
        }
        let reply: Value = serde_json::from_str(&text).map_err(|e| EndpointError::Transport(format!("bad json: {e}")))?;
        parse_reply(&reply, &self.config.text_pointer, latency_ms)
    }
}

/// Extracts the text (and token usage when present) from a reply body.
pub fn parse_reply(reply: &Value, pointer: &str, latency_ms: u64) -> Result<Completion, EndpointError> {
    let text = reply
        .pointer(pointer)
        .and_then(Value::as_str)
        .ok_or_else(|| EndpointError::MissingText(pointer.to_string()))?;
    let usage = |k: &str| reply.pointer(&format!("/usage/{k}")).and_then(Value::as_u64);
    Ok(Completion {
        text: text.to_string(),
        latency_ms,
        prompt_tokens: usage("prompt_tokens"),
        completion_tokens: usage("completion_tokens"),
        cached: false,
    })
}

impl Completer for HttpCompleter {
    fn complete(&self, prompt: &str) -> Result<Completion, EndpointError> {
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(prompt)) {
            return Ok(hit);
        }
        let token = match &self.config.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| EndpointError::MissingCredential(var.clone()))?),
            None => None,
        };
        let attempts = self.config.max_attempts.max(1);
        let mut last = None;
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(self.config.backoff_ms << (attempt - 1)));
            }
            match self.request_once(prompt, token.as_deref()) {
                Ok(c) => {
                    if let Some(cache) = &self.cache {
                        cache.put(prompt, &c)?;
                    }
                    return Ok(c);
                }
                Err(e) if e.retryable() => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_sha256_hex() {
        assert_eq!(
            prompt_digest("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn reply_pointer_and_usage() {
        let v = json!({"choices": [{"text": "true"}], "usage": {"prompt_tokens": 7, "completion_tokens": 1}});
        let c = parse_reply(&v, "/choices/0/text", 3).unwrap();
        assert_eq!(c.text, "true");
        assert_eq!(c.prompt_tokens, Some(7));
        assert!(matches!(parse_reply(&v, "/text", 0), Err(EndpointError::MissingText(_))));
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResponseCache::new(dir.path()).unwrap();
        assert!(cache.get("p").is_none());
        let c = Completion {
            text: "x".into(),
            latency_ms: 5,
            prompt_tokens: None,
            completion_tokens: Some(2),
            cached: false,
        };
        cache.put("p", &c).unwrap();
        let back = cache.get("p").unwrap();
        assert!(back.cached);
        assert_eq!(back.text, "x");
        assert_eq!(back.latency_ms, 5);
    }

    #[test]
    fn unreachable_endpoint_is_a_transport_error() {
        let cfg = EndpointConfig {
            url: "http://127.0.0.1:9/none".into(),
            max_attempts: 2,
            backoff_ms: 1,
            timeout_secs: 2,
            ..EndpointConfig::default()
        };
        let c = HttpCompleter::new(cfg).unwrap();
        assert!(matches!(c.complete("hi"), Err(EndpointError::Transport(_))));
        assert_eq!(c.network_requests(), 2);
    }
}
