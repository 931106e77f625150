use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde_json::{json, Value};

use super::{ChatClient, ChatRequest, GatewayError, Limiter, UsageCounter, UsageStats};
use crate::config::LlmSettings;

/// OpenAI-compatible `POST {endpoint}/chat/completions` client.
///
/// Retries timeouts, connection failures, 429 and 5xx with exponential
/// backoff (honoring `Retry-After` when present). Authentication failures
/// are returned immediately.
pub struct HttpChatClient {
    http: reqwest::blocking::Client,
    url: String,
    api_key: Option<String>,
    max_attempts: u32,
    backoff_base: Duration,
    backoff_max: Duration,
    limiter: Limiter,
    journal: Option<Mutex<File>>,
    usage: UsageCounter,
}

pub struct HttpChatClientBuilder {
    endpoint: String,
    api_key: Option<String>,
    max_attempts: u32,
    backoff_base: Duration,
    backoff_max: Duration,
    deadline: Duration,
    max_in_flight: usize,
    journal: Option<String>,
}

impl HttpChatClientBuilder {
    pub fn new(endpoint: impl Into<String>) -> Self {
        let d = LlmSettings::default();
        HttpChatClientBuilder {
            endpoint: endpoint.into(),
            api_key: None,
            max_attempts: d.max_attempts,
            backoff_base: Duration::from_millis(d.backoff_base_ms),
            backoff_max: Duration::from_millis(d.backoff_max_ms),
            deadline: Duration::from_secs_f64(d.deadline_s),
            max_in_flight: d.max_in_flight,
            journal: None,
        }
    }

    pub fn api_key(mut self, key: Option<String>) -> Self {
        self.api_key = key;
        self
    }

    pub fn max_attempts(mut self, n: u32) -> Self {
        self.max_attempts = n.max(1);
        self
    }

    pub fn backoff(mut self, base: Duration, max: Duration) -> Self {
        self.backoff_base = base;
        self.backoff_max = max;
        self
    }

    pub fn deadline(mut self, d: Duration) -> Self {
        self.deadline = d;
        self
    }

    pub fn max_in_flight(mut self, n: usize) -> Self {
        self.max_in_flight = n;
        self
    }

    pub fn journal(mut self, path: Option<String>) -> Self {
        self.journal = path;
        self
    }

    pub fn build(self) -> Result<HttpChatClient, GatewayError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(self.deadline)
            .build()
            .map_err(|e| GatewayError::Transport(e.to_string()))?;
        let journal = match &self.journal {
            Some(p) => Some(Mutex::new(open_journal(Path::new(p))?)),
            None => None,
        };
        Ok(HttpChatClient {
            http,
            url: format!("{}/chat/completions", self.endpoint.trim_end_matches('/')),
            api_key: self.api_key,
            max_attempts: self.max_attempts,
            backoff_base: self.backoff_base,
            backoff_max: self.backoff_max,
            limiter: Limiter::new(self.max_in_flight),
            journal,
            usage: UsageCounter::default(),
        })
    }
}

fn open_journal(path: &Path) -> Result<File, GatewayError> {
    OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| GatewayError::Transport(format!("cannot open journal {}: {e}", path.display())))
}

enum Attempt {
    Done(String, u64, u64),
    Retry(GatewayError, Option<Duration>),
    Fail(GatewayError),
}

impl HttpChatClient {
    pub fn builder(endpoint: impl Into<String>) -> HttpChatClientBuilder {
        HttpChatClientBuilder::new(endpoint)
    }

    /// Builds a client from settings, reading the credential from the
    /// configured environment variable. A missing endpoint or credential is
    /// an error here, before any request is made.
    pub fn from_settings(settings: &LlmSettings) -> Result<HttpChatClient, GatewayError> {
        let endpoint = settings
            .endpoint
            .clone()
            .ok_or_else(|| GatewayError::InvalidRequest("no chat endpoint configured".into()))?;
        let key = std::env::var(&settings.api_key_env)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| GatewayError::Auth(format!("environment variable {} is not set", settings.api_key_env)))?;
        HttpChatClientBuilder::new(endpoint)
            .api_key(Some(key))
            .max_attempts(settings.max_attempts)
            .backoff(Duration::from_millis(settings.backoff_base_ms), Duration::from_millis(settings.backoff_max_ms))
            .deadline(Duration::from_secs_f64(settings.deadline_s))
            .max_in_flight(settings.max_in_flight)
            .journal(settings.journal.clone())
            .build()
    }

    fn backoff_for(&self, attempt: u32) -> Duration {
        let factor = 1u32.checked_shl(attempt.saturating_sub(1)).unwrap_or(u32::MAX);
        self.backoff_base.saturating_mul(factor).min(self.backoff_max)
    }

    fn log(&self, entry: Value) {
        if let Some(j) = &self.journal {
            let mut f = j.lock().unwrap_or_else(|e| e.into_inner());
            // journal failures never fail the request
            let _ = writeln!(f, "{entry}");
        }
    }

    fn attempt(&self, request: &ChatRequest, body: &Value, key: &str, n: u32) -> Attempt {
        let _permit = self.limiter.acquire();
        let sent = self.http.post(&self.url).bearer_auth(key).json(body).send();
        let resp = match sent {
            Ok(r) => r,
            Err(e) => {
                self.log(json!({"tag": request.tag, "attempt": n, "error": e.to_string()}));
                return if e.is_timeout() {
                    Attempt::Retry(GatewayError::Timeout { attempts: n }, None)
                } else {
                    Attempt::Retry(GatewayError::Transport(e.to_string()), None)
                };
            }
        };
        let status = resp.status();
        let retry_after = resp
            .headers()
            .get(reqwest::header::RETRY_AFTER)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<f64>().ok())
            .filter(|s| s.is_finite() && *s >= 0.0)
            .map(Duration::from_secs_f64);
        let text = match resp.text() {
            Ok(t) => t,
            Err(e) if e.is_timeout() => return Attempt::Retry(GatewayError::Timeout { attempts: n }, None),
            Err(e) => return Attempt::Retry(GatewayError::Transport(e.to_string()), None),
        };
        self.log(json!({"tag": request.tag, "attempt": n, "status": status.as_u16(), "response": text}));

        match status.as_u16() {
            200..=299 => match parse_completion(&text) {
                Ok((content, p, c)) => Attempt::Done(content, p, c),
                Err(e) => Attempt::Fail(e),
            },
            401 | 403 => Attempt::Fail(GatewayError::Auth(format!("server returned {status}"))),
            429 => Attempt::Retry(GatewayError::RateLimited { attempts: n }, retry_after),
            408 => Attempt::Retry(GatewayError::Timeout { attempts: n }, retry_after),
            500..=599 => Attempt::Retry(GatewayError::Transport(format!("server returned {status}")), retry_after),
            _ => Attempt::Fail(GatewayError::Transport(format!("server returned {status}: {}", truncate(&text, 200)))),
        }
    }
}

fn truncate(s: &str, n: usize) -> &str {
    match s.char_indices().nth(n) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

fn parse_completion(body: &str) -> Result<(String, u64, u64), GatewayError> {
    let v: Value = serde_json::from_str(body).map_err(|e| GatewayError::MalformedServerResponse(e.to_string()))?;
    let content = v
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| GatewayError::MalformedServerResponse("missing choices[0].message.content".into()))?;
    let tokens = |k: &str| v.pointer(&format!("/usage/{k}")).and_then(Value::as_u64).unwrap_or(0);
    Ok((content.to_string(), tokens("prompt_tokens"), tokens("completion_tokens")))
}

impl ChatClient for HttpChatClient {
    fn complete(&self, request: &ChatRequest) -> Result<String, GatewayError> {
        request.validate()?;
        let key = self.api_key.as_deref().ok_or_else(|| GatewayError::Auth("no credential configured".into()))?;
        let body = json!({
            "model": request.model,
            "messages": request.messages,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        });
        self.log(json!({"tag": request.tag, "request": body}));

        let mut last = GatewayError::Transport("no attempt made".into());
        for n in 1..=self.max_attempts {
            match self.attempt(request, &body, key, n) {
                Attempt::Done(text, p, c) => {
                    self.usage.record(true, p, c);
                    return Ok(text);
                }
                Attempt::Fail(e) => {
                    self.usage.record(false, 0, 0);
                    return Err(e);
                }
                Attempt::Retry(e, after) => {
                    tracing::debug!(tag = %request.tag, attempt = n, error = %e, "retrying chat request");
                    last = e;
                    if n < self.max_attempts {
                        let wait = after.unwrap_or_else(|| self.backoff_for(n)).min(self.backoff_max);
                        std::thread::sleep(wait);
                    }
                }
            }
        }
        self.usage.record(false, 0, 0);
        Err(match last {
            GatewayError::RateLimited { .. } => GatewayError::RateLimited { attempts: self.max_attempts },
            GatewayError::Timeout { .. } => GatewayError::Timeout { attempts: self.max_attempts },
            other => other,
        })
    }

    fn usage(&self) -> UsageStats {
        self.usage.snapshot()
    }
}
