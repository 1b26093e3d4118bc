//! Chat-completions style provider over HTTP JSON.
//!
//! Request body:
//! `{"model", "messages": [{"role": "system", "content"}, {"role": "user", "content"}], "max_tokens", "temperature", "seed"?}`
//! Response body: `{"choices": [{"message": {"content"}}], "usage"?: {"prompt_tokens", "completion_tokens"}}`

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{CompletionProvider, CompletionRequest, CompletionResult, LlmError, Usage};

pub const DEFAULT_API_KEY_ENV: &str = "SKETCH2APP_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpSettings {
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub max_attempts: u32,
    pub initial_backoff_ms: u64,
    pub timeout_secs: u64,
}

impl Default for HttpSettings {
    fn default() -> Self {
        HttpSettings {
            endpoint: String::new(),
            model: String::new(),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            max_attempts: 3,
            initial_backoff_ms: 500,
            timeout_secs: 120,
        }
    }
}

pub struct HttpProvider {
    settings: HttpSettings,
    api_key: String,
    agent: ureq::Agent,
}

impl HttpProvider {
    /// Reads the API key from the configured environment variable.
    pub fn from_env(settings: HttpSettings) -> Result<Self, LlmError> {
        let key = std::env::var(&settings.api_key_env)
            .map_err(|_| LlmError::Credential(format!("environment variable {} is not set", settings.api_key_env)))?;
        Self::with_key(settings, key)
    }

    pub fn with_key(settings: HttpSettings, api_key: String) -> Result<Self, LlmError> {
        if settings.endpoint.is_empty() {
            return Err(LlmError::Config("http provider needs an endpoint URL".into()));
        }
        if settings.max_attempts == 0 {
            return Err(LlmError::Config("max_attempts must be at least 1".into()));
        }
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs(settings.timeout_secs)).build();
        Ok(HttpProvider { settings, api_key, agent })
    }

    fn body(&self, req: &CompletionRequest) -> Value {
        let mut body = json!({
            "model": self.settings.model,
            "messages": [
                {"role": "system", "content": req.system},
                {"role": "user", "content": req.user},
            ],
            "max_tokens": req.max_output_tokens,
            "temperature": req.temperature,
        });
        if let Some(seed) = req.seed {
            body["seed"] = json!(seed);
        }
        body
    }
}

enum Attempt {
    Done(Value),
    Retry(String),
    Fatal(LlmError),
}

fn parse_reply(v: &Value) -> Result<(String, Option<Usage>), LlmError> {
    let text = v
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| LlmError::Response("no choices[0].message.content in reply".into()))?;
    let usage = v.get("usage").and_then(|u| {
        Some(Usage {
            input_tokens: u.get("prompt_tokens")?.as_u64()?,
            output_tokens: u.get("completion_tokens")?.as_u64()?,
        })
    });
    Ok((text.to_string(), usage))
}

impl CompletionProvider for HttpProvider {
    fn id(&self) -> &str {
        "http"
    }

    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResult, LlmError> {
        let body = self.body(req);
        let mut backoff = Duration::from_millis(self.settings.initial_backoff_ms);
        let mut last = String::new();
        for attempt in 1..=self.settings.max_attempts {
            let outcome = match self
                .agent
                .post(&self.settings.endpoint)
                .set("Authorization", &format!("Bearer {}", self.api_key))
                .send_json(body.clone())
            {
                Ok(resp) => match resp.into_json::<Value>() {
                    Ok(v) => Attempt::Done(v),
                    Err(e) => Attempt::Retry(format!("unreadable reply: {e}")),
                },
                Err(ureq::Error::Status(code @ (401 | 403), _)) => {
                    Attempt::Fatal(LlmError::Credential(format!("provider rejected the API key (HTTP {code})")))
                }
                Err(ureq::Error::Status(code, resp)) if code == 429 || code >= 500 => {
                    Attempt::Retry(format!("HTTP {code}: {}", resp.into_string().unwrap_or_default()))
                }
                Err(ureq::Error::Status(code, resp)) => Attempt::Fatal(LlmError::Response(format!(
                    "HTTP {code}: {}",
                    resp.into_string().unwrap_or_default()
                ))),
                Err(ureq::Error::Transport(t)) => Attempt::Retry(t.to_string()),
            };
            match outcome {
                Attempt::Done(v) => {
                    let (text, usage) = parse_reply(&v)?;
                    return Ok(CompletionResult { text, provider_id: self.id().into(), usage });
                }
                Attempt::Fatal(e) => return Err(e),
                Attempt::Retry(msg) => {
                    log::warn!("provider attempt {attempt}/{} failed: {msg}", self.settings.max_attempts);
                    last = msg;
                    if attempt < self.settings.max_attempts {
                        std::thread::sleep(backoff);
                        backoff *= 2;
                    }
                }
            }
        }
        Err(LlmError::Transport { attempts: self.settings.max_attempts, message: last })
    }
}
