//! Provider-agnostic completion interface, a rate-limited gateway, an HTTP
//! chat provider and a deterministic template-driven stub.

mod http;
mod rate;
mod stub;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::estimate_tokens;

pub use http::{HttpProvider, HttpSettings, DEFAULT_API_KEY_ENV};
pub use rate::{RateLimit, TokenBucket};
pub use stub::{parse_context, FaultCount, FaultPlan, StubProvider, StubTemplates, MALFORMED_RESPONSE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub system: String,
    pub user: String,
    pub max_output_tokens: u32,
    /// In `[0, 2]`.
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl CompletionRequest {
    pub fn new(system: impl Into<String>, user: impl Into<String>) -> Self {
        CompletionRequest {
            system: system.into(),
            user: user.into(),
            max_output_tokens: 4096,
            temperature: 0.0,
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.max_output_tokens == 0 {
            return Err(LlmError::InvalidRequest("max_output_tokens must be positive".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(LlmError::InvalidRequest(format!("temperature {} is outside [0, 2]", self.temperature)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub input_tokens: u64,
    pub output_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub text: String,
    pub provider_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<Usage>,
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("invalid completion request: {0}")]
    InvalidRequest(String),
    #[error("credential error: {0}")]
    Credential(String),
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("prompt needs {needed} tokens, provider accepts {limit}")]
    Budget { needed: usize, limit: usize },
    #[error("provider configuration error: {0}")]
    Config(String),
    #[error("provider response error: {0}")]
    Response(String),
}

pub trait CompletionProvider: Send + Sync {
    fn id(&self) -> &str;
    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResult, LlmError>;
}

/// Validates requests, enforces the input limit and rate limit, then hands
/// the request to the provider unchanged.
pub struct Gateway {
    provider: Arc<dyn CompletionProvider>,
    limiter: Option<TokenBucket>,
    max_input_tokens: Option<usize>,
}

impl Gateway {
    pub fn new(provider: Arc<dyn CompletionProvider>) -> Self {
        Gateway { provider, limiter: None, max_input_tokens: None }
    }

    pub fn with_rate_limit(mut self, limit: RateLimit) -> Self {
        self.limiter = Some(TokenBucket::new(limit));
        self
    }

    pub fn with_max_input_tokens(mut self, limit: usize) -> Self {
        self.max_input_tokens = Some(limit);
        self
    }

    pub fn provider_id(&self) -> &str {
        self.provider.id()
    }

    pub fn complete(&self, req: &CompletionRequest) -> Result<CompletionResult, LlmError> {
        req.validate()?;
        if let Some(limit) = self.max_input_tokens {
            let needed = estimate_tokens(&req.system) + estimate_tokens(&req.user);
            if needed > limit {
                return Err(LlmError::Budget { needed, limit });
            }
        }
        if let Some(bucket) = &self.limiter {
            bucket.acquire();
        }
        self.provider.complete(req)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    struct Recorder(Mutex<Vec<CompletionRequest>>);

    impl CompletionProvider for Recorder {
        fn id(&self) -> &str {
            "recorder"
        }
        fn complete(&self, req: &CompletionRequest) -> Result<CompletionResult, LlmError> {
            self.0.lock().unwrap().push(req.clone());
            Ok(CompletionResult { text: "ok".into(), provider_id: "recorder".into(), usage: None })
        }
    }

    #[test]
    fn temperature_bounds() {
        let mut r = CompletionRequest::new("s", "u");
        r.temperature = 3.0;
        assert!(matches!(r.validate(), Err(LlmError::InvalidRequest(_))));
        r.temperature = 2.0;
        assert!(r.validate().is_ok());
        r.max_output_tokens = 0;
        assert!(r.validate().is_err());
    }

    #[test]
    fn gateway_forwards_prompt_bytes_unchanged() {
        let rec = Arc::new(Recorder(Mutex::new(Vec::new())));
        let gw = Gateway::new(rec.clone());
        let req = CompletionRequest::new("sys \u{00e9}\r\n", "user\t```x```\n");
        gw.complete(&req).unwrap();
        assert_eq!(rec.0.lock().unwrap()[0], req);
    }

    #[test]
    fn oversize_request_is_a_budget_error() {
        let rec = Arc::new(Recorder(Mutex::new(Vec::new())));
        let gw = Gateway::new(rec.clone()).with_max_input_tokens(2);
        let err = gw.complete(&CompletionRequest::new("abcd", "efghi")).unwrap_err();
        assert!(matches!(err, LlmError::Budget { needed: 3, limit: 2 }));
        assert!(rec.0.lock().unwrap().is_empty());
    }
}
