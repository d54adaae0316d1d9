//! OpenAI-compatible chat-completions provider.

use std::env;
use std::time::Duration;

use reeled_core::llm::{LlmProvider, MockProvider, PromptBundle, ProviderError};
use serde_json::{json, Value};

pub const BASE_URL_VAR: &str = "REELED_LLM_BASE_URL";
pub const API_KEY_VAR: &str = "REELED_LLM_API_KEY";
pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";
pub const DEFAULT_MODEL: &str = "gpt-4o";

const ID: &str = "openai";

/// Speaks `POST {base}/chat/completions`.
pub struct OpenAiCompatible {
    base_url: String,
    api_key: Option<String>,
    model: String,
    agent: ureq::Agent,
}

impl OpenAiCompatible {
    pub fn new(base_url: impl Into<String>, api_key: Option<String>, model: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key,
            model: model.into(),
            agent,
        }
    }

    /// Reads the endpoint and key from the environment.
    pub fn from_env(model: impl Into<String>) -> Self {
        let base = env::var(BASE_URL_VAR).unwrap_or_else(|_| DEFAULT_BASE_URL.into());
        Self::new(base, env::var(API_KEY_VAR).ok().filter(|k| !k.is_empty()), model)
    }

    fn error(message: impl Into<String>) -> ProviderError {
        ProviderError::new(ID, message)
    }
}

impl LlmProvider for OpenAiCompatible {
    fn id(&self) -> &str {
        ID
    }

    fn complete(&self, prompt: &PromptBundle) -> Result<String, ProviderError> {
        let body = json!({
            "model": self.model,
            "temperature": prompt.provider_params.temperature,
            "max_tokens": prompt.provider_params.max_output_tokens,
            "messages": [
                {"role": "system", "content": prompt.system_text},
                {"role": "user", "content": prompt.user_text},
            ],
        });
        let mut req = self.agent.post(format!("{}/chat/completions", self.base_url));
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req.send_json(&body).map_err(|e| Self::error(format!("request failed: {e}")))?;
        let status = resp.status();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Self::error(format!("reading response: {e}")))?;
        if !status.is_success() {
            return Err(Self::error(format!("HTTP {}: {}", status.as_u16(), text.chars().take(300).collect::<String>())));
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| Self::error(format!("response is not JSON: {e}")))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| Self::error("response has no choices[0].message.content"))
    }
}

/// Provider ids accepted on the command line and in job requests.
pub const PROVIDER_IDS: [&str; 2] = ["mock", ID];

/// Builds a provider by id.
pub fn provider_by_id(id: &str, model: Option<&str>) -> Option<Box<dyn LlmProvider + Send + Sync>> {
    match id {
        "mock" => Some(Box::new(MockProvider)),
        ID => Some(Box::new(OpenAiCompatible::from_env(model.unwrap_or(DEFAULT_MODEL)))),
        _ => None,
    }
}
