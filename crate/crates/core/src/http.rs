//! Minimal client for OpenAI-style `/chat/completions` endpoints.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HttpError {
    #[error("environment variable `{0}` holding the API key is not set")]
    MissingKey(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: "system".into(), content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: "user".into(), content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token; empty for none.
    #[serde(default)]
    pub api_key_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_s: u64,
}

fn default_timeout() -> u64 {
    120
}

pub(crate) struct Completion {
    pub texts: Vec<String>,
    /// Per-choice token logprobs, when the server returned them.
    pub logprobs: Option<Vec<Vec<f64>>>,
}

pub(crate) fn chat_completion(
    cfg: &EndpointConfig,
    messages: &[ChatMessage],
    n: usize,
    seed: u64,
    temperature: f64,
    want_logprobs: bool,
) -> Result<Completion, HttpError> {
    let mut req = json!({
        "model": cfg.model,
        "messages": messages,
        "n": n,
        "seed": seed,
        "temperature": temperature,
    });
    if want_logprobs {
        req["logprobs"] = json!(true);
    }
    let agent: ureq::Agent =
        ureq::Agent::config_builder().timeout_global(Some(Duration::from_secs(cfg.timeout_s.max(1)))).build().into();
    let mut call = agent.post(&cfg.endpoint).header("Content-Type", "application/json");
    if !cfg.api_key_env.is_empty() {
        let key = std::env::var(&cfg.api_key_env).map_err(|_| HttpError::MissingKey(cfg.api_key_env.clone()))?;
        call = call.header("Authorization", &format!("Bearer {key}"));
    }
    let mut resp = call.send_json(&req).map_err(|e| HttpError::Transport(e.to_string()))?;
    let body: serde_json::Value = resp.body_mut().read_json().map_err(|e| HttpError::Malformed(e.to_string()))?;
    parse_completion(&body)
}

fn parse_completion(body: &serde_json::Value) -> Result<Completion, HttpError> {
    let choices = body["choices"].as_array().ok_or_else(|| HttpError::Malformed("no `choices` array".into()))?;
    let mut texts = Vec::with_capacity(choices.len());
    let mut logprobs = Vec::with_capacity(choices.len());
    let mut have_logprobs = true;
    for c in choices {
        let text = c["message"]["content"]
            .as_str()
            .ok_or_else(|| HttpError::Malformed("choice without message content".into()))?;
        texts.push(text.to_string());
        match c["logprobs"]["content"].as_array() {
            Some(toks) => logprobs.push(toks.iter().filter_map(|t| t["logprob"].as_f64()).collect()),
            None => have_logprobs = false,
        }
    }
    Ok(Completion { texts, logprobs: (have_logprobs && !choices.is_empty()).then_some(logprobs) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_choices_and_logprobs() {
        let body = json!({
            "choices": [
                {"message": {"role": "assistant", "content": "a"}, "logprobs": {"content": [{"token": "a", "logprob": -0.5}]}},
                {"message": {"role": "assistant", "content": "b"}, "logprobs": {"content": []}}
            ]
        });
        let c = parse_completion(&body).unwrap();
        assert_eq!(c.texts, ["a", "b"]);
        assert_eq!(c.logprobs.unwrap()[0], vec![-0.5]);
    }

    #[test]
    fn missing_logprobs_yield_none() {
        let body = json!({"choices": [{"message": {"content": "x"}}]});
        assert!(parse_completion(&body).unwrap().logprobs.is_none());
        assert!(parse_completion(&json!({})).is_err());
    }
}
