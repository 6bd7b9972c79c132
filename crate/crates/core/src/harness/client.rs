use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::prompt::PromptBundle;
use crate::http::{chat_completion, EndpointConfig, HttpError};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("no replay fixture {path}")]
    MissingFixture { path: String },
    #[error("replay fixture {path}: {message}")]
    BadFixture { path: String, message: String },
    #[error(transparent)]
    Http(#[from] HttpError),
}

impl ClientError {
    /// Short tag recorded in the result log.
    pub fn tag(&self) -> &'static str {
        match self {
            ClientError::MissingFixture { .. } => "missing_fixture",
            ClientError::BadFixture { .. } => "bad_fixture",
            ClientError::Http(HttpError::MissingKey(_)) => "missing_key",
            ClientError::Http(HttpError::Transport(_)) => "transport",
            ClientError::Http(HttpError::Malformed(_)) => "malformed_response",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ClientResponse {
    pub texts: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logprobs: Option<Vec<Vec<f64>>>,
}

/// A stateless chat model. Every call carries the full conversation, so no
/// state crosses samples.
pub trait Client: Send + Sync {
    fn model(&self) -> &str;
    fn complete(&self, prompt: &PromptBundle, n: usize, seed: u64) -> Result<ClientResponse, ClientError>;
}

/// Hex SHA-256 over the system and user text.
pub fn prompt_hash(prompt: &PromptBundle) -> String {
    let mut h = Sha256::new();
    h.update(prompt.system_text.as_bytes());
    h.update([0u8]);
    h.update(prompt.user_text.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayFixture {
    pub responses: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logprobs: Option<Vec<Vec<f64>>>,
}

/// Serves canned responses from `<dir>/<prompt_hash>.json`. Sample `i` of a
/// call with seed `s` gets `responses[(s + i) % len]`.
#[derive(Debug, Clone)]
pub struct ReplayClient {
    dir: PathBuf,
    model: String,
}

impl ReplayClient {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReplayClient { dir: dir.into(), model: "replay".into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn fixture_path(&self, prompt: &PromptBundle) -> PathBuf {
        self.dir.join(format!("{}.json", prompt_hash(prompt)))
    }

    /// Writes a fixture for `prompt`, returning its path.
    pub fn record(&self, prompt: &PromptBundle, fixture: &ReplayFixture) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        let path = self.fixture_path(prompt);
        std::fs::write(&path, serde_json::to_string_pretty(fixture).expect("fixture serializes"))?;
        Ok(path)
    }
}

impl Client for ReplayClient {
    fn model(&self) -> &str {
        &self.model
    }

    fn complete(&self, prompt: &PromptBundle, n: usize, seed: u64) -> Result<ClientResponse, ClientError> {
        let path = self.fixture_path(prompt);
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(&path).map_err(|_| ClientError::MissingFixture { path: shown.clone() })?;
        let fx: ReplayFixture = serde_json::from_str(&text)
            .map_err(|e| ClientError::BadFixture { path: shown.clone(), message: e.to_string() })?;
        if fx.responses.is_empty() {
            return Err(ClientError::BadFixture { path: shown, message: "empty `responses`".into() });
        }
        let len = fx.responses.len();
        let pick = |i: usize| (seed as usize).wrapping_add(i) % len;
        Ok(ClientResponse {
            texts: (0..n).map(|i| fx.responses[pick(i)].clone()).collect(),
            logprobs: fx.logprobs.filter(|lp| lp.len() == len).map(|lp| (0..n).map(|i| lp[pick(i)].clone()).collect()),
        })
    }
}

/// OpenAI-compatible chat endpoint.
#[derive(Debug, Clone)]
pub struct HttpClient {
    pub config: EndpointConfig,
    pub temperature: f64,
    pub logprobs: bool,
}

impl HttpClient {
    pub fn new(config: EndpointConfig) -> Self {
        HttpClient { config, temperature: 1.0, logprobs: false }
    }
}

impl Client for HttpClient {
    fn model(&self) -> &str {
        &self.config.model
    }

    fn complete(&self, prompt: &PromptBundle, n: usize, seed: u64) -> Result<ClientResponse, ClientError> {
        let c = chat_completion(&self.config, &prompt.messages(), n, seed, self.temperature, self.logprobs)?;
        Ok(ClientResponse { texts: c.texts, logprobs: c.logprobs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bundle(u: &str) -> PromptBundle {
        PromptBundle { system_text: "s".into(), user_text: u.into(), requested_patch_count: 1 }
    }

    #[test]
    fn replay_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = ReplayClient::new(dir.path());
        let p = bundle("fix it");
        assert!(matches!(c.complete(&p, 1, 0), Err(ClientError::MissingFixture { .. })));
        c.record(&p, &ReplayFixture { responses: vec!["a".into(), "b".into()], logprobs: None }).unwrap();
        assert_eq!(c.complete(&p, 1, 0).unwrap().texts, ["a"]);
        assert_eq!(c.complete(&p, 3, 1).unwrap().texts, ["b", "a", "b"]);
        assert_ne!(prompt_hash(&p), prompt_hash(&bundle("fix it ")));
    }

    #[test]
    fn bad_fixture_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let c = ReplayClient::new(dir.path());
        let p = bundle("x");
        std::fs::write(c.fixture_path(&p), "{\"responses\": []}").unwrap();
        assert_eq!(c.complete(&p, 1, 0).unwrap_err().tag(), "bad_fixture");
    }
}
