//! Experiment configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{Client, HttpClient, MarkerRules, ReplayClient};
use crate::http::EndpointConfig;
use crate::naming::{CachingProvider, DictionaryProvider, LlmProvider, SynonymProvider};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProviderConfig {
    Dictionary {
        /// Synonym table; the bundled one when unset.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cache: Option<PathBuf>,
    },
    Llm {
        #[serde(flatten)]
        endpoint: EndpointConfig,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cache: Option<PathBuf>,
    },
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig::Dictionary { path: None, cache: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClientConfig {
    Replay {
        dir: PathBuf,
    },
    Http {
        #[serde(flatten)]
        endpoint: EndpointConfig,
        #[serde(default = "default_temperature")]
        temperature: f64,
        #[serde(default)]
        logprobs: bool,
    },
}

fn default_temperature() -> f64 {
    1.0
}

fn default_samples() -> usize {
    10
}

fn default_patches() -> usize {
    5
}

fn default_parallelism() -> usize {
    1
}

fn default_iterations() -> usize {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub corpus_manifest: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub provider: ProviderConfig,
    pub client: ClientConfig,
    #[serde(default = "default_samples")]
    pub samples_per_bug: usize,
    #[serde(default = "default_patches")]
    pub patch_count: usize,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_iterations")]
    pub permutation_iterations: usize,
    #[serde(default)]
    pub markers: MarkerRules,
}

impl Config {
    pub fn new(corpus_manifest: impl Into<PathBuf>, output_dir: impl Into<PathBuf>, client: ClientConfig) -> Self {
        Config {
            corpus_manifest: corpus_manifest.into(),
            output_dir: output_dir.into(),
            provider: ProviderConfig::default(),
            client,
            samples_per_bug: default_samples(),
            patch_count: default_patches(),
            parallelism: default_parallelism(),
            seed: 0,
            permutation_iterations: default_iterations(),
            markers: MarkerRules::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads `path` and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: shown.clone(), source })?;
        let mut cfg = Self::from_toml(&text).map_err(|e| ConfigError::Parse { path: shown, message: e.to_string() })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus_manifest);
        fix(&mut self.output_dir);
        match &mut self.provider {
            ProviderConfig::Dictionary { path, cache } => {
                path.iter_mut().for_each(fix);
                cache.iter_mut().for_each(fix);
            }
            ProviderConfig::Llm { cache, .. } => cache.iter_mut().for_each(fix),
        }
        if let ClientConfig::Replay { dir } = &mut self.client {
            fix(dir);
        }
    }

    /// Checks what every command needs before any work starts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.corpus_manifest.is_file() {
            return Err(ConfigError::Invalid(format!(
                "corpus manifest {} does not exist",
                self.corpus_manifest.display()
            )));
        }
        if self.samples_per_bug == 0 {
            return Err(ConfigError::Invalid("samples_per_bug must be at least 1".into()));
        }
        if !(1..=crate::harness::MAX_PATCHES).contains(&self.patch_count) {
            return Err(ConfigError::Invalid(format!("patch_count must be in 1..={}", crate::harness::MAX_PATCHES)));
        }
        if let ProviderConfig::Dictionary { path: Some(p), .. } = &self.provider {
            if !p.is_file() {
                return Err(ConfigError::Invalid(format!("synonym table {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn build_provider(&self) -> Result<Box<dyn SynonymProvider>, ConfigError> {
        let io = |p: &Path| {
            let shown = p.display().to_string();
            move |source| ConfigError::Io { path: shown, source }
        };
        match &self.provider {
            ProviderConfig::Dictionary { path, cache } => {
                let dict = match path {
                    Some(p) => DictionaryProvider::from_file(p).map_err(|e| ConfigError::Invalid(e.to_string()))?,
                    None => DictionaryProvider::bundled(),
                };
                Ok(match cache {
                    Some(c) => Box::new(CachingProvider::with_file(dict, c).map_err(io(c))?),
                    None => Box::new(dict),
                })
            }
            ProviderConfig::Llm { endpoint, cache } => {
                let llm = LlmProvider::new(endpoint.clone());
                Ok(match cache {
                    Some(c) => Box::new(CachingProvider::with_file(llm, c).map_err(io(c))?),
                    None => Box::new(CachingProvider::new(llm)),
                })
            }
        }
    }

    pub fn build_client(&self) -> Result<Box<dyn Client>, ConfigError> {
        match &self.client {
            ClientConfig::Replay { dir } => {
                if !dir.is_dir() {
                    return Err(ConfigError::Invalid(format!("replay directory {} does not exist", dir.display())));
                }
                Ok(Box::new(ReplayClient::new(dir)))
            }
            ClientConfig::Http { endpoint, temperature, logprobs } => {
                if !endpoint.api_key_env.is_empty() && std::env::var_os(&endpoint.api_key_env).is_none() {
                    return Err(ConfigError::Invalid(format!(
                        "environment variable {} is not set",
                        endpoint.api_key_env
                    )));
                }
                let mut c = HttpClient::new(endpoint.clone());
                c.temperature = *temperature;
                c.logprobs = *logprobs;
                Ok(Box::new(c))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = Config::new("corpus.jsonl", "out", ClientConfig::Replay { dir: "replay".into() });
        c.seed = 7;
        c.markers.compile_failure_exit_codes.push(3);
        assert_eq!(Config::from_toml(&c.to_toml()).unwrap(), c);
        c.provider = ProviderConfig::Llm {
            endpoint: EndpointConfig {
                endpoint: "http://localhost:8000/v1/chat/completions".into(),
                model: "m".into(),
                api_key_env: "KEY".into(),
                timeout_s: 30,
            },
            cache: Some("names.jsonl".into()),
        };
        c.client = ClientConfig::Http {
            endpoint: EndpointConfig {
                endpoint: "http://x".into(),
                model: "n".into(),
                api_key_env: String::new(),
                timeout_s: 5,
            },
            temperature: 0.5,
            logprobs: true,
        };
        assert_eq!(Config::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let c = Config::from_toml(
            "corpus_manifest = \"a\"\noutput_dir = \"b\"\n[client]\nkind = \"replay\"\ndir = \"r\"\n",
        )
        .unwrap();
        assert_eq!((c.samples_per_bug, c.patch_count, c.permutation_iterations), (10, 5, 100_000));
        assert_eq!(c.provider, ProviderConfig::default());
        assert!(Config::from_toml(
            "corpus_manifest = \"a\"\noutput_dir = \"b\"\nbogus = 1\n[client]\nkind = \"replay\"\ndir = \"r\"\n"
        )
        .is_err());
    }

    #[test]
    fn load_resolves_against_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("exp.toml");
        std::fs::write(&p, Config::new("c.jsonl", "/abs/out", ClientConfig::Replay { dir: "r".into() }).to_toml())
            .unwrap();
        let c = Config::load(&p).unwrap();
        assert_eq!(c.corpus_manifest, dir.path().join("c.jsonl"));
        assert_eq!(c.output_dir, PathBuf::from("/abs/out"));
        assert_eq!(c.client, ClientConfig::Replay { dir: dir.path().join("r") });
        assert!(c.validate().is_err());
    }
}
