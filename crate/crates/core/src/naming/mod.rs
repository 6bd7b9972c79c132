//! Synonym proposals for identifiers and propagation of function renames
//! into test and stack-trace text.

mod cache;
mod dictionary;
mod llm;
mod references;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::is_valid_identifier;
use crate::syntax::lexer::KEYWORDS;

pub use cache::CachingProvider;
pub use dictionary::{split_words, DictionaryError, DictionaryProvider};
pub use llm::LlmProvider;
pub use references::{update_references, UnmatchedOccurrence, UnmatchedReport};

/// Total provider queries per site: the first try plus three retries.
pub const MAX_ATTEMPTS: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Function,
    Parameter,
    Local,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Function => "function",
            Role::Parameter => "parameter",
            Role::Local => "local",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynonymRequest {
    pub original_name: String,
    pub role: Role,
    /// The printed method the name appears in.
    pub context_snippet: String,
    pub forbidden: BTreeSet<String>,
    /// 0 on the first query, incremented on each retry.
    pub attempt: u32,
}

impl SynonymRequest {
    /// `forbidden` is extended with every reserved word.
    pub fn new(original_name: &str, role: Role, context_snippet: &str, forbidden: BTreeSet<String>) -> Self {
        let mut forbidden = forbidden;
        forbidden.extend(reserved_words().map(String::from));
        Self {
            original_name: original_name.to_string(),
            role,
            context_snippet: context_snippet.to_string(),
            forbidden,
            attempt: 0,
        }
    }

    /// Valid identifier, different from the original and not forbidden.
    pub fn accepts(&self, name: &str) -> bool {
        is_valid_identifier(name) && name != self.original_name && !self.forbidden.contains(name)
    }
}

pub fn reserved_words() -> impl Iterator<Item = &'static str> {
    KEYWORDS.iter().copied().chain(["_", "var", "record", "yield"])
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct ProviderError(pub String);

pub trait SynonymProvider: Send + Sync {
    fn propose(&self, request: &SynonymRequest) -> Result<String, ProviderError>;
}

impl<P: SynonymProvider + ?Sized> SynonymProvider for Box<P> {
    fn propose(&self, request: &SynonymRequest) -> Result<String, ProviderError> {
        (**self).propose(request)
    }
}

impl<P: SynonymProvider + ?Sized> SynonymProvider for std::sync::Arc<P> {
    fn propose(&self, request: &SynonymRequest) -> Result<String, ProviderError> {
        (**self).propose(request)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NamingError {
    #[error("no valid synonym for `{name}` after {attempts} attempts")]
    NoValidSynonym { name: String, attempts: u32 },
    #[error("synonym provider failed for `{name}`: {message}")]
    ProviderFailure { name: String, message: String },
}

/// Queries `provider` until it returns an acceptable name, at most
/// [`MAX_ATTEMPTS`] times.
pub fn propose_synonym(provider: &dyn SynonymProvider, request: &SynonymRequest) -> Result<String, NamingError> {
    let mut req = request.clone();
    let mut last_failure = None;
    let mut got_answer = false;
    for attempt in 0..MAX_ATTEMPTS {
        req.attempt = request.attempt + attempt;
        match provider.propose(&req) {
            Ok(name) => {
                got_answer = true;
                let name = name.trim().to_string();
                if req.accepts(&name) {
                    return Ok(name);
                }
            }
            Err(e) => last_failure = Some(e.0),
        }
    }
    match (got_answer, last_failure) {
        (false, Some(message)) => Err(NamingError::ProviderFailure { name: request.original_name.clone(), message }),
        _ => Err(NamingError::NoValidSynonym { name: request.original_name.clone(), attempts: MAX_ATTEMPTS }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU32, Ordering};

    struct Scripted(Vec<Result<&'static str, &'static str>>, AtomicU32);

    impl SynonymProvider for Scripted {
        fn propose(&self, _: &SynonymRequest) -> Result<String, ProviderError> {
            let i = self.1.fetch_add(1, Ordering::SeqCst) as usize;
            match self.0[i.min(self.0.len() - 1)] {
                Ok(s) => Ok(s.to_string()),
                Err(e) => Err(ProviderError(e.to_string())),
            }
        }
    }

    fn req(name: &str, forbidden: &[&str]) -> SynonymRequest {
        SynonymRequest::new(name, Role::Local, "", forbidden.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn retries_until_acceptable() {
        let p = Scripted(vec![Ok("class"), Ok("total"), Ok("result"), Ok("sum")], AtomicU32::new(0));
        assert_eq!(propose_synonym(&p, &req("total", &["result"])).unwrap(), "sum");
    }

    #[test]
    fn gives_up_after_budget() {
        let p = Scripted(vec![Ok("9bad")], AtomicU32::new(0));
        assert!(matches!(propose_synonym(&p, &req("x", &[])), Err(NamingError::NoValidSynonym { .. })));
        assert_eq!(p.1.load(Ordering::SeqCst), MAX_ATTEMPTS);
    }

    #[test]
    fn transport_failures_surface() {
        let p = Scripted(vec![Err("timeout")], AtomicU32::new(0));
        assert!(matches!(propose_synonym(&p, &req("x", &[])), Err(NamingError::ProviderFailure { .. })));
        let p = Scripted(vec![Err("timeout"), Ok("y")], AtomicU32::new(0));
        assert_eq!(propose_synonym(&p, &req("x", &[])).unwrap(), "y");
    }

    #[test]
    fn reserved_words_are_forbidden() {
        let r = req("x", &[]);
        assert!(r.forbidden.contains("while") && r.forbidden.contains("var"));
    }
}
