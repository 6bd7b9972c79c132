//! Repair experiment harness: corpus loading, prompting, patch extraction,
//! validation and the resumable runner.

mod client;
mod corpus;
mod patch;
mod prompt;
mod runner;
mod validate;

use std::path::Path;

use thiserror::Error;

use crate::transforms::TransformError;

pub use client::{prompt_hash, Client, ClientError, ClientResponse, HttpClient, ReplayClient, ReplayFixture};
pub use corpus::{
    load_corpus, prepare_variant, prepare_variant_with, splice, BugRecord, Corpus, LoadedBug, PreparedVariant,
    SkipReport, Variant, VariantKind,
};
pub use patch::{extract_patches, fenced_blocks, PatchCandidate, Signature};
pub use prompt::{build_prompt, PromptBundle, MAX_PATCHES};
pub use runner::{read_log, run_experiment, CandidateResult, ExperimentBug, RunConfig, RunResult};
pub use validate::{splice_and_validate, MarkerRules, ValidationOutcome, Validity, WorkspaceError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: malformed manifest record: {message}")]
    ManifestParse { path: String, line: usize, message: String },
    #[error("{path}:{line}: malformed result record: {message}")]
    Log { path: String, line: usize, message: String },
    #[error("variant of {bug_id} does not parse: {message}")]
    Variant { bug_id: String, message: String },
    #[error("cannot transform {bug_id}: {source}")]
    Transform { bug_id: String, source: TransformError },
    #[error(transparent)]
    Workspace(#[from] WorkspaceError),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.display().to_string(), source }
    }
}
