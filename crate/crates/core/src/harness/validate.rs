use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::corpus::{splice, BugRecord, Variant};
use super::patch::PatchCandidate;
use crate::syntax::print_method;

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot start validation command: {0}")]
    Spawn(std::io::Error),
}

fn io_err(path: &Path, source: std::io::Error) -> WorkspaceError {
    WorkspaceError::Io { path: path.display().to_string(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Validity {
    Uncompilable,
    Failing,
    Plausible,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationOutcome {
    pub class: Validity,
    /// `None` when the command never ran or was killed.
    pub exit_code: Option<i32>,
    pub timed_out: bool,
    pub stdout_sha256: String,
    pub stderr_sha256: String,
    /// Kept out of the result log so reruns reproduce it byte for byte.
    #[serde(default, skip_serializing)]
    pub wall_time_ms: u64,
}

impl ValidationOutcome {
    /// Outcome for candidates that cannot be spliced.
    pub fn not_spliced() -> Self {
        let empty = hex::encode(Sha256::digest(b""));
        ValidationOutcome {
            class: Validity::Uncompilable,
            exit_code: None,
            timed_out: false,
            stdout_sha256: empty.clone(),
            stderr_sha256: empty,
            wall_time_ms: 0,
        }
    }
}

/// How command output maps to a validity class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerRules {
    /// Substrings of stdout or stderr that signal a compile failure.
    pub compile_failure: Vec<String>,
    /// Exit codes that signal a compile failure regardless of output.
    #[serde(default)]
    pub compile_failure_exit_codes: Vec<i32>,
}

impl Default for MarkerRules {
    fn default() -> Self {
        MarkerRules {
            compile_failure: ["COMPILATION ERROR", "COMPILATION FAILED", "cannot find symbol", ": error:"]
                .map(String::from)
                .to_vec(),
            compile_failure_exit_codes: Vec::new(),
        }
    }
}

impl MarkerRules {
    pub fn classify(&self, exit_code: Option<i32>, timed_out: bool, stdout: &str, stderr: &str) -> Validity {
        let marked = self.compile_failure.iter().any(|m| stdout.contains(m.as_str()) || stderr.contains(m.as_str()));
        if marked || exit_code.is_some_and(|c| self.compile_failure_exit_codes.contains(&c)) {
            Validity::Uncompilable
        } else if !timed_out && exit_code == Some(0) {
            Validity::Plausible
        } else {
            Validity::Failing
        }
    }
}

fn copy_tree(from: &Path, to: &Path) -> Result<(), WorkspaceError> {
    for entry in walkdir::WalkDir::new(from) {
        let entry = entry.map_err(|e| io_err(from, e.into()))?;
        let rel = entry.path().strip_prefix(from).expect("walk stays under root");
        let dest = to.join(rel);
        if entry.file_type().is_dir() {
            std::fs::create_dir_all(&dest).map_err(|e| io_err(&dest, e))?;
        } else {
            std::fs::copy(entry.path(), &dest).map_err(|e| io_err(&dest, e))?;
        }
    }
    Ok(())
}

fn shell_quote(p: &Path) -> String {
    format!("'{}'", p.display().to_string().replace('\'', "'\\''"))
}

/// Copies the project into `workdir`, applies the variant's file overrides,
/// splices the candidate over the function span and runs the validation
/// command.
pub fn splice_and_validate(
    bug: &BugRecord,
    variant: &Variant,
    candidate: &PatchCandidate,
    workdir: &Path,
    rules: &MarkerRules,
) -> Result<ValidationOutcome, WorkspaceError> {
    let Some(method) = candidate.parsed.as_ref().filter(|_| candidate.signature_matches_target) else {
        return Ok(ValidationOutcome::not_spliced());
    };
    let project = workdir.join("project");
    copy_tree(&bug.project_path, &project)?;
    for (rel, text) in &variant.file_overrides {
        let p = project.join(rel);
        std::fs::write(&p, text).map_err(|e| io_err(&p, e))?;
    }
    let src_path = bug.source_path();
    let source = std::fs::read_to_string(&src_path).map_err(|e| io_err(&src_path, e))?;
    let patched = splice(&source, bug.function_span, &print_method(method), bug.function_span.column);
    let dest = project.join(&bug.source_file);
    std::fs::write(&dest, patched).map_err(|e| io_err(&dest, e))?;

    let cmd = bug.validation_command.replace("{project}", &shell_quote(&project));
    run_command(&cmd, &project, workdir, Duration::from_secs(bug.timeout_s.max(1)), rules)
}

fn run_command(
    cmd: &str,
    cwd: &Path,
    logs: &Path,
    timeout: Duration,
    rules: &MarkerRules,
) -> Result<ValidationOutcome, WorkspaceError> {
    let out_path: PathBuf = logs.join("stdout.txt");
    let err_path: PathBuf = logs.join("stderr.txt");
    let out = File::create(&out_path).map_err(|e| io_err(&out_path, e))?;
    let err = File::create(&err_path).map_err(|e| io_err(&err_path, e))?;
    let start = Instant::now();
    let mut command = Command::new("sh");
    command.arg("-c").arg(cmd).current_dir(cwd).stdin(Stdio::null()).stdout(out).stderr(err);
    #[cfg(unix)]
    std::os::unix::process::CommandExt::process_group(&mut command, 0);
    let mut child = command.spawn().map_err(WorkspaceError::Spawn)?;
    let mut timed_out = false;
    let status = loop {
        match child.try_wait().map_err(WorkspaceError::Spawn)? {
            Some(s) => break Some(s),
            None if start.elapsed() >= timeout => {
                timed_out = true;
                #[cfg(unix)]
                // SAFETY: killpg has no memory effects; the group was created for this child.
                unsafe {
                    libc::killpg(child.id() as libc::pid_t, libc::SIGKILL);
                }
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            None => std::thread::sleep(Duration::from_millis(5)),
        }
    };
    let wall_time_ms = start.elapsed().as_millis() as u64;
    let stdout = String::from_utf8_lossy(&std::fs::read(&out_path).unwrap_or_default()).into_owned();
    let stderr = String::from_utf8_lossy(&std::fs::read(&err_path).unwrap_or_default()).into_owned();
    let exit_code = status.and_then(|s| s.code());
    Ok(ValidationOutcome {
        class: rules.classify(exit_code, timed_out, &stdout, &stderr),
        exit_code,
        timed_out,
        stdout_sha256: hex::encode(Sha256::digest(stdout.as_bytes())),
        stderr_sha256: hex::encode(Sha256::digest(stderr.as_bytes())),
        wall_time_ms,
    })
}
