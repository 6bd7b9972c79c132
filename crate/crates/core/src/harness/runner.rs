use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{mpsc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::client::Client;
use super::corpus::{BugRecord, Variant, VariantKind};
use super::patch::{extract_patches, PatchCandidate, Signature};
use super::prompt::build_prompt;
use super::validate::{splice_and_validate, MarkerRules, ValidationOutcome, Validity};
use super::HarnessError;
use crate::syntax::print_method;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub candidate: PatchCandidate,
    pub outcome: ValidationOutcome,
}

/// One prompt's outcome for one bug variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub bug_id: String,
    pub variant: VariantKind,
    pub prompt_index: usize,
    pub model: String,
    pub candidates: Vec<CandidateResult>,
    pub success: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunResult {
    pub fn key(&self) -> (String, VariantKind, usize) {
        (self.bug_id.clone(), self.variant, self.prompt_index)
    }
}

/// A bug with the variants prepared for it.
#[derive(Debug, Clone)]
pub struct ExperimentBug {
    pub record: BugRecord,
    pub variants: Vec<Variant>,
}

impl ExperimentBug {
    pub fn variant(&self, kind: VariantKind) -> Option<&Variant> {
        self.variants.iter().find(|v| v.kind == kind)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub samples_per_bug: usize,
    pub patch_count: usize,
    pub variants: Vec<VariantKind>,
    pub parallelism: usize,
    pub seed: u64,
    pub rules: MarkerRules,
    pub log_path: PathBuf,
    /// Parent directory for validation workdirs; the system temp dir when unset.
    pub scratch_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(log_path: impl Into<PathBuf>) -> Self {
        RunConfig {
            samples_per_bug: 10,
            patch_count: 5,
            variants: vec![VariantKind::Original, VariantKind::Transformed],
            parallelism: 1,
            seed: 0,
            rules: MarkerRules::default(),
            log_path: log_path.into(),
            scratch_dir: None,
        }
    }
}

/// Reads a result log. A torn final line, left by an interrupted write, is
/// dropped and truncated away when `repair` is set.
pub fn read_log(path: &Path, repair: bool) -> Result<Vec<RunResult>, HarnessError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(HarnessError::io(path, e)),
    };
    let mut out = Vec::new();
    let mut good_len = 0;
    let lines: Vec<&str> = text.split_inclusive('\n').collect();
    for (i, line) in lines.iter().enumerate() {
        let complete = line.ends_with('\n');
        if line.trim().is_empty() {
            good_len += line.len();
            continue;
        }
        match serde_json::from_str::<RunResult>(line) {
            Ok(r) if complete => {
                out.push(r);
                good_len += line.len();
            }
            Ok(_) | Err(_) if i + 1 == lines.len() && !complete => break,
            Ok(_) => unreachable!(),
            Err(e) => {
                return Err(HarnessError::Log { path: path.display().to_string(), line: i + 1, message: e.to_string() })
            }
        }
    }
    if repair && good_len < text.len() {
        let f = OpenOptions::new().write(true).open(path).map_err(|e| HarnessError::io(path, e))?;
        f.set_len(good_len as u64).map_err(|e| HarnessError::io(path, e))?;
    }
    Ok(out)
}

struct Task<'a> {
    bug: &'a ExperimentBug,
    variant: &'a Variant,
    index: usize,
}

type CacheKey = (String, VariantKind, [u8; 32]);

struct Ctx<'a> {
    client: &'a dyn Client,
    cfg: &'a RunConfig,
    cache: Mutex<HashMap<CacheKey, ValidationOutcome>>,
}

/// Runs every bug × variant × sample index not already in the log, appending
/// results in canonical order, and returns the full sorted result set.
pub fn run_experiment(
    bugs: &[ExperimentBug],
    client: &dyn Client,
    cfg: &RunConfig,
) -> Result<Vec<RunResult>, HarnessError> {
    let mut results = read_log(&cfg.log_path, true)?;
    let done: HashSet<_> = results.iter().map(RunResult::key).collect();

    let mut order: Vec<&ExperimentBug> = bugs.iter().collect();
    order.sort_by(|a, b| a.record.bug_id.cmp(&b.record.bug_id));
    let mut kinds = cfg.variants.clone();
    kinds.sort();
    kinds.dedup();
    let mut pending = Vec::new();
    for bug in order {
        for &kind in &kinds {
            let Some(variant) = bug.variant(kind) else { continue };
            for index in 0..cfg.samples_per_bug {
                if !done.contains(&(bug.record.bug_id.clone(), kind, index)) {
                    pending.push(Task { bug, variant, index });
                }
            }
        }
    }

    if let Some(dir) = cfg.log_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let log = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&cfg.log_path)
        .map_err(|e| HarnessError::io(&cfg.log_path, e))?;
    let ctx = Ctx { client, cfg, cache: Mutex::new(HashMap::new()) };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.parallelism.max(1)).build().expect("thread pool");

    let (tx, rx) = mpsc::channel::<(usize, RunResult)>();
    let fresh = std::thread::scope(|s| {
        let writer = s.spawn(move || write_in_order(log, &cfg.log_path, rx));
        let run = pool.install(|| {
            pending.par_iter().enumerate().try_for_each_with(tx, |tx, (i, t)| {
                let r = run_one(&ctx, t)?;
                // The writer only stops early on an IO error, which it reports itself.
                let _ = tx.send((i, r));
                Ok::<_, HarnessError>(())
            })
        });
        let written = writer.join().expect("log writer panicked");
        run.and(written)
    })?;
    results.extend(fresh);
    results.sort_by_key(RunResult::key);
    Ok(results)
}

fn write_in_order(
    mut log: File,
    path: &Path,
    rx: mpsc::Receiver<(usize, RunResult)>,
) -> Result<Vec<RunResult>, HarnessError> {
    let mut next = 0;
    let mut held = BTreeMap::new();
    let mut written = Vec::new();
    for (i, r) in rx {
        held.insert(i, r);
        while let Some(r) = held.remove(&next) {
            let mut line = serde_json::to_string(&r).expect("result serializes");
            line.push('\n');
            log.write_all(line.as_bytes()).and_then(|_| log.flush()).map_err(|e| HarnessError::io(path, e))?;
            written.push(r);
            next += 1;
        }
    }
    Ok(written)
}

fn run_one(ctx: &Ctx<'_>, t: &Task<'_>) -> Result<RunResult, HarnessError> {
    let bug = &t.bug.record;
    let mut result = RunResult {
        bug_id: bug.bug_id.clone(),
        variant: t.variant.kind,
        prompt_index: t.index,
        model: ctx.client.model().to_string(),
        candidates: Vec::new(),
        success: false,
        error: None,
    };
    let target = Signature::of(&t.variant.method()?);
    let prompt = build_prompt(bug, t.variant, ctx.cfg.patch_count);
    let seed = ctx.cfg.seed.wrapping_add(t.index as u64);
    let response = match ctx.client.complete(&prompt, 1, seed) {
        Ok(r) => r,
        Err(e) => {
            result.error = Some(format!("{}: {e}", e.tag()));
            return Ok(result);
        }
    };
    for text in &response.texts {
        for candidate in extract_patches(text, &target) {
            let outcome = validate_cached(ctx, t, &candidate)?;
            result.candidates.push(CandidateResult { candidate, outcome });
        }
    }
    result.success = result.candidates.iter().any(|c| c.outcome.class == Validity::Plausible);
    Ok(result)
}

fn validate_cached(ctx: &Ctx<'_>, t: &Task<'_>, candidate: &PatchCandidate) -> Result<ValidationOutcome, HarnessError> {
    let Some(method) = candidate.parsed.as_ref().filter(|_| candidate.signature_matches_target) else {
        return Ok(ValidationOutcome::not_spliced());
    };
    let key = (t.bug.record.bug_id.clone(), t.variant.kind, Sha256::digest(print_method(method).as_bytes()).into());
    if let Some(hit) = ctx.cache.lock().expect("cache lock").get(&key) {
        return Ok(hit.clone());
    }
    let mut builder = tempfile::Builder::new();
    builder.prefix("validate-");
    let dir = match &ctx.cfg.scratch_dir {
        Some(d) => {
            std::fs::create_dir_all(d).map_err(|e| HarnessError::io(d, e))?;
            builder.tempdir_in(d)
        }
        None => builder.tempdir(),
    }
    .map_err(|e| HarnessError::io(Path::new("validation workdir"), e))?;
    let outcome = splice_and_validate(&t.bug.record, t.variant, candidate, dir.path(), &ctx.cfg.rules)?;
    ctx.cache.lock().expect("cache lock").insert(key, outcome.clone());
    Ok(outcome)
}
