use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::{info, warn};
use metarepair_core::config::Config;
use metarepair_core::harness::{
    build_prompt, load_corpus, prepare_variant_with, prompt_hash, read_log, run_experiment, Corpus, ExperimentBug,
    LoadedBug, RunConfig, RunResult, Variant, VariantKind,
};
use metarepair_core::stats::{analyze as analyze_stats, parse_nll_jsonl, table_csv, write_reports, AnalysisInput};
use metarepair_core::syntax::{parse_method, print_method};
use metarepair_core::transforms::{Manifest, TransformKind};
use serde::Serialize;

use crate::{CliError, CliResult, VariantSelector};

/// Directory name for a bug id.
pub fn bug_dir_name(bug_id: &str) -> String {
    bug_id.chars().map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' }).collect()
}

pub fn variants_dir(cfg: &Config) -> PathBuf {
    cfg.output_dir.join("variants")
}

pub fn results_path(cfg: &Config) -> PathBuf {
    cfg.output_dir.join("results.jsonl")
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn write(path: &Path, text: &str) -> CliResult {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializes") + "\n"
}

fn load(cfg: &Config) -> Result<Corpus, CliError> {
    let corpus = load_corpus(&cfg.corpus_manifest).map_err(usage)?;
    for s in &corpus.skipped {
        warn!("skipping manifest line {} ({}): {}", s.line, s.bug_id.as_deref().unwrap_or("?"), s.reason);
    }
    Ok(corpus)
}

#[derive(Serialize)]
struct TransformSummary<'a> {
    transformed: Vec<&'a str>,
    failed: Vec<Failure>,
    skipped: &'a [metarepair_core::harness::SkipReport],
}

#[derive(Serialize)]
struct Failure {
    bug_id: String,
    error: String,
}

pub fn transform(cfg: &Config, kinds: &[TransformKind]) -> CliResult {
    let corpus = load(cfg)?;
    let provider = cfg.build_provider().map_err(usage)?;
    let kinds = if kinds.is_empty() { TransformKind::ORDER.to_vec() } else { kinds.to_vec() };
    let mut summary = TransformSummary { transformed: Vec::new(), failed: Vec::new(), skipped: &corpus.skipped };
    for bug in &corpus.bugs {
        let id = &bug.record.bug_id;
        let prepared = match prepare_variant_with(bug, provider.as_ref(), &kinds) {
            Ok(p) => p,
            Err(e) => {
                warn!("{id}: {e}");
                summary.failed.push(Failure { bug_id: id.clone(), error: e.to_string() });
                continue;
            }
        };
        let dir = variants_dir(cfg).join(bug_dir_name(id));
        write(&dir.join("variant.json"), &json(&prepared.variant))?;
        write(&dir.join("manifest.json"), &json(&prepared.manifest))?;
        write(&dir.join("unmatched.json"), &json(&prepared.unmatched))?;
        write(&dir.join("method.java"), &prepared.variant.method_text)?;
        write(&dir.join("project").join(&bug.record.source_file), &prepared.source_text)?;
        for (rel, text) in &prepared.variant.file_overrides {
            write(&dir.join("project").join(rel), text)?;
        }
        let applied: usize = prepared.manifest.records.iter().map(|r| r.applied_count).sum();
        info!("{id}: {applied} edits, {} renames", prepared.manifest.rename_map.len());
        summary.transformed.push(id);
    }
    write(&cfg.output_dir.join("transform_summary.json"), &json(&summary))?;
    println!(
        "transformed {} of {} bugs ({} failed, {} skipped)",
        summary.transformed.len(),
        corpus.bugs.len() + corpus.skipped.len(),
        summary.failed.len(),
        corpus.skipped.len()
    );
    if summary.transformed.is_empty() {
        return Err(CliError::Partial("no bug was transformed".into()));
    }
    Ok(())
}

fn read_variant(cfg: &Config, bug: &LoadedBug) -> Result<Variant, CliError> {
    let p = variants_dir(cfg).join(bug_dir_name(&bug.record.bug_id)).join("variant.json");
    let text = std::fs::read_to_string(&p)
        .map_err(|e| usage(format!("{}: {e} (run `metarepair transform` first)", p.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn experiment_bugs(cfg: &Config, corpus: &Corpus, kinds: &[VariantKind]) -> Result<Vec<ExperimentBug>, CliError> {
    corpus
        .bugs
        .iter()
        .map(|b| {
            let mut variants = Vec::new();
            if kinds.contains(&VariantKind::Original) {
                variants.push(Variant::original(b));
            }
            if kinds.contains(&VariantKind::Transformed) {
                variants.push(read_variant(cfg, b)?);
            }
            Ok(ExperimentBug { record: b.record.clone(), variants })
        })
        .collect()
}

pub fn run(cfg: &Config, selector: VariantSelector) -> CliResult {
    let client = cfg.build_client().map_err(usage)?;
    let corpus = load(cfg)?;
    let kinds = selector.kinds();
    let bugs = experiment_bugs(cfg, &corpus, &kinds)?;
    let rc = RunConfig {
        samples_per_bug: cfg.samples_per_bug,
        patch_count: cfg.patch_count,
        variants: kinds,
        parallelism: cfg.parallelism,
        seed: cfg.seed,
        rules: cfg.markers.clone(),
        log_path: results_path(cfg),
        scratch_dir: None,
    };
    let results = run_experiment(&bugs, client.as_ref(), &rc).map_err(usage)?;
    let mut per: BTreeMap<(&str, VariantKind), (usize, usize, usize)> = BTreeMap::new();
    for r in &results {
        let e = per.entry((&r.bug_id, r.variant)).or_default();
        e.0 += usize::from(r.success);
        e.1 += 1;
        e.2 += usize::from(r.error.is_some());
    }
    let mut errors = 0;
    for ((bug, kind), (ok, n, err)) in &per {
        println!(
            "{bug} {}: {ok}/{n} successful{}",
            kind.as_str(),
            if *err > 0 { format!(", {err} errors") } else { String::new() }
        );
        errors += err;
    }
    if errors > 0 {
        return Err(CliError::Partial(format!("{errors} samples ended with a client error")));
    }
    Ok(())
}

/// Per-bug applied counts from the transform manifests, when present.
type Covariates = BTreeMap<String, BTreeMap<TransformKind, usize>>;

fn covariates(cfg: &Config) -> Result<Option<Covariates>, CliError> {
    let dir = variants_dir(cfg);
    if !dir.is_dir() {
        return Ok(None);
    }
    let mut entries: Vec<_> =
        std::fs::read_dir(&dir).map_err(usage)?.filter_map(Result::ok).map(|e| e.path()).collect();
    entries.sort();
    let mut out = BTreeMap::new();
    for e in entries {
        let p = e.join("manifest.json");
        let Ok(text) = std::fs::read_to_string(&p) else { continue };
        let m: Manifest = serde_json::from_str(&text).map_err(|err| usage(format!("{}: {err}", p.display())))?;
        out.insert(m.bug_id.clone(), m.records.iter().map(|r| (r.kind, r.applied_count)).collect());
    }
    Ok(Some(out))
}

pub fn analyze(cfg: &Config, log: Option<&Path>, nll: Option<&Path>) -> CliResult {
    let log = log.map(Path::to_path_buf).unwrap_or_else(|| results_path(cfg));
    if !log.is_file() {
        return Err(usage(format!("result log {} does not exist", log.display())));
    }
    let results: Vec<RunResult> = read_log(&log, false).map_err(usage)?;
    if results.is_empty() {
        return Err(usage(format!("result log {} is empty", log.display())));
    }
    let nll = match nll {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            Some(parse_nll_jsonl(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?)
        }
        None => None,
    };
    let cov = covariates(cfg)?;
    let input = AnalysisInput {
        results: &results,
        nll: nll.as_deref(),
        covariates: cov.as_ref(),
        permutation_iterations: cfg.permutation_iterations,
        seed: cfg.seed,
    };
    let report = analyze_stats(&input);
    for m in &report.models {
        for n in &m.notices {
            println!("{}: {n}", m.model);
        }
        if let Some(nll) = &m.nll {
            if !nll.missing.is_empty() {
                println!("{}: no NLL value for {}", m.model, nll.missing.join(", "));
            }
        }
    }
    let dir = cfg.output_dir.join("reports");
    let files = write_reports(&dir, &report).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    print!("{}", table_csv(&report));
    info!("wrote {} report files to {}", files.len(), dir.display());
    Ok(())
}

#[derive(Serialize)]
struct PromptRecord<'a> {
    bug_id: &'a str,
    variant: VariantKind,
    hash: String,
    system_text: &'a str,
    user_text: &'a str,
}

pub fn prompts(cfg: &Config, selector: VariantSelector) -> CliResult {
    let corpus = load(cfg)?;
    let bugs = experiment_bugs(cfg, &corpus, &selector.kinds())?;
    for b in &bugs {
        for v in &b.variants {
            let p = build_prompt(&b.record, v, cfg.patch_count);
            let rec = PromptRecord {
                bug_id: &b.record.bug_id,
                variant: v.kind,
                hash: prompt_hash(&p),
                system_text: &p.system_text,
                user_text: &p.user_text,
            };
            let name = format!("{}__{}.json", bug_dir_name(&b.record.bug_id), v.kind.as_str());
            write(&cfg.output_dir.join("prompts").join(name), &json(&rec))?;
            println!("{} {} {}", rec.hash, b.record.bug_id, v.kind.as_str());
        }
    }
    Ok(())
}

pub fn fmt(file: &Path) -> CliResult {
    let text = std::fs::read_to_string(file).map_err(|e| usage(format!("{}: {e}", file.display())))?;
    let m = parse_method(&text).map_err(|e| usage(format!("{}: {e}", file.display())))?;
    print!("{}", print_method(&m));
    Ok(())
}
