use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::naming::{SynonymProvider, UnmatchedReport};
use crate::syntax::{parse_method, print_method, Method, SourceSpan};
use crate::transforms::{apply_kinds, Manifest, TransformError, TransformKind};

/// One benchmark entry, one JSON line in the corpus manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugRecord {
    pub bug_id: String,
    /// Relative paths are resolved against the manifest's directory.
    pub project_path: PathBuf,
    /// Relative to `project_path`.
    pub source_file: PathBuf,
    /// Byte range of the buggy method in `source_file`.
    pub function_span: SourceSpan,
    #[serde(default)]
    pub javadoc: Option<String>,
    pub trigger_test_name: String,
    pub stack_trace: String,
    /// Shell command with a `{project}` placeholder.
    pub validation_command: String,
    #[serde(default = "default_timeout")]
    pub timeout_s: u64,
    /// Test sources (relative to `project_path`) that mention the function.
    #[serde(default)]
    pub test_files: Vec<PathBuf>,
}

fn default_timeout() -> u64 {
    300
}

impl BugRecord {
    pub fn source_path(&self) -> PathBuf {
        self.project_path.join(&self.source_file)
    }
}

/// A validated record together with its source and parsed method.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedBug {
    pub record: BugRecord,
    pub source_text: String,
    pub method: Method,
}

impl LoadedBug {
    pub fn method_text(&self) -> &str {
        &self.source_text[self.record.function_span.start_offset..self.record.function_span.end_offset]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipReport {
    /// 1-based manifest line.
    pub line: usize,
    pub bug_id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub bugs: Vec<LoadedBug>,
    pub skipped: Vec<SkipReport>,
}

/// Reads a JSON-lines manifest. Lines that are not JSON records are fatal;
/// records that fail validation are skipped and reported.
pub fn load_corpus(manifest_path: &Path) -> Result<Corpus, HarnessError> {
    let text = std::fs::read_to_string(manifest_path).map_err(|e| HarnessError::io(manifest_path, e))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut corpus = Corpus::default();
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut rec: BugRecord = serde_json::from_str(line).map_err(|e| HarnessError::ManifestParse {
            path: manifest_path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        if rec.project_path.is_relative() {
            rec.project_path = base.join(&rec.project_path);
        }
        let skip = |reason: String| SkipReport { line: i + 1, bug_id: Some(rec.bug_id.clone()), reason };
        if !seen.insert(rec.bug_id.clone()) {
            corpus.skipped.push(skip("duplicate bug_id".into()));
            continue;
        }
        match validate(&rec) {
            Ok((source_text, method)) => corpus.bugs.push(LoadedBug { record: rec, source_text, method }),
            Err(reason) => corpus.skipped.push(skip(reason)),
        }
    }
    Ok(corpus)
}

fn validate(rec: &BugRecord) -> Result<(String, Method), String> {
    if !rec.validation_command.contains("{project}") {
        return Err("validation_command lacks the {project} placeholder".into());
    }
    let path = rec.source_path();
    let source = std::fs::read_to_string(&path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let SourceSpan { start_offset: s, end_offset: e, .. } = rec.function_span;
    if s >= e || e > source.len() || !source.is_char_boundary(s) || !source.is_char_boundary(e) {
        return Err(format!("function_span {s}..{e} is outside {}", path.display()));
    }
    let method = parse_method(&source[s..e]).map_err(|err| format!("function_span does not hold a method: {err}"))?;
    for t in &rec.test_files {
        let p = rec.project_path.join(t);
        if !p.is_file() {
            return Err(format!("test file {} not found", p.display()));
        }
    }
    Ok((source, method))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantKind {
    Original,
    Transformed,
}

impl VariantKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VariantKind::Original => "original",
            VariantKind::Transformed => "transformed",
        }
    }
}

impl std::str::FromStr for VariantKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "original" => Ok(VariantKind::Original),
            "transformed" => Ok(VariantKind::Transformed),
            _ => Err(format!("unknown variant `{s}` (expected original or transformed)")),
        }
    }
}

/// What the model is shown and what the project looks like for one variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub bug_id: String,
    pub kind: VariantKind,
    pub method_text: String,
    pub trigger_test_name: String,
    pub stack_trace: String,
    /// Project files replaced before validation, keyed by path relative to the project.
    #[serde(default)]
    pub file_overrides: BTreeMap<PathBuf, String>,
}

impl Variant {
    pub fn original(bug: &LoadedBug) -> Self {
        Variant {
            bug_id: bug.record.bug_id.clone(),
            kind: VariantKind::Original,
            method_text: print_method(&bug.method),
            trigger_test_name: bug.record.trigger_test_name.clone(),
            stack_trace: bug.record.stack_trace.clone(),
            file_overrides: BTreeMap::new(),
        }
    }

    pub fn method(&self) -> Result<Method, HarnessError> {
        parse_method(&self.method_text)
            .map_err(|e| HarnessError::Variant { bug_id: self.bug_id.clone(), message: e.to_string() })
    }
}

/// Output of transforming one bug.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedVariant {
    pub variant: Variant,
    pub method: Method,
    pub manifest: Manifest,
    pub unmatched: UnmatchedReport,
    /// The full source file with the transformed method in place.
    pub source_text: String,
}

/// Applies every transformation to the bug's method and propagates the
/// function rename into the trigger name, stack trace and test files.
pub fn prepare_variant(bug: &LoadedBug, provider: &dyn SynonymProvider) -> Result<PreparedVariant, HarnessError> {
    prepare_variant_with(bug, provider, &TransformKind::ORDER)
}

/// [`prepare_variant`] restricted to `kinds`, still run in canonical order.
pub fn prepare_variant_with(
    bug: &LoadedBug,
    provider: &dyn SynonymProvider,
    kinds: &[TransformKind],
) -> Result<PreparedVariant, HarnessError> {
    let rec = &bug.record;
    let mut texts = vec![rec.trigger_test_name.clone(), rec.stack_trace.clone()];
    for t in &rec.test_files {
        let p = rec.project_path.join(t);
        texts.push(std::fs::read_to_string(&p).map_err(|e| HarnessError::io(&p, e))?);
    }
    let out = apply_kinds(&bug.method, provider, &texts, kinds)
        .map_err(|e: TransformError| HarnessError::Transform { bug_id: rec.bug_id.clone(), source: e })?;
    let method_text = print_method(&out.method);
    let mut file_overrides = BTreeMap::new();
    for (t, text) in rec.test_files.iter().zip(&out.texts[2..]) {
        file_overrides.insert(t.clone(), text.clone());
    }
    let column = rec.function_span.column;
    let source_text = splice(&bug.source_text, rec.function_span, &method_text, column);
    Ok(PreparedVariant {
        variant: Variant {
            bug_id: rec.bug_id.clone(),
            kind: VariantKind::Transformed,
            method_text,
            trigger_test_name: out.texts[0].clone(),
            stack_trace: out.texts[1].clone(),
            file_overrides,
        },
        method: out.method.clone(),
        manifest: out.manifest(&rec.bug_id),
        unmatched: out.unmatched,
        source_text,
    })
}

/// Replaces `span` with `method_text`, indenting continuation lines to the
/// original method's column.
pub fn splice(source: &str, span: SourceSpan, method_text: &str, column: usize) -> String {
    let pad = " ".repeat(column.saturating_sub(1));
    let body = method_text.trim_end().replace('\n', &format!("\n{pad}"));
    let body: String = body.lines().map(str::trim_end).collect::<Vec<_>>().join("\n");
    let mut out = String::with_capacity(source.len() + body.len());
    out.push_str(&source[..span.start_offset]);
    out.push_str(&body);
    out.push_str(&source[span.end_offset..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::naming::DictionaryProvider;
    use std::fs;

    const SRC: &str = "class Calc {\n    int add(int a, int b) {\n        return a - b;\n    }\n}\n";

    fn fixture(dir: &Path) -> BugRecord {
        fs::create_dir_all(dir.join("proj/test")).unwrap();
        fs::write(dir.join("proj/Calc.java"), SRC).unwrap();
        fs::write(dir.join("proj/test/CalcTest.java"), "assertEquals(3, c.add(1, 2)); c.addAll();").unwrap();
        let start = SRC.find("int add").unwrap();
        let end = SRC.rfind("}\n}").unwrap() + 1;
        BugRecord {
            bug_id: "Calc-1".into(),
            project_path: "proj".into(),
            source_file: "Calc.java".into(),
            function_span: SourceSpan::new(start, end, 2, 5),
            javadoc: None,
            trigger_test_name: "CalcTest::testAdd".into(),
            stack_trace: "junit.framework.AssertionFailedError\n\tat Calc.add(Calc.java:3)".into(),
            validation_command: "true {project}".into(),
            timeout_s: 10,
            test_files: vec!["test/CalcTest.java".into()],
        }
    }

    fn write_manifest(dir: &Path, recs: &[BugRecord]) -> PathBuf {
        let p = dir.join("bugs.jsonl");
        let lines: Vec<String> = recs.iter().map(|r| serde_json::to_string(r).unwrap()).collect();
        fs::write(&p, lines.join("\n")).unwrap();
        p
    }

    #[test]
    fn loads_and_skips() {
        let dir = tempfile::tempdir().unwrap();
        let good = fixture(dir.path());
        let mut mid = good.clone();
        mid.bug_id = "Calc-2".into();
        mid.function_span.start_offset += 4;
        let mut nocmd = good.clone();
        nocmd.bug_id = "Calc-3".into();
        nocmd.validation_command = "make test".into();
        let c = load_corpus(&write_manifest(dir.path(), &[good.clone(), mid, nocmd, good])).unwrap();
        assert_eq!(c.bugs.len(), 1);
        assert_eq!(c.bugs[0].method.name, "add");
        assert_eq!(c.skipped.iter().map(|s| s.line).collect::<Vec<_>>(), [2, 3, 4]);
    }

    #[test]
    fn empty_and_malformed_manifests() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.jsonl");
        fs::write(&p, "").unwrap();
        assert!(load_corpus(&p).unwrap().bugs.is_empty());
        fs::write(&p, "{not json").unwrap();
        assert!(matches!(load_corpus(&p), Err(HarnessError::ManifestParse { line: 1, .. })));
    }

    #[test]
    fn variant_renames_everywhere() {
        let dir = tempfile::tempdir().unwrap();
        let rec = fixture(dir.path());
        let c = load_corpus(&write_manifest(dir.path(), &[rec])).unwrap();
        let v = prepare_variant(&c.bugs[0], &DictionaryProvider::bundled()).unwrap();
        assert!(v.variant.method_text.starts_with("int sum("), "{}", v.variant.method_text);
        assert!(v.variant.stack_trace.contains("at Calc.sum("));
        let test = &v.variant.file_overrides[Path::new("test/CalcTest.java")];
        assert!(test.contains("c.sum(1, 2)") && test.contains("addAll"));
        assert_eq!(v.unmatched.len(), 1);
        assert!(v.source_text.starts_with("class Calc {\n    int sum("));
        assert!(v.source_text.ends_with("    }\n}\n"));
        assert_eq!(v.manifest.bug_id, "Calc-1");
    }

    #[test]
    fn splice_touches_only_the_span() {
        let start = SRC.find("int add").unwrap();
        let end = SRC.rfind("}\n}").unwrap() + 1;
        let out = splice(SRC, SourceSpan::new(start, end, 2, 5), "int add(int a, int b) {\n    return a + b;\n}\n", 5);
        assert_eq!(&out[..start], &SRC[..start]);
        assert!(out.ends_with(&SRC[end..]));
        assert!(out.contains("        return a + b;\n    }"));
    }
}
