use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/toy")
}

fn metarepair(args: &[&str], manifest: &Path, replay: &Path, out: &Path) -> Output {
    let bin = Path::new(env!("CARGO_BIN_EXE_metarepair"));
    let path = format!("{}:{}", bin.parent().unwrap().display(), std::env::var("PATH").unwrap_or_default());
    Command::new(bin)
        .args(args)
        .arg("--corpus-manifest")
        .arg(manifest)
        .arg("--replay-dir")
        .arg(replay)
        .arg("--output-dir")
        .arg(out)
        .arg("--permutation-iterations")
        .arg("1000")
        .env("PATH", path)
        .output()
        .unwrap()
}

fn toy(args: &[&str], out: &Path) -> Output {
    metarepair(args, &fixtures().join("corpus.jsonl"), &fixtures().join("replay"), out)
}

fn ok(o: Output) -> Output {
    assert!(o.status.success(), "exit {:?}\n{}", o.status.code(), String::from_utf8_lossy(&o.stderr));
    o
}

fn read_dir_sorted(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out: Vec<_> = walk(dir)
        .into_iter()
        .map(|p| (p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    std::fs::read_dir(dir)
        .unwrap()
        .flatten()
        .flat_map(|e| if e.path().is_dir() { walk(&e.path()) } else { vec![e.path()] })
        .collect()
}

#[test]
fn transform_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(toy(&["transform"], &a));
    ok(toy(&["transform"], &b));
    let (va, vb) = (read_dir_sorted(&a.join("variants")), read_dir_sorted(&b.join("variants")));
    assert!(!va.is_empty());
    assert_eq!(va, vb);
    assert_eq!(
        std::fs::read(a.join("transform_summary.json")).unwrap(),
        std::fs::read(b.join("transform_summary.json")).unwrap()
    );
}

#[test]
fn missing_manifest_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = metarepair(&["transform"], &tmp.path().join("nope.jsonl"), &fixtures().join("replay"), tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_replay_dir_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    ok(toy(&["transform"], &out));
    let o = metarepair(&["run"], &fixtures().join("corpus.jsonl"), &tmp.path().join("nope"), &out);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn corpus_without_parseable_methods_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let project = tmp.path().join("p");
    std::fs::create_dir_all(project.join("src")).unwrap();
    std::fs::write(project.join("src/X.java"), "class X { this is not java }\n").unwrap();
    let line = serde_json::json!({
        "bug_id": "X-1", "project_path": "p", "source_file": "src/X.java",
        "function_span": {"start_offset": 10, "end_offset": 29, "line": 1, "column": 11},
        "javadoc": null, "trigger_test_name": "XTest::t", "stack_trace": "",
        "validation_command": "true", "timeout_s": 5,
    });
    let manifest = tmp.path().join("corpus.jsonl");
    std::fs::write(&manifest, format!("{line}\n")).unwrap();
    let o = metarepair(&["transform"], &manifest, &fixtures().join("replay"), &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn original_only_run_and_resume() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    ok(toy(&["transform"], &out));
    ok(toy(&["run", "--variant", "original"], &out));
    let log_path = out.join("results.jsonl");
    let log = std::fs::read_to_string(&log_path).unwrap();
    assert_eq!(log.lines().count(), 20);
    assert!(log.lines().all(|l| l.contains("\"variant\":\"original\"")));

    ok(toy(&["run"], &out));
    let full = std::fs::read_to_string(&log_path).unwrap();
    assert_eq!(full.lines().count(), 40);

    // Cut the log mid-line and resume.
    std::fs::write(&log_path, &full[..full.len() * 2 / 3]).unwrap();
    ok(toy(&["run"], &out));
    assert_eq!(std::fs::read_to_string(&log_path).unwrap(), full);
}

#[test]
fn analyze_with_and_without_nll() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    assert_eq!(toy(&["analyze"], &out).status.code(), Some(2));
    ok(toy(&["transform"], &out));
    ok(toy(&["run"], &out));
    ok(toy(&["analyze"], &out));
    let reports = out.join("reports");
    let table = std::fs::read_to_string(reports.join("table.csv")).unwrap();
    assert!(table.lines().nth(1).unwrap().starts_with("replay,2,"));
    assert!(!reports.join("nll_bins.csv").exists());

    let nll = tmp.path().join("nll.jsonl");
    std::fs::write(&nll, "{\"bug_id\":\"Toy-1\",\"mean_nll\":0.4}\n{\"bug_id\":\"Toy-2\",\"mean_nll\":0.9}\n").unwrap();
    ok(toy(&["analyze", "--nll", nll.to_str().unwrap()], &out));
    assert!(reports.join("nll_bins.csv").exists());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(reports.join("report.json")).unwrap()).unwrap();
    assert!(report.to_string().contains("nll"));
}
