//! Test runner for toy projects: a one-method class plus assertion files,
//! executed on the reference interpreter. Its output mimics a build tool so
//! the default compile-failure markers apply.

use std::path::{Path, PathBuf};

use metarepair_core::interpreter::{evaluate, Outcome, StubEnv, Value, DEFAULT_FUEL};
use metarepair_core::syntax::{parse_expression, parse_method, print_expr, Expr, ExprKind, Method};
use serde::Deserialize;

use crate::{CliError, CliResult};

#[derive(Deserialize)]
struct ToyProject {
    source: PathBuf,
    tests: Vec<PathBuf>,
}

struct Assertion {
    test: String,
    line: usize,
    expected: Expr,
    callee: String,
    args: Vec<Expr>,
}

fn compile_error(msg: String) -> CliError {
    println!("COMPILATION ERROR: {msg}");
    CliError::Partial("compilation failed".into())
}

/// The method inside the outermost braces of a class file.
fn class_method(text: &str) -> Result<Method, String> {
    let open = text.find('{').ok_or("no class body")?;
    let close = text.rfind('}').filter(|c| *c > open).ok_or("no class body")?;
    parse_method(text[open + 1..close].trim()).map_err(|e| e.to_string())
}

fn assertions(text: &str, file: &str) -> Result<Vec<Assertion>, String> {
    let mut out = Vec::new();
    let mut test = String::from("test");
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(rest) = t.strip_prefix("void ").or_else(|| t.strip_prefix("public void ")) {
            test = rest.split('(').next().unwrap_or("test").trim().to_string();
            continue;
        }
        let Some(call) = t.strip_suffix(';').filter(|c| c.starts_with("assertEquals(")) else { continue };
        let e = parse_expression(call).map_err(|e| format!("{file}:{}: error: {e}", i + 1))?;
        let ExprKind::MethodCall { args, .. } = e.kind else { unreachable!("prefix checked") };
        let [expected, actual] = <[Expr; 2]>::try_from(args)
            .map_err(|_| format!("{file}:{}: error: assertEquals takes 2 arguments", i + 1))?;
        let ExprKind::MethodCall { recv: None, name, args } = actual.kind else {
            return Err(format!("{file}:{}: error: second argument must call the method under test", i + 1));
        };
        out.push(Assertion { test: test.clone(), line: i + 1, expected, callee: name, args });
    }
    Ok(out)
}

/// Value of a constant expression of type `ty`.
fn constant(ty: &str, e: &Expr) -> Result<Value, String> {
    let m = parse_method(&format!("{ty} constant() {{ return {}; }}", print_expr(e))).map_err(|e| e.to_string())?;
    match evaluate(&m, &[], DEFAULT_FUEL, &StubEnv::default()).map_err(|e| e.to_string())?.outcome {
        Outcome::Return(v) => Ok(v),
        other => Err(format!("{} is not a constant: {other:?}", print_expr(e))),
    }
}

pub fn run(project: &Path) -> CliResult {
    let cfg_path = project.join("toy.json");
    let cfg: ToyProject = std::fs::read_to_string(&cfg_path)
        .map_err(|e| e.to_string())
        .and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string()))
        .map_err(|e| CliError::Usage(format!("{}: {e}", cfg_path.display())))?;
    let src = project.join(&cfg.source);
    let text = std::fs::read_to_string(&src).map_err(|e| CliError::Usage(format!("{}: {e}", src.display())))?;
    let method = class_method(&text).map_err(|e| compile_error(format!("{}: error: {e}", cfg.source.display())))?;

    let mut cases = Vec::new();
    for t in &cfg.tests {
        let p = project.join(t);
        let text = std::fs::read_to_string(&p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
        cases.extend(assertions(&text, &t.display().to_string()).map_err(compile_error)?);
    }
    for a in &cases {
        if a.callee != method.name || a.args.len() != method.params.len() {
            return Err(compile_error(format!(
                "line {}: error: cannot find symbol {}/{}",
                a.line,
                a.callee,
                a.args.len()
            )));
        }
    }

    let mut failed: Vec<String> = Vec::new();
    for a in &cases {
        let args: Result<Vec<Value>, String> = method
            .params
            .iter()
            .zip(&a.args)
            .map(|(p, e)| constant(&metarepair_core::syntax::print_type(&p.ty), e))
            .collect();
        let expected = constant(&metarepair_core::syntax::print_type(&method.return_type), &a.expected);
        let (args, expected) = match (args, expected) {
            (Ok(a), Ok(e)) => (a, e),
            (Err(e), _) | (_, Err(e)) => return Err(compile_error(format!("line {}: error: {e}", a.line))),
        };
        let got = match evaluate(&method, &args, DEFAULT_FUEL, &StubEnv::default()).map(|t| t.outcome) {
            Ok(Outcome::Return(v)) if v == expected => continue,
            Ok(Outcome::Return(v)) => v.to_string(),
            Ok(Outcome::Thrown(ex)) => format!("exception {ex}"),
            Ok(Outcome::FuelExhausted) => "no result (step limit)".to_string(),
            Err(e) => e.to_string(),
        };
        if !failed.contains(&a.test) {
            println!("FAIL {} (line {}): expected {expected}, got {got}", a.test, a.line);
            failed.push(a.test.clone());
        }
    }
    let mut tests: Vec<&str> = cases.iter().map(|a| a.test.as_str()).collect();
    tests.dedup();
    println!("Tests run: {}, Failures: {}", tests.len(), failed.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Partial("tests failed".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_assertions_per_test() {
        let a = assertions("class T {\n  void small() {\n    assertEquals(6, sum(3));\n  }\n  void zero() { }\n    assertEquals(0, sum(0));\n}\n", "T.java").unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!((a[0].test.as_str(), a[0].callee.as_str(), a[0].line), ("small", "sum", 3));
        assert_eq!(a[1].test, "zero");
    }

    #[test]
    fn extracts_the_method() {
        let m = class_method("public class A {\n    int f(int x) {\n        return x;\n    }\n}\n").unwrap();
        assert_eq!(m.name, "f");
        assert_eq!(constant("long", &parse_expression("3L * 2").unwrap()).unwrap(), Value::long(6));
    }
}
