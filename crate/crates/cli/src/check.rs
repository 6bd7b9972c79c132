use std::path::Path;

use log::info;
use metarepair_core::interpreter::{differential_check, generate_program, Counterexample, Verdict};
use metarepair_core::naming::DictionaryProvider;
use metarepair_core::syntax::print_method;
use metarepair_core::transforms::{apply_all, TransformKind};
use rayon::prelude::*;
use serde::Serialize;

use crate::{CliError, CliResult};

#[derive(Serialize)]
struct Failure {
    seed: u64,
    original: String,
    transformed: String,
    counterexample: Option<Counterexample>,
    error: Option<String>,
}

/// A failure, if any, and sites applied per kind for one program.
type Outcome = (Option<Failure>, Vec<(TransformKind, usize)>);

pub fn diff_check(programs: u64, inputs: usize, budget: usize, seed: u64, report: Option<&Path>) -> CliResult {
    let dict = DictionaryProvider::bundled();
    let outcomes: Vec<Outcome> = (seed..seed + programs)
        .into_par_iter()
        .map(|s| {
            let m = generate_program(s, budget);
            let original = print_method(&m);
            match apply_all(&m, &dict, &[]) {
                Err(e) => {
                    let f = Failure {
                        seed: s,
                        original,
                        transformed: String::new(),
                        counterexample: None,
                        error: Some(e.to_string()),
                    };
                    (Some(f), Vec::new())
                }
                Ok(t) => {
                    let counts = t.records.iter().map(|r| (r.kind, r.applied_count)).collect();
                    let fail = match differential_check(&m, &t.method, &t.rename_map, inputs, s) {
                        Verdict::Pass => None,
                        Verdict::Fail(cx) => Some(Failure {
                            seed: s,
                            original,
                            transformed: print_method(&t.method),
                            counterexample: Some(*cx),
                            error: None,
                        }),
                    };
                    (fail, counts)
                }
            }
        })
        .collect();
    let mut totals = std::collections::BTreeMap::new();
    for (_, counts) in &outcomes {
        for (k, n) in counts {
            *totals.entry(*k).or_insert(0usize) += n;
        }
    }
    for (k, n) in &totals {
        info!("{k}: {n} edits");
    }
    let failures: Vec<Failure> = outcomes.into_iter().filter_map(|o| o.0).collect();
    println!("{} of {programs} programs preserved behaviour on {inputs} inputs", programs as usize - failures.len());
    if let Some(p) = report {
        let text = serde_json::to_string_pretty(&failures).expect("serializes") + "\n";
        std::fs::write(p, text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Partial(format!("{} programs changed behaviour", failures.len())))
    }
}
