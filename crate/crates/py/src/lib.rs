use std::collections::BTreeMap;
use std::path::PathBuf;

use metarepair_core::harness::read_log;
use metarepair_core::naming::DictionaryProvider;
use metarepair_core::stats::{self, AnalysisInput};
use metarepair_core::syntax;
use metarepair_core::transforms::{apply_kinds, TransformKind};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A parsed Java method.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Method(syntax::Method);

#[pymethods]
impl Method {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        syntax::parse_method(text).map(Method).map_err(err)
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name.clone()
    }

    #[getter]
    fn arity(&self) -> usize {
        self.0.arity()
    }

    fn print(&self) -> String {
        syntax::print_method(&self.0)
    }

    fn structurally_equal(&self, other: &Method) -> bool {
        syntax::structurally_equal(&self.0, &other.0)
    }

    fn __repr__(&self) -> String {
        format!("Method({}/{})", self.0.name, self.0.arity())
    }
}

#[pyclass(frozen, get_all)]
struct Transformed {
    method: Method,
    counts: BTreeMap<String, usize>,
    rename_map: BTreeMap<String, String>,
    texts: Vec<String>,
}

/// Applies the given transformation kinds (all by default) in their fixed order.
#[pyfunction]
#[pyo3(signature = (method, kinds=None, synonyms=None, tests_and_traces=Vec::new()))]
fn transform(
    method: &Method,
    kinds: Option<Vec<String>>,
    synonyms: Option<PathBuf>,
    tests_and_traces: Vec<String>,
) -> PyResult<Transformed> {
    let kinds: Vec<TransformKind> = match kinds {
        Some(k) => k.iter().map(|s| s.parse().map_err(err)).collect::<PyResult<_>>()?,
        None => TransformKind::ALL.to_vec(),
    };
    let dict = match synonyms {
        Some(p) => DictionaryProvider::from_file(&p).map_err(err)?,
        None => DictionaryProvider::bundled(),
    };
    let t = apply_kinds(&method.0, &dict, &tests_and_traces, &kinds).map_err(err)?;
    Ok(Transformed {
        counts: t.records.iter().map(|r| (r.kind.to_string(), r.applied_count)).collect(),
        method: Method(t.method),
        rename_map: t.rename_map,
        texts: t.texts,
    })
}

/// True when both methods agree on `n_inputs` generated inputs.
#[pyfunction]
#[pyo3(signature = (original, transformed, rename_map=BTreeMap::new(), n_inputs=64, seed=0))]
fn differential_check(
    original: &Method,
    transformed: &Method,
    rename_map: BTreeMap<String, String>,
    n_inputs: usize,
    seed: u64,
) -> bool {
    metarepair_core::interpreter::differential_check(&original.0, &transformed.0, &rename_map, n_inputs, seed).is_pass()
}

/// Random Java-like method from the differential-testing generator.
#[pyfunction]
#[pyo3(signature = (seed, size_budget=60))]
fn generate_program(seed: u64, size_budget: usize) -> Method {
    Method(metarepair_core::interpreter::generate_program(seed, size_budget))
}

/// (A12, magnitude label).
#[pyfunction]
fn vargha_delaney(original: Vec<f64>, transformed: Vec<f64>) -> PyResult<(f64, String)> {
    let e = stats::vargha_delaney(&original, &transformed).ok_or_else(|| err("empty input"))?;
    Ok((e.a12, e.magnitude.to_string()))
}

/// (statistic, p_value) of the two-sided signed-rank test.
#[pyfunction]
fn wilcoxon(diffs: Vec<f64>) -> PyResult<(f64, f64)> {
    let w = stats::wilcoxon_signed_rank(&diffs).map_err(err)?;
    Ok((w.statistic, w.p_value))
}

/// (rho, p_value).
#[pyfunction]
fn spearman(x: Vec<f64>, y: Vec<f64>) -> PyResult<(f64, f64)> {
    let c = stats::spearman(&x, &y).map_err(err)?;
    Ok((c.rho, c.p_value))
}

/// Summary table CSV for a result log.
#[pyfunction]
#[pyo3(signature = (log_path, nll_path=None, permutation_iterations=10_000, seed=0))]
fn analyze_log(
    log_path: PathBuf,
    nll_path: Option<PathBuf>,
    permutation_iterations: usize,
    seed: u64,
) -> PyResult<String> {
    let results = read_log(&log_path, false).map_err(err)?;
    let nll = match nll_path {
        Some(p) => Some(stats::parse_nll_jsonl(&std::fs::read_to_string(p)?).map_err(err)?),
        None => None,
    };
    let report = stats::analyze(&AnalysisInput {
        results: &results,
        nll: nll.as_deref(),
        covariates: None,
        permutation_iterations,
        seed,
    });
    Ok(stats::table_csv(&report))
}

#[pymodule]
fn metarepair(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Method>()?;
    m.add_class::<Transformed>()?;
    m.add_function(wrap_pyfunction!(transform, m)?)?;
    m.add_function(wrap_pyfunction!(differential_check, m)?)?;
    m.add_function(wrap_pyfunction!(generate_program, m)?)?;
    m.add_function(wrap_pyfunction!(vargha_delaney, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_log, m)?)?;
    Ok(())
}
