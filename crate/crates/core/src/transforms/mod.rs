//! The nine rewrites, their applicability checks and per-kind records.
//!
//! Every node a pass creates or edits gets the [`TRANSFORMED`] span, which
//! later runs of the same pass treat as already handled.

mod rename;
mod structural;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::naming::{NamingError, SynonymProvider, UnmatchedReport};
use crate::syntax::{
    resolve_scopes, walk_block, walk_expr, walk_stmt, DuplicateDeclaration, Expr, ExprKind, Method, SourceSpan, Stmt,
    StmtKind, Visit,
};

pub use rename::rename_identifiers;
pub use structural::{transform_conditionals, transform_increments, transform_loops, transform_operands};

/// Span given to nodes produced by a rewrite.
pub const TRANSFORMED: SourceSpan = SourceSpan { start_offset: usize::MAX, end_offset: usize::MAX, line: 0, column: 0 };

pub fn is_transformed(span: &SourceSpan) -> bool {
    *span == TRANSFORMED
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TransformKind {
    RFun,
    RPar,
    RVar,
    F2W,
    RevIf,
    NestEI,
    SEO,
    SRO,
    EUI,
}

impl TransformKind {
    pub const ALL: [TransformKind; 9] = [
        TransformKind::RFun,
        TransformKind::RPar,
        TransformKind::RVar,
        TransformKind::F2W,
        TransformKind::RevIf,
        TransformKind::NestEI,
        TransformKind::SEO,
        TransformKind::SRO,
        TransformKind::EUI,
    ];

    /// Order in which [`apply_all`] runs the passes.
    pub const ORDER: [TransformKind; 9] = [
        TransformKind::RFun,
        TransformKind::RPar,
        TransformKind::RVar,
        TransformKind::SEO,
        TransformKind::SRO,
        TransformKind::EUI,
        TransformKind::NestEI,
        TransformKind::RevIf,
        TransformKind::F2W,
    ];

    pub fn abbrev(self) -> &'static str {
        match self {
            TransformKind::RFun => "RFun",
            TransformKind::RPar => "RPar",
            TransformKind::RVar => "RVar",
            TransformKind::F2W => "F2W",
            TransformKind::RevIf => "RevIf",
            TransformKind::NestEI => "NestEI",
            TransformKind::SEO => "SEO",
            TransformKind::SRO => "SRO",
            TransformKind::EUI => "EUI",
        }
    }

    pub fn is_rename(self) -> bool {
        matches!(self, TransformKind::RFun | TransformKind::RPar | TransformKind::RVar)
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abbrev())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown transformation `{0}`")]
pub struct UnknownKind(pub String);

impl FromStr for TransformKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TransformKind::ALL
            .into_iter()
            .find(|k| k.abbrev().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SkipReason {
    AlreadyTransformed,
    ContinueWouldSkipUpdate,
    UpdateNameCaptured,
    UpdateUnreachable,
    NoDesugaringDefined,
    ElseIfChain,
    EvaluationOrderSideEffect,
    ValueUsed,
    NoValidSynonym,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Site {
    pub kind: TransformKind,
    pub span: SourceSpan,
    /// Operator, rewritten text or `old->new` for renames.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedSite {
    pub site: Site,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformRecord {
    pub kind: TransformKind,
    pub applied_count: usize,
    pub sites: Vec<Site>,
    pub skipped: Vec<SkippedSite>,
}

impl TransformRecord {
    pub fn new(kind: TransformKind) -> Self {
        Self { kind, applied_count: 0, sites: Vec::new(), skipped: Vec::new() }
    }

    pub(crate) fn apply(&mut self, span: SourceSpan, detail: impl Into<String>) {
        self.sites.push(Site { kind: self.kind, span, detail: detail.into() });
        self.applied_count = self.sites.len();
    }

    pub(crate) fn skip(&mut self, span: SourceSpan, detail: impl Into<String>, reason: SkipReason) {
        self.skipped.push(SkippedSite { site: Site { kind: self.kind, span, detail: detail.into() }, reason });
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SideEffectVerdict {
    Pure,
    Impure(String),
}

/// Pure iff `e` contains no call, assignment, increment or allocation.
pub fn side_effect_verdict(e: &Expr) -> SideEffectVerdict {
    struct Find(Option<&'static str>);
    impl Visit for Find {
        fn visit_expr(&mut self, e: &Expr) {
            let found = match &e.kind {
                ExprKind::MethodCall { .. } => Some("method call"),
                ExprKind::Assign { .. } => Some("assignment"),
                ExprKind::IncDec { .. } => Some("increment"),
                ExprKind::New { .. } => Some("object creation"),
                ExprKind::ArrayNew { .. } => Some("array creation"),
                _ => None,
            };
            if self.0.is_none() {
                self.0 = found;
            }
            walk_expr(self, e);
        }
    }
    let mut f = Find(None);
    f.visit_expr(e);
    match f.0 {
        None => SideEffectVerdict::Pure,
        Some(r) => SideEffectVerdict::Impure(r.to_string()),
    }
}

#[derive(Debug, Error)]
pub enum TransformError {
    #[error(transparent)]
    Naming(#[from] NamingError),
    #[error("method does not resolve: {0}")]
    Scope(#[from] DuplicateDeclaration),
}

/// Result of running a sequence of passes over one method.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformed {
    pub method: Method,
    /// Tests and traces with the function rename applied.
    pub texts: Vec<String>,
    pub records: Vec<TransformRecord>,
    pub rename_map: BTreeMap<String, String>,
    pub unmatched: UnmatchedReport,
}

impl Transformed {
    pub fn record(&self, kind: TransformKind) -> Option<&TransformRecord> {
        self.records.iter().find(|r| r.kind == kind)
    }

    pub fn total_applied(&self) -> usize {
        self.records.iter().map(|r| r.applied_count).sum()
    }

    pub fn manifest(&self, bug_id: &str) -> Manifest {
        Manifest {
            bug_id: bug_id.to_string(),
            order: self.records.iter().map(|r| r.kind).collect(),
            records: self
                .records
                .iter()
                .map(|r| ManifestRecord {
                    kind: r.kind,
                    applied_count: r.applied_count,
                    skipped: r.skipped.iter().map(|s| ManifestSkip { span: s.site.span, reason: s.reason }).collect(),
                })
                .collect(),
            rename_map: self.rename_map.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestSkip {
    pub span: SourceSpan,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub kind: TransformKind,
    pub applied_count: usize,
    pub skipped: Vec<ManifestSkip>,
}

/// Per-bug summary written next to the transformed method.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub bug_id: String,
    pub order: Vec<TransformKind>,
    pub records: Vec<ManifestRecord>,
    pub rename_map: BTreeMap<String, String>,
}

/// Runs every pass in [`TransformKind::ORDER`].
pub fn apply_all(
    method: &Method,
    provider: &dyn SynonymProvider,
    tests_and_traces: &[String],
) -> Result<Transformed, TransformError> {
    apply_kinds(method, provider, tests_and_traces, &TransformKind::ALL)
}

/// Runs the selected passes, still in [`TransformKind::ORDER`].
pub fn apply_kinds(
    method: &Method,
    provider: &dyn SynonymProvider,
    tests_and_traces: &[String],
    kinds: &[TransformKind],
) -> Result<Transformed, TransformError> {
    resolve_scopes(method)?;
    let mut out = Transformed {
        method: method.clone(),
        texts: tests_and_traces.to_vec(),
        records: Vec::new(),
        rename_map: BTreeMap::new(),
        unmatched: UnmatchedReport::default(),
    };
    for kind in TransformKind::ORDER.into_iter().filter(|k| kinds.contains(k)) {
        let rec = if kind.is_rename() {
            rename::rename_pass(kind, &mut out, provider)?
        } else {
            let (m, rec) = apply_structural(kind, &out.method);
            out.method = m;
            rec
        };
        out.records.push(rec);
    }
    Ok(out)
}

/// One structural pass. Rename kinds return the method unchanged.
pub fn apply_structural(kind: TransformKind, method: &Method) -> (Method, TransformRecord) {
    let mut m = method.clone();
    let rec = structural::run(kind, &mut m);
    (m, rec)
}

/// Applicable and skipped sites of `kind`, without changing anything.
pub fn find_sites(kind: TransformKind, method: &Method) -> (Vec<Site>, Vec<SkippedSite>) {
    let rec = if kind.is_rename() { rename::detect(kind, method) } else { apply_structural(kind, method).1 };
    (rec.sites, rec.skipped)
}

/// Number of nodes carrying the [`TRANSFORMED`] span.
pub fn transformed_node_count(m: &Method) -> usize {
    struct Count(usize);
    impl Visit for Count {
        fn visit_block(&mut self, b: &crate::syntax::Block) {
            self.0 += is_transformed(&b.span) as usize;
            walk_block(self, b);
        }
        fn visit_stmt(&mut self, s: &Stmt) {
            self.0 += is_transformed(&s.span) as usize;
            match &s.kind {
                StmtKind::LocalDecl { name_span, .. } | StmtKind::EnhancedFor { name_span, .. } => {
                    self.0 += is_transformed(name_span) as usize
                }
                StmtKind::Try { catches, .. } => {
                    self.0 += catches.iter().filter(|c| is_transformed(&c.name_span)).count();
                }
                _ => {}
            }
            walk_stmt(self, s);
        }
        fn visit_expr(&mut self, e: &Expr) {
            self.0 += is_transformed(&e.span) as usize;
            walk_expr(self, e);
        }
    }
    let mut c = Count(is_transformed(&m.span) as usize + m.params.iter().filter(|p| is_transformed(&p.span)).count());
    c.visit_block(&m.body);
    c.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_expression;

    #[test]
    fn kinds_parse_case_insensitively() {
        assert_eq!("revif".parse::<TransformKind>().unwrap(), TransformKind::RevIf);
        assert!("nope".parse::<TransformKind>().is_err());
        assert_eq!(TransformKind::ORDER.len(), 9);
    }

    #[test]
    fn purity() {
        assert_eq!(side_effect_verdict(&parse_expression("a[i] + b.c * 2").unwrap()), SideEffectVerdict::Pure);
        for src in ["f()", "x = 1", "i++", "new A()", "new int[3]", "a + g(b)"] {
            assert!(
                matches!(side_effect_verdict(&parse_expression(src).unwrap()), SideEffectVerdict::Impure(_)),
                "{src}"
            );
        }
    }
}
