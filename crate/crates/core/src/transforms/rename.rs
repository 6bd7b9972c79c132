use std::collections::{BTreeSet, HashMap};

use super::{
    apply_kinds, is_transformed, SkipReason, TransformError, TransformKind, TransformRecord, Transformed, TRANSFORMED,
};
use crate::naming::{propose_synonym, update_references, NamingError, Role, SynonymProvider, SynonymRequest};
use crate::syntax::scope::{walk_bindings, BindingVisitor};
use crate::syntax::{
    print_method, resolve_scopes, walk_expr, walk_expr_mut, walk_stmt, Binding, DeclKind, Expr, ExprKind, Method,
    ScopeTable, SourceSpan, Stmt, StmtKind, TypeRef, Visit, VisitMut,
};

/// RFun, RPar and RVar in order; the function's new name is also written
/// into `tests_and_traces`.
pub fn rename_identifiers(
    method: &Method,
    provider: &dyn SynonymProvider,
    tests_and_traces: &[String],
) -> Result<Transformed, TransformError> {
    apply_kinds(method, provider, tests_and_traces, &[TransformKind::RFun, TransformKind::RPar, TransformKind::RVar])
}

fn decl_kinds(kind: TransformKind) -> &'static [DeclKind] {
    match kind {
        TransformKind::RPar => &[DeclKind::Parameter],
        _ => &[DeclKind::Local, DeclKind::Catch, DeclKind::EnhancedFor],
    }
}

pub(crate) fn detect(kind: TransformKind, m: &Method) -> TransformRecord {
    let mut rec = TransformRecord::new(kind);
    if kind == TransformKind::RFun {
        if is_transformed(&m.span) {
            rec.skip(m.span, m.name.clone(), SkipReason::AlreadyTransformed);
        } else {
            rec.apply(m.span, m.name.clone());
        }
        return rec;
    }
    let Ok(table) = resolve_scopes(m) else { return rec };
    for id in table.decls_of_kind(decl_kinds(kind)) {
        let d = table.decl(id);
        if is_transformed(&d.span) {
            rec.skip(d.span, d.name.clone(), SkipReason::AlreadyTransformed);
        } else {
            rec.apply(d.span, d.name.clone());
        }
    }
    rec
}

/// Every simple name the method mentions, including callee, field and type names.
fn method_names(m: &Method, table: &ScopeTable) -> BTreeSet<String> {
    struct Names(BTreeSet<String>);
    impl Names {
        fn ty(&mut self, t: &TypeRef) {
            for part in t.name.split('.') {
                self.0.insert(part.to_string());
            }
            t.args.iter().for_each(|a| self.ty(a));
        }
    }
    impl Visit for Names {
        fn visit_stmt(&mut self, s: &Stmt) {
            match &s.kind {
                StmtKind::LocalDecl { ty, .. } | StmtKind::EnhancedFor { ty, .. } => self.ty(ty),
                StmtKind::Try { catches, .. } => catches.iter().for_each(|c| self.ty(&c.ty)),
                _ => {}
            }
            walk_stmt(self, s);
        }
        fn visit_expr(&mut self, e: &Expr) {
            match &e.kind {
                ExprKind::MethodCall { name, .. } | ExprKind::FieldAccess { name, .. } => {
                    self.0.insert(name.clone());
                }
                ExprKind::Cast { ty, .. } | ExprKind::New { ty, .. } | ExprKind::InstanceOf { ty, .. } => self.ty(ty),
                ExprKind::ArrayNew { elem, .. } => self.ty(elem),
                _ => {}
            }
            walk_expr(self, e);
        }
    }
    let mut n = Names(table.all_names());
    n.0.insert(m.name.clone());
    n.ty(&m.return_type);
    m.params.iter().for_each(|p| n.ty(&p.ty));
    m.throws.iter().for_each(|t| n.ty(t));
    n.visit_block(&m.body);
    n.0
}

struct Renamer<'a> {
    table: &'a ScopeTable,
    new_names: &'a HashMap<usize, String>,
    decl_i: usize,
    use_i: usize,
}

impl BindingVisitor for Renamer<'_> {
    fn enter(&mut self) {}
    fn exit(&mut self) {}

    fn declare(&mut self, name: &mut String, _: DeclKind, _: &TypeRef, span: &mut SourceSpan) {
        if let Some(n) = self.new_names.get(&self.decl_i) {
            *name = n.clone();
            *span = TRANSFORMED;
        }
        self.decl_i += 1;
    }

    fn use_ident(&mut self, name: &mut String, _: SourceSpan) {
        if let Binding::Decl(id) = self.table.uses[self.use_i].binding {
            if let Some(n) = self.new_names.get(&id.0) {
                *name = n.clone();
            }
        }
        self.use_i += 1;
    }
}

struct SelfCalls<'a> {
    old: &'a str,
    new: &'a str,
    arity: usize,
}

impl VisitMut for SelfCalls<'_> {
    fn visit_expr_mut(&mut self, e: &mut Expr) {
        if let ExprKind::MethodCall { recv, name, args } = &mut e.kind {
            let own = recv.as_ref().is_none_or(|r| matches!(r.kind, ExprKind::This));
            if own && name == self.old && args.len() == self.arity {
                *name = self.new.to_string();
            }
        }
        walk_expr_mut(self, e);
    }
}

fn ask(
    provider: &dyn SynonymProvider,
    name: &str,
    role: Role,
    context: &str,
    forbidden: BTreeSet<String>,
) -> Result<Option<String>, TransformError> {
    match propose_synonym(provider, &SynonymRequest::new(name, role, context, forbidden)) {
        Ok(n) => Ok(Some(n)),
        Err(NamingError::NoValidSynonym { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub(crate) fn rename_pass(
    kind: TransformKind,
    out: &mut Transformed,
    provider: &dyn SynonymProvider,
) -> Result<TransformRecord, TransformError> {
    let mut rec = TransformRecord::new(kind);
    let table = resolve_scopes(&out.method)?;
    let mut forbidden = method_names(&out.method, &table);
    forbidden.extend(out.rename_map.keys().cloned());
    forbidden.extend(out.rename_map.values().cloned());
    let context = print_method(&out.method);

    if kind == TransformKind::RFun {
        let m = &mut out.method;
        let (old, span) = (m.name.clone(), m.span);
        if is_transformed(&span) {
            rec.skip(span, old, SkipReason::AlreadyTransformed);
            return Ok(rec);
        }
        let Some(new) = ask(provider, &old, Role::Function, &context, forbidden)? else {
            rec.skip(span, old, SkipReason::NoValidSynonym);
            return Ok(rec);
        };
        SelfCalls { old: &old, new: &new, arity: m.arity() }.visit_block_mut(&mut m.body);
        m.name = new.clone();
        m.span = TRANSFORMED;
        let (texts, report) = update_references(&out.texts, &old, &new);
        out.texts = texts;
        out.unmatched.entries.extend(report.entries);
        rec.apply(span, format!("{old}->{new}"));
        out.rename_map.insert(old, new);
        return Ok(rec);
    }

    let role = if kind == TransformKind::RPar { Role::Parameter } else { Role::Local };
    let mut chosen: HashMap<String, Option<String>> = HashMap::new();
    let mut new_names = HashMap::new();
    for id in table.decls_of_kind(decl_kinds(kind)) {
        let d = table.decl(id);
        if is_transformed(&d.span) {
            rec.skip(d.span, d.name.clone(), SkipReason::AlreadyTransformed);
            continue;
        }
        if !chosen.contains_key(&d.name) {
            let pick = match out.rename_map.get(&d.name) {
                Some(prev) => Some(prev.clone()),
                None => ask(provider, &d.name, role, &context, forbidden.clone())?,
            };
            if let Some(n) = &pick {
                forbidden.insert(n.clone());
            }
            chosen.insert(d.name.clone(), pick);
        }
        match &chosen[&d.name] {
            Some(n) => {
                rec.apply(d.span, format!("{}->{n}", d.name));
                new_names.insert(id.0, n.clone());
            }
            None => rec.skip(d.span, d.name.clone(), SkipReason::NoValidSynonym),
        }
    }
    walk_bindings(&mut out.method, &mut Renamer { table: &table, new_names: &new_names, decl_i: 0, use_i: 0 });
    let mut pairs: Vec<(String, String)> = chosen.into_iter().filter_map(|(o, n)| n.map(|n| (o, n))).collect();
    pairs.sort();
    out.rename_map.extend(pairs);
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::naming::{DictionaryProvider, ProviderError};
    use crate::syntax::parse_method;

    #[test]
    fn table_rows() {
        let d = DictionaryProvider::bundled();
        let m = parse_method("int add(int a, int b) { return a + b; }").unwrap();
        let t = apply_kinds(&m, &d, &[], &[TransformKind::RFun]).unwrap();
        assert!(print_method(&t.method).starts_with("int sum(int a, int b)"));
        let m = parse_method("void remove(int element) { log(element); }").unwrap();
        let t = apply_kinds(&m, &d, &[], &[TransformKind::RPar]).unwrap();
        assert!(print_method(&t.method).contains("void remove(int value)"));
        assert!(print_method(&t.method).contains("log(value)"));
        let m = parse_method("void f() { int total; }").unwrap();
        let t = apply_kinds(&m, &d, &[], &[TransformKind::RVar]).unwrap();
        assert!(print_method(&t.method).contains("int result;"));
    }

    #[test]
    fn recursion_and_tests_follow_function_name() {
        let d = DictionaryProvider::bundled();
        let m = parse_method("int add(int n) { return n <= 0 ? 0 : add(n - 1) + this.add(0) + add(1, 2); }").unwrap();
        let tests = vec!["assertEquals(3, add(1));\nx.addAll(y);".to_string()];
        let t = apply_kinds(&m, &d, &tests, &[TransformKind::RFun]).unwrap();
        let p = print_method(&t.method);
        assert!(p.contains("sum(n - 1) + this.sum(0) + add(1, 2)"), "{p}");
        assert_eq!(t.texts[0], "assertEquals(3, sum(1));\nx.addAll(y);");
        assert_eq!(t.unmatched.len(), 1);
    }

    #[test]
    fn one_name_per_old_name_and_no_collisions() {
        let d = DictionaryProvider::bundled();
        let m = parse_method(
            "int f(int i, int idx) { int s = 0; for (int j = 0; j < i; j++) { s += j; } for (int j = 0; j < idx; j++) { s -= j; } return s; }",
        )
        .unwrap();
        let t = rename_identifiers(&m, &d, &[]).unwrap();
        let table = resolve_scopes(&t.method).unwrap();
        let names: BTreeSet<&str> = table.decls.iter().map(|d| d.name.as_str()).collect();
        assert_eq!(names.len(), 4, "{names:?}");
        assert!(!names.contains("i") && !names.contains("idx") && !names.contains("j"));
        assert_eq!(t.record(TransformKind::RVar).unwrap().applied_count, 3);
        let values: BTreeSet<&String> = t.rename_map.values().collect();
        assert_eq!(values.len(), t.rename_map.len());
    }

    #[test]
    fn bindings_survive_renaming() {
        let d = DictionaryProvider::bundled();
        let m = parse_method("int f(int a) { int b = a; { int c = b + a; b = c; } return b + count; }").unwrap();
        let before = resolve_scopes(&m).unwrap();
        let t = rename_identifiers(&m, &d, &[]).unwrap();
        let after = resolve_scopes(&t.method).unwrap();
        let bind: Vec<Binding> = before.uses.iter().map(|u| u.binding).collect();
        assert_eq!(bind, after.uses.iter().map(|u| u.binding).collect::<Vec<_>>());
        assert!(after.all_names().contains("count"));
    }

    struct Down;
    impl SynonymProvider for Down {
        fn propose(&self, _: &SynonymRequest) -> Result<String, ProviderError> {
            Err(ProviderError("connection refused".into()))
        }
    }

    struct Stubborn;
    impl SynonymProvider for Stubborn {
        fn propose(&self, r: &SynonymRequest) -> Result<String, ProviderError> {
            Ok(r.original_name.clone())
        }
    }

    #[test]
    fn provider_failure_aborts_and_refusals_skip() {
        let m = parse_method("int f(int a) { return a; }").unwrap();
        assert!(matches!(
            rename_identifiers(&m, &Down, &[]),
            Err(TransformError::Naming(NamingError::ProviderFailure { .. }))
        ));
        let t = rename_identifiers(&m, &Stubborn, &[]).unwrap();
        assert_eq!(t.total_applied(), 0);
        assert!(t.records.iter().all(|r| r.skipped.iter().all(|s| s.reason == SkipReason::NoValidSynonym)));
    }

    #[test]
    fn renamed_declarations_are_marked() {
        let d = DictionaryProvider::bundled();
        let m = parse_method("int f(int a) { int b = a; return b; }").unwrap();
        let t = rename_identifiers(&m, &d, &[]).unwrap();
        for k in [TransformKind::RFun, TransformKind::RPar, TransformKind::RVar] {
            assert_eq!(detect(k, &t.method).applied_count, 0);
        }
        assert_eq!(super::super::transformed_node_count(&t.method), 3);
    }
}
