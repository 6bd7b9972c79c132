//! Lexical scope resolution for identifiers inside one method.
//!
//! Identifier uses and declarations are numbered in a fixed traversal order
//! (see [`walk_bindings`]); the same order is used when renaming, so table
//! indices line up with tree positions without storing node ids in the AST.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::error::DuplicateDeclaration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DeclKind {
    Parameter,
    Local,
    Catch,
    EnhancedFor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DeclId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Declaration {
    pub name: String,
    pub kind: DeclKind,
    pub ty: TypeRef,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Binding {
    Decl(DeclId),
    /// Field, class name or anything else declared outside the method.
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentUse {
    pub name: String,
    pub span: SourceSpan,
    pub binding: Binding,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopeTable {
    pub decls: Vec<Declaration>,
    pub uses: Vec<IdentUse>,
}

impl ScopeTable {
    pub fn decl(&self, id: DeclId) -> &Declaration {
        &self.decls[id.0]
    }

    pub fn uses_of(&self, id: DeclId) -> impl Iterator<Item = &IdentUse> + '_ {
        self.uses.iter().filter(move |u| u.binding == Binding::Decl(id))
    }

    /// Names of identifiers that resolve outside the method.
    pub fn free_names(&self) -> BTreeSet<String> {
        self.uses.iter().filter(|u| u.binding == Binding::Free).map(|u| u.name.clone()).collect()
    }

    /// Every declared or referenced simple name.
    pub fn all_names(&self) -> BTreeSet<String> {
        self.decls.iter().map(|d| d.name.clone()).chain(self.uses.iter().map(|u| u.name.clone())).collect()
    }

    /// Declaration ids grouped by kind, in traversal order.
    pub fn decls_of_kind(&self, kinds: &[DeclKind]) -> Vec<DeclId> {
        (0..self.decls.len()).map(DeclId).filter(|id| kinds.contains(&self.decl(*id).kind)).collect()
    }
}

/// Events emitted while walking a method in binding order.
pub(crate) trait BindingVisitor {
    fn enter(&mut self);
    fn exit(&mut self);
    fn declare(&mut self, name: &mut String, kind: DeclKind, ty: &TypeRef, span: &mut SourceSpan);
    fn use_ident(&mut self, name: &mut String, span: SourceSpan);
}

pub(crate) fn walk_bindings<V: BindingVisitor>(m: &mut Method, v: &mut V) {
    v.enter();
    for p in &mut m.params {
        let mut ty = p.ty.clone();
        if p.varargs {
            ty.dims += 1;
        }
        v.declare(&mut p.name, DeclKind::Parameter, &ty, &mut p.span);
    }
    block(&mut m.body, v);
    v.exit();
}

fn block<V: BindingVisitor>(b: &mut Block, v: &mut V) {
    v.enter();
    for s in &mut b.stmts {
        stmt(s, v);
    }
    v.exit();
}

fn stmt<V: BindingVisitor>(s: &mut Stmt, v: &mut V) {
    match &mut s.kind {
        StmtKind::LocalDecl { ty, name, name_span, init, .. } => {
            if let Some(e) = init {
                expr(e, v);
            }
            v.declare(name, DeclKind::Local, ty, name_span);
        }
        StmtKind::Expr(e) | StmtKind::Throw(e) => expr(e, v),
        StmtKind::Return(e) => {
            if let Some(e) = e {
                expr(e, v);
            }
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            expr(cond, v);
            block(then_branch, v);
            match else_branch {
                Some(ElseBranch::Block(b)) => block(b, v),
                Some(ElseBranch::If(s)) => stmt(s, v),
                None => {}
            }
        }
        StmtKind::For { init, cond, update, body } => {
            v.enter();
            if let Some(i) = init {
                stmt(i, v);
            }
            if let Some(c) = cond {
                expr(c, v);
            }
            if let Some(u) = update {
                expr(u, v);
            }
            block(body, v);
            v.exit();
        }
        StmtKind::EnhancedFor { ty, name, name_span, iterable, body, .. } => {
            expr(iterable, v);
            v.enter();
            v.declare(name, DeclKind::EnhancedFor, ty, name_span);
            block(body, v);
            v.exit();
        }
        StmtKind::While { cond, body } => {
            expr(cond, v);
            block(body, v);
        }
        StmtKind::DoWhile { body, cond } => {
            block(body, v);
            expr(cond, v);
        }
        StmtKind::Break | StmtKind::Continue => {}
        StmtKind::Try { body, catches, finally } => {
            block(body, v);
            for c in catches {
                v.enter();
                v.declare(&mut c.name, DeclKind::Catch, &c.ty, &mut c.name_span);
                block(&mut c.body, v);
                v.exit();
            }
            if let Some(f) = finally {
                block(f, v);
            }
        }
        StmtKind::Block(b) => block(b, v),
    }
}

fn expr<V: BindingVisitor>(e: &mut Expr, v: &mut V) {
    let span = e.span;
    match &mut e.kind {
        ExprKind::Ident(name) => v.use_ident(name, span),
        ExprKind::Literal(_) | ExprKind::This => {}
        ExprKind::FieldAccess { recv, .. } => expr(recv, v),
        ExprKind::ArrayAccess { recv, index } => {
            expr(recv, v);
            expr(index, v);
        }
        ExprKind::MethodCall { recv, args, .. } => {
            if let Some(r) = recv {
                expr(r, v);
            }
            for a in args {
                expr(a, v);
            }
        }
        ExprKind::Binary { lhs, rhs, .. } => {
            expr(lhs, v);
            expr(rhs, v);
        }
        ExprKind::Unary { operand, .. } => expr(operand, v),
        ExprKind::IncDec { target, .. } => expr(target, v),
        ExprKind::Assign { target, value, .. } => {
            expr(target, v);
            expr(value, v);
        }
        ExprKind::Ternary { cond, then_expr, else_expr } => {
            expr(cond, v);
            expr(then_expr, v);
            expr(else_expr, v);
        }
        ExprKind::Cast { expr: inner, .. } | ExprKind::InstanceOf { expr: inner, .. } | ExprKind::Paren(inner) => {
            expr(inner, v)
        }
        ExprKind::New { args, .. } => {
            for a in args {
                expr(a, v);
            }
        }
        ExprKind::ArrayNew { dims, init, .. } => {
            for d in dims {
                expr(d, v);
            }
            for i in init.iter_mut().flatten() {
                expr(i, v);
            }
        }
    }
}

#[derive(Default)]
struct Resolver {
    frames: Vec<Vec<(String, DeclId)>>,
    table: ScopeTable,
    error: Option<DuplicateDeclaration>,
}

impl BindingVisitor for Resolver {
    fn enter(&mut self) {
        self.frames.push(Vec::new());
    }

    fn exit(&mut self) {
        self.frames.pop();
    }

    fn declare(&mut self, name: &mut String, kind: DeclKind, ty: &TypeRef, span: &mut SourceSpan) {
        let span = *span;
        let frame = self.frames.last_mut().expect("declaration outside any scope");
        if frame.iter().any(|(n, _)| n == name) && self.error.is_none() {
            self.error = Some(DuplicateDeclaration { name: name.clone(), span });
        }
        let id = DeclId(self.table.decls.len());
        self.table.decls.push(Declaration { name: name.clone(), kind, ty: ty.clone(), span });
        frame.push((name.clone(), id));
    }

    fn use_ident(&mut self, name: &mut String, span: SourceSpan) {
        let binding = self
            .frames
            .iter()
            .rev()
            .find_map(|f| f.iter().rev().find(|(n, _)| n == name).map(|(_, id)| Binding::Decl(*id)))
            .unwrap_or(Binding::Free);
        self.table.uses.push(IdentUse { name: name.clone(), span, binding });
    }
}

/// Classifies every identifier use; shadowing resolves to the innermost
/// declaration visible at the use site.
pub fn resolve_scopes(m: &Method) -> Result<ScopeTable, DuplicateDeclaration> {
    let mut copy = m.clone();
    let mut r = Resolver::default();
    walk_bindings(&mut copy, &mut r);
    match r.error {
        Some(e) => Err(e),
        None => Ok(r.table),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_method;

    fn kinds_of(src: &str) -> Vec<(String, Option<DeclKind>)> {
        let m = parse_method(src).unwrap();
        let t = resolve_scopes(&m).unwrap();
        t.uses
            .iter()
            .map(|u| {
                (
                    u.name.clone(),
                    match u.binding {
                        Binding::Decl(id) => Some(t.decl(id).kind),
                        Binding::Free => None,
                    },
                )
            })
            .collect()
    }

    #[test]
    fn params_and_locals() {
        assert_eq!(
            kinds_of("int f(int a){ int a2 = a; return a2; }"),
            vec![("a".into(), Some(DeclKind::Parameter)), ("a2".into(), Some(DeclKind::Local))]
        );
    }

    #[test]
    fn out_of_scope_use_is_free() {
        assert_eq!(kinds_of("int f(int a){ { int b=1; } return b; }"), vec![("b".into(), None)]);
    }

    #[test]
    fn catch_and_enhanced_for_variables() {
        let k = kinds_of("void f(int[] xs){ try { g(); } catch (Exception e) { log(e); } for (int x : xs) { h(x); } }");
        assert_eq!(
            k,
            vec![
                ("e".into(), Some(DeclKind::Catch)),
                ("xs".into(), Some(DeclKind::Parameter)),
                ("x".into(), Some(DeclKind::EnhancedFor)),
            ]
        );
    }

    #[test]
    fn shadowing_resolves_innermost() {
        let m = parse_method("int f(int a){ { int a = 2; g(a); } return a; }").unwrap();
        let t = resolve_scopes(&m).unwrap();
        let Binding::Decl(inner) = t.uses[0].binding else { panic!() };
        let Binding::Decl(outer) = t.uses[1].binding else { panic!() };
        assert_eq!(t.decl(inner).kind, DeclKind::Local);
        assert_eq!(t.decl(outer).kind, DeclKind::Parameter);
    }

    #[test]
    fn use_before_declaration_is_not_bound() {
        let k = kinds_of("void f(){ x = 1; int x = 2; g(x); }");
        assert_eq!(k, vec![("x".into(), None), ("x".into(), Some(DeclKind::Local))]);
    }

    #[test]
    fn duplicate_in_one_scope_is_an_error() {
        let m = parse_method("void f(){ int x = 1; int x = 2; }").unwrap();
        let err = resolve_scopes(&m).unwrap_err();
        assert_eq!(err.name, "x");
    }

    #[test]
    fn sequential_for_loops_may_reuse_names() {
        let m =
            parse_method("void f(int n){ for (int i = 0; i < n; i++) { } for (int i = 0; i < n; i++) { } }").unwrap();
        assert!(resolve_scopes(&m).is_ok());
    }
}
