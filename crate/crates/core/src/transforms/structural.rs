use std::collections::BTreeSet;

use super::{
    is_transformed, side_effect_verdict, SideEffectVerdict, SkipReason, TransformKind, TransformRecord, TRANSFORMED,
};
use crate::syntax::{
    print_expr, walk_block_mut, walk_expr, walk_expr_mut, walk_stmt, walk_stmt_mut, AssignOp, BinaryOp, Block,
    ElseBranch, Expr, ExprKind, IncDecOp, Literal, Method, Stmt, StmtKind, TypeRef, UnaryOp, Visit, VisitMut,
};

pub(crate) fn run(kind: TransformKind, m: &mut Method) -> TransformRecord {
    let mut rec = TransformRecord::new(kind);
    match kind {
        TransformKind::SEO | TransformKind::SRO => Operands { rec: &mut rec }.visit_block_mut(&mut m.body),
        TransformKind::EUI => Increments { rec: &mut rec }.visit_block_mut(&mut m.body),
        TransformKind::NestEI => NestElseIf { rec: &mut rec }.visit_block_mut(&mut m.body),
        TransformKind::RevIf => {
            let params = m
                .params
                .iter()
                .map(|p| {
                    let mut ty = p.ty.clone();
                    ty.dims += p.varargs as usize;
                    (p.name.clone(), ty)
                })
                .collect();
            ReverseIf { rec: &mut rec, env: vec![params] }.visit_block_mut(&mut m.body)
        }
        TransformKind::F2W => ForToWhile { rec: &mut rec }.visit_block_mut(&mut m.body),
        TransformKind::RFun | TransformKind::RPar | TransformKind::RVar => {}
    }
    rec
}

fn apply(kind: TransformKind, m: &Method) -> (Method, TransformRecord) {
    let mut m = m.clone();
    let rec = run(kind, &mut m);
    (m, rec)
}

/// F2W.
pub fn transform_loops(m: &Method) -> (Method, TransformRecord) {
    apply(TransformKind::F2W, m)
}

/// NestEI, then RevIf.
pub fn transform_conditionals(m: &Method) -> (Method, Vec<TransformRecord>) {
    let (m, a) = apply(TransformKind::NestEI, m);
    let (m, b) = apply(TransformKind::RevIf, &m);
    (m, vec![a, b])
}

/// SEO, then SRO.
pub fn transform_operands(m: &Method) -> (Method, Vec<TransformRecord>) {
    let (m, a) = apply(TransformKind::SEO, m);
    let (m, b) = apply(TransformKind::SRO, &m);
    (m, vec![a, b])
}

/// EUI.
pub fn transform_increments(m: &Method) -> (Method, TransformRecord) {
    apply(TransformKind::EUI, m)
}

struct Operands<'a> {
    rec: &'a mut TransformRecord,
}

/// Whether evaluating `e` can raise an exception.
fn may_throw(e: &Expr) -> bool {
    struct Find(bool);
    impl Visit for Find {
        fn visit_expr(&mut self, e: &Expr) {
            self.0 |= match &e.kind {
                ExprKind::ArrayAccess { .. } => true,
                ExprKind::FieldAccess { recv, .. } => match &recv.kind {
                    ExprKind::This => false,
                    ExprKind::Ident(q) => !q.starts_with(|c: char| c.is_ascii_uppercase()),
                    _ => true,
                },
                ExprKind::Binary { op: BinaryOp::Div | BinaryOp::Rem, .. } => true,
                ExprKind::Cast { ty, .. } => !ty.is_primitive(),
                ExprKind::MethodCall { .. } | ExprKind::New { .. } | ExprKind::ArrayNew { .. } => true,
                _ => false,
            };
            walk_expr(self, e);
        }
    }
    let mut f = Find(false);
    f.visit_expr(e);
    f.0
}

impl VisitMut for Operands<'_> {
    fn visit_expr_mut(&mut self, e: &mut Expr) {
        walk_expr_mut(self, e);
        let span = e.span;
        let ExprKind::Binary { op, lhs, rhs } = &mut e.kind else { return };
        let wanted = match self.rec.kind {
            TransformKind::SEO => op.is_equality(),
            _ => op.is_relational(),
        };
        if !wanted {
            return;
        }
        let detail = op.symbol();
        if is_transformed(&span) {
            self.rec.skip(span, detail, SkipReason::AlreadyTransformed);
            return;
        }
        let pure = |x: &Expr| side_effect_verdict(x) == SideEffectVerdict::Pure;
        if !pure(lhs) || !pure(rhs) || (may_throw(lhs) && may_throw(rhs)) {
            self.rec.skip(span, detail, SkipReason::EvaluationOrderSideEffect);
            return;
        }
        std::mem::swap(lhs, rhs);
        *op = op.mirror();
        e.span = TRANSFORMED;
        self.rec.apply(span, detail);
    }
}

struct Increments<'a> {
    rec: &'a mut TransformRecord,
}

impl Increments<'_> {
    /// Rewrites a statement-level `i++` in place.
    fn expand(&mut self, e: &mut Expr) {
        if !matches!(e.kind, ExprKind::IncDec { .. }) {
            return;
        }
        let detail = print_expr(e);
        let ExprKind::IncDec { op, target, .. } = std::mem::replace(&mut e.kind, ExprKind::This) else {
            unreachable!()
        };
        let aop = match op {
            IncDecOp::Inc => AssignOp::Add,
            IncDecOp::Dec => AssignOp::Sub,
        };
        self.rec.apply(e.span, detail);
        e.kind = ExprKind::Assign { op: aop, target, value: Box::new(Expr::int("1")) };
        e.span = TRANSFORMED;
    }
}

impl VisitMut for Increments<'_> {
    fn visit_stmt_mut(&mut self, s: &mut Stmt) {
        match &mut s.kind {
            StmtKind::Expr(e) => self.expand(e),
            StmtKind::For { update: Some(u), .. } => self.expand(u),
            _ => {}
        }
        walk_stmt_mut(self, s);
    }

    fn visit_expr_mut(&mut self, e: &mut Expr) {
        if matches!(e.kind, ExprKind::IncDec { .. }) {
            self.rec.skip(e.span, print_expr(e), SkipReason::ValueUsed);
        }
        walk_expr_mut(self, e);
    }
}

struct NestElseIf<'a> {
    rec: &'a mut TransformRecord,
}

impl VisitMut for NestElseIf<'_> {
    fn visit_stmt_mut(&mut self, s: &mut Stmt) {
        walk_stmt_mut(self, s);
        let StmtKind::If { else_branch, .. } = &mut s.kind else { return };
        if !matches!(else_branch, Some(ElseBranch::If(_))) {
            return;
        }
        if let Some(ElseBranch::If(inner)) = else_branch.take() {
            self.rec.apply(inner.span, "else if");
            let mut b = Block::new(vec![*inner]);
            b.span = TRANSFORMED;
            *else_branch = Some(ElseBranch::Block(b));
        }
    }
}

struct ReverseIf<'a> {
    rec: &'a mut TransformRecord,
    env: Vec<Vec<(String, TypeRef)>>,
}

impl ReverseIf<'_> {
    fn lookup(&self, name: &str) -> Option<&TypeRef> {
        self.env.iter().rev().find_map(|f| f.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t))
    }

    /// Static type when it follows from declarations and literals alone.
    fn static_type(&self, e: &Expr) -> Option<TypeRef> {
        let int = || Some(TypeRef::simple("int"));
        match &e.kind {
            ExprKind::Literal(Literal::Int(_)) => int(),
            ExprKind::Literal(Literal::Long(_)) => Some(TypeRef::simple("long")),
            ExprKind::Literal(Literal::Char(_)) => Some(TypeRef::simple("char")),
            ExprKind::Ident(n) => self.lookup(n).cloned(),
            ExprKind::Paren(x) => self.static_type(x),
            ExprKind::Cast { ty, .. } => Some(ty.clone()),
            ExprKind::ArrayAccess { recv, .. } => self.static_type(recv)?.element(),
            ExprKind::FieldAccess { recv, name } if name == "length" => {
                self.static_type(recv).filter(|t| t.dims > 0).and_then(|_| int())
            }
            ExprKind::IncDec { target, .. } | ExprKind::Assign { target, .. } => self.static_type(target),
            ExprKind::Unary { op: UnaryOp::Neg | UnaryOp::Plus | UnaryOp::BitNot, operand } => {
                self.static_type(operand).filter(TypeRef::is_integral).map(promote)
            }
            ExprKind::Binary { op, lhs, rhs }
                if !op.is_equality() && !op.is_relational() && !matches!(op, BinaryOp::And | BinaryOp::Or) =>
            {
                let (a, b) = (self.static_type(lhs)?, self.static_type(rhs)?);
                if !a.is_integral() || !b.is_integral() {
                    return None;
                }
                if matches!(op, BinaryOp::Shl | BinaryOp::Shr | BinaryOp::UShr) {
                    return Some(promote(a));
                }
                Some(if a.name == "long" || b.name == "long" {
                    TypeRef::simple("long")
                } else {
                    TypeRef::simple("int")
                })
            }
            _ => None,
        }
    }

    fn integral(&self, e: &Expr) -> bool {
        self.static_type(e).is_some_and(|t| t.is_integral())
    }

    /// Logical negation; relational operators are complemented only where no
    /// operand can be NaN.
    fn negate(&self, cond: Expr) -> (Expr, &'static str) {
        if let ExprKind::Binary { op, lhs, rhs } = &cond.kind {
            let exact = op.is_equality() || (op.is_relational() && self.integral(lhs) && self.integral(rhs));
            if let (true, Some(c)) = (exact, op.complement()) {
                let mut cond = cond;
                if let ExprKind::Binary { op, .. } = &mut cond.kind {
                    *op = c;
                }
                return (cond, "complement");
            }
        }
        let needs_paren = matches!(
            cond.kind,
            ExprKind::Binary { .. } | ExprKind::Ternary { .. } | ExprKind::Assign { .. } | ExprKind::InstanceOf { .. }
        );
        let inner = if needs_paren { Expr::new(ExprKind::Paren(Box::new(cond))) } else { cond };
        (Expr::new(ExprKind::Unary { op: UnaryOp::Not, operand: Box::new(inner) }), "negate")
    }
}

fn promote(t: TypeRef) -> TypeRef {
    if t.name == "long" {
        t
    } else {
        TypeRef::simple("int")
    }
}

impl VisitMut for ReverseIf<'_> {
    fn visit_block_mut(&mut self, b: &mut Block) {
        self.env.push(Vec::new());
        walk_block_mut(self, b);
        self.env.pop();
    }

    fn visit_stmt_mut(&mut self, s: &mut Stmt) {
        let span = s.span;
        match &mut s.kind {
            StmtKind::If { cond, then_branch, else_branch } => match else_branch {
                None => {}
                Some(ElseBranch::If(_)) => self.rec.skip(span, "else if", SkipReason::ElseIfChain),
                Some(ElseBranch::Block(_)) if is_transformed(&span) => {
                    self.rec.skip(span, "if-else", SkipReason::AlreadyTransformed)
                }
                Some(ElseBranch::Block(else_block)) => {
                    let old = std::mem::replace(cond, Expr::bool(true));
                    let (neg, detail) = self.negate(old);
                    *cond = neg;
                    std::mem::swap(then_branch, else_block);
                    s.span = TRANSFORMED;
                    self.rec.apply(span, detail);
                }
            },
            StmtKind::LocalDecl { ty, name, .. } => {
                let decl = (name.clone(), ty.clone());
                walk_stmt_mut(self, s);
                self.env.last_mut().expect("inside a block").push(decl);
                return;
            }
            StmtKind::For { .. } => {
                self.env.push(Vec::new());
                walk_stmt_mut(self, s);
                self.env.pop();
                return;
            }
            StmtKind::EnhancedFor { ty, name, .. } => {
                self.env.push(vec![(name.clone(), ty.clone())]);
                walk_stmt_mut(self, s);
                self.env.pop();
                return;
            }
            _ => {}
        }
        walk_stmt_mut(self, s);
    }
}

struct ForToWhile<'a> {
    rec: &'a mut TransformRecord,
}

/// A `continue` that would jump to this loop's update.
fn has_own_continue(b: &Block) -> bool {
    struct Find(bool);
    impl Visit for Find {
        fn visit_stmt(&mut self, s: &Stmt) {
            match &s.kind {
                StmtKind::Continue => self.0 = true,
                StmtKind::For { .. }
                | StmtKind::EnhancedFor { .. }
                | StmtKind::While { .. }
                | StmtKind::DoWhile { .. } => {}
                _ => walk_stmt(self, s),
            }
        }
    }
    let mut f = Find(false);
    f.visit_block(b);
    f.0
}

fn has_own_break(b: &Block) -> bool {
    struct Find(bool);
    impl Visit for Find {
        fn visit_stmt(&mut self, s: &Stmt) {
            match &s.kind {
                StmtKind::Break => self.0 = true,
                StmtKind::For { .. }
                | StmtKind::EnhancedFor { .. }
                | StmtKind::While { .. }
                | StmtKind::DoWhile { .. } => {}
                _ => walk_stmt(self, s),
            }
        }
    }
    let mut f = Find(false);
    f.visit_block(b);
    f.0
}

fn names_in(e: &Expr) -> BTreeSet<String> {
    struct Names(BTreeSet<String>);
    impl Visit for Names {
        fn visit_expr(&mut self, e: &Expr) {
            if let ExprKind::Ident(n) = &e.kind {
                self.0.insert(n.clone());
            }
            walk_expr(self, e);
        }
    }
    let mut n = Names(BTreeSet::new());
    n.visit_expr(e);
    n.0
}

fn is_true(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Literal(Literal::Bool(true)) => true,
        ExprKind::Paren(x) => is_true(x),
        _ => false,
    }
}

/// Java's "can complete normally", restricted to the supported statements.
fn completes_normally(b: &Block) -> bool {
    b.stmts.iter().all(stmt_completes)
}

fn stmt_completes(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::Return(_) | StmtKind::Throw(_) | StmtKind::Break | StmtKind::Continue => false,
        StmtKind::Block(b) => completes_normally(b),
        StmtKind::If { then_branch, else_branch, .. } => match else_branch {
            None => true,
            Some(ElseBranch::Block(e)) => completes_normally(then_branch) || completes_normally(e),
            Some(ElseBranch::If(e)) => completes_normally(then_branch) || stmt_completes(e),
        },
        StmtKind::While { cond, body } => !is_true(cond) || has_own_break(body),
        StmtKind::For { cond, body, .. } => cond.as_ref().is_some_and(|c| !is_true(c)) || has_own_break(body),
        StmtKind::DoWhile { body, cond } => {
            (completes_normally(body) || has_own_continue(body)) && !is_true(cond) || has_own_break(body)
        }
        StmtKind::Try { body, catches, finally } => {
            let main = completes_normally(body) || catches.iter().any(|c| completes_normally(&c.body));
            main && finally.as_ref().is_none_or(completes_normally)
        }
        _ => true,
    }
}

impl VisitMut for ForToWhile<'_> {
    fn visit_stmt_mut(&mut self, s: &mut Stmt) {
        walk_stmt_mut(self, s);
        let span = s.span;
        match &s.kind {
            StmtKind::EnhancedFor { .. } => {
                self.rec.skip(span, "enhanced for", SkipReason::NoDesugaringDefined);
                return;
            }
            StmtKind::For { update, body, .. } => {
                if let Some(u) = update {
                    let reason = if has_own_continue(body) {
                        Some(SkipReason::ContinueWouldSkipUpdate)
                    } else if !completes_normally(body) {
                        Some(SkipReason::UpdateUnreachable)
                    } else {
                        let used = names_in(u);
                        let captured = body
                            .stmts
                            .iter()
                            .any(|st| matches!(&st.kind, StmtKind::LocalDecl { name, .. } if used.contains(name)));
                        captured.then_some(SkipReason::UpdateNameCaptured)
                    };
                    if let Some(r) = reason {
                        self.rec.skip(span, "for", r);
                        return;
                    }
                }
            }
            _ => return,
        }
        let StmtKind::For { init, cond, update, mut body } = std::mem::replace(&mut s.kind, StmtKind::Break) else {
            unreachable!()
        };
        if let Some(u) = update {
            body.stmts.push(Stmt::new(StmtKind::Expr(u)));
        }
        let mut wl = Stmt::new(StmtKind::While { cond: cond.unwrap_or_else(|| Expr::bool(true)), body });
        wl.span = span;
        let mut stmts: Vec<Stmt> = init.map(|i| *i).into_iter().collect();
        stmts.push(wl);
        let mut wrapper = Block::new(stmts);
        wrapper.span = TRANSFORMED;
        s.kind = StmtKind::Block(wrapper);
        self.rec.apply(span, "for");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_method, print_method};

    fn run_on(kind: TransformKind, src: &str) -> (String, TransformRecord) {
        let m = parse_method(src).unwrap();
        let (out, rec) = apply(kind, &m);
        (print_method(&out), rec)
    }

    fn body(printed: &str) -> String {
        printed.split_whitespace().collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn f2w_basic_and_empty_clauses() {
        let (p, r) = run_on(TransformKind::F2W, "void f(int n){ for (int i = 0; i < n; i++) { g(i); } }");
        assert_eq!(r.applied_count, 1);
        assert!(body(&p).contains("{ int i = 0; while (i < n) { g(i); i++; } }"), "{p}");
        let (p, _) = run_on(TransformKind::F2W, "void f(){ for (;;) { g(); } }");
        assert!(body(&p).contains("{ while (true) { g(); } }"), "{p}");
    }

    #[test]
    fn f2w_skips() {
        let (_, r) = run_on(
            TransformKind::F2W,
            "void f(int n){ for (int i = 0; i < n; i++) { if (i == 2) { continue; } g(i); } }",
        );
        assert_eq!(r.skipped[0].reason, SkipReason::ContinueWouldSkipUpdate);
        let (_, r) =
            run_on(TransformKind::F2W, "void f(int n){ for (int i = 0; i < n; i++) { while (g()) { continue; } } }");
        assert_eq!(r.applied_count, 1);
        let (_, r) = run_on(TransformKind::F2W, "void f(int[] a){ for (int x : a) { g(x); } }");
        assert_eq!(r.skipped[0].reason, SkipReason::NoDesugaringDefined);
        let (_, r) = run_on(TransformKind::F2W, "int f(int n){ for (int i = 0; i < n; i++) { return i; } return 0; }");
        assert_eq!(r.skipped[0].reason, SkipReason::UpdateUnreachable);
        let (_, r) =
            run_on(TransformKind::F2W, "void f(){ for (int i = 0; i < 3; hits++) { int hits = 2; g(hits); } }");
        assert_eq!(r.skipped[0].reason, SkipReason::UpdateNameCaptured);
    }

    #[test]
    fn revif_and_nestei() {
        let (p, r) = run_on(TransformKind::RevIf, "void f(boolean a){ if (a) { doA(); } else { doB(); } }");
        assert_eq!(r.applied_count, 1);
        assert!(body(&p).contains("if (!a) { doB(); } else { doA(); }"), "{p}");
        let (p, r) = run_on(TransformKind::NestEI, "void f(boolean a, boolean b){ if (a) { } else if (b) { doB(); } }");
        assert_eq!(r.applied_count, 1);
        assert!(body(&p).contains("if (a) { } else { if (b) { doB(); } }"), "{p}");
    }

    #[test]
    fn revif_complements_only_when_exact() {
        let (p, _) = run_on(TransformKind::RevIf, "void f(int x, int y){ if (x < y) { a(); } else { b(); } }");
        assert!(body(&p).contains("if (x >= y) { b(); } else { a(); }"), "{p}");
        let (p, _) = run_on(TransformKind::RevIf, "void f(double x){ if (x < 1.0) { a(); } else { b(); } }");
        assert!(body(&p).contains("if (!(x < 1.0))"), "{p}");
        let (p, _) = run_on(TransformKind::RevIf, "void f(double x){ if (x == 1.0) { a(); } else { b(); } }");
        assert!(body(&p).contains("if (x != 1.0)"), "{p}");
        let (p, _) =
            run_on(TransformKind::RevIf, "void f(int[] v, long k){ if (v[0] + 1 > k) { a(); } else { b(); } }");
        assert!(body(&p).contains("if (v[0] + 1 <= k)"), "{p}");
    }

    #[test]
    fn revif_chain_without_nesting() {
        let (_, r) = run_on(
            TransformKind::RevIf,
            "void f(boolean a, boolean b){ if (a) { x(); } else if (b) { y(); } else { z(); } }",
        );
        assert_eq!(r.applied_count, 1);
        assert_eq!(r.skipped[0].reason, SkipReason::ElseIfChain);
    }

    #[test]
    fn nestei_bottom_up_chain() {
        let (p, r) = run_on(
            TransformKind::NestEI,
            "void f(int a){ if (a == 1) { x(); } else if (a == 2) { y(); } else if (a == 3) { z(); } else { w(); } }",
        );
        assert_eq!(r.applied_count, 2);
        assert!(!p.contains("else if"), "{p}");
    }

    #[test]
    fn operand_swaps() {
        let (p, r) = run_on(TransformKind::SEO, "boolean f(int a, int b){ return a == b; }");
        assert_eq!(r.applied_count, 1);
        assert!(p.contains("b == a"));
        let (p, _) = run_on(TransformKind::SRO, "boolean f(int a, int b){ return a > b; }");
        assert!(p.contains("b < a"));
        let (_, r) = run_on(TransformKind::SEO, "boolean f(){ return f() == g(); }");
        assert_eq!(r.skipped[0].reason, SkipReason::EvaluationOrderSideEffect);
        let (_, r) = run_on(TransformKind::SRO, "boolean f(int[] a, int[] b){ return a[0] < b[1]; }");
        assert_eq!(r.skipped[0].reason, SkipReason::EvaluationOrderSideEffect);
        let (_, r) = run_on(TransformKind::SRO, "boolean f(int[] a, int b){ return a[0] < b; }");
        assert_eq!(r.applied_count, 1);
    }

    #[test]
    fn increments() {
        let (p, r) = run_on(TransformKind::EUI, "void f(int i){ i++; --i; for (; i < 3; i++) { } int x = i++; }");
        assert_eq!(r.applied_count, 3);
        assert_eq!(r.skipped.len(), 1);
        assert_eq!(r.skipped[0].reason, SkipReason::ValueUsed);
        assert!(p.contains("i += 1;") && p.contains("i -= 1;") && p.contains("i += 1)"), "{p}");
    }

    #[test]
    fn second_run_skips_marked_sites() {
        let m = parse_method("boolean f(int a, int b){ if (a == b) { g(); } else { h(); } return a < b; }").unwrap();
        for kind in [TransformKind::SEO, TransformKind::SRO, TransformKind::RevIf] {
            let (once, r1) = apply(kind, &m);
            assert_eq!(r1.applied_count, 1, "{kind}");
            let (_, r2) = apply(kind, &once);
            assert_eq!(r2.applied_count, 0, "{kind}");
            assert_eq!(r2.skipped[0].reason, SkipReason::AlreadyTransformed);
        }
    }
}
