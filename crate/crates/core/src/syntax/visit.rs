//! Tree walkers. Children are visited in source order.

use super::ast::*;

pub trait Visit {
    fn visit_block(&mut self, b: &Block) {
        walk_block(self, b)
    }
    fn visit_stmt(&mut self, s: &Stmt) {
        walk_stmt(self, s)
    }
    fn visit_expr(&mut self, e: &Expr) {
        walk_expr(self, e)
    }
}

pub fn walk_block<V: Visit + ?Sized>(v: &mut V, b: &Block) {
    for s in &b.stmts {
        v.visit_stmt(s);
    }
}

pub fn walk_stmt<V: Visit + ?Sized>(v: &mut V, s: &Stmt) {
    match &s.kind {
        StmtKind::LocalDecl { init, .. } => {
            if let Some(e) = init {
                v.visit_expr(e);
            }
        }
        StmtKind::Expr(e) | StmtKind::Throw(e) => v.visit_expr(e),
        StmtKind::Return(e) => {
            if let Some(e) = e {
                v.visit_expr(e);
            }
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            v.visit_expr(cond);
            v.visit_block(then_branch);
            match else_branch {
                Some(ElseBranch::Block(b)) => v.visit_block(b),
                Some(ElseBranch::If(s)) => v.visit_stmt(s),
                None => {}
            }
        }
        StmtKind::For { init, cond, update, body } => {
            if let Some(i) = init {
                v.visit_stmt(i);
            }
            if let Some(c) = cond {
                v.visit_expr(c);
            }
            if let Some(u) = update {
                v.visit_expr(u);
            }
            v.visit_block(body);
        }
        StmtKind::EnhancedFor { iterable, body, .. } => {
            v.visit_expr(iterable);
            v.visit_block(body);
        }
        StmtKind::While { cond, body } => {
            v.visit_expr(cond);
            v.visit_block(body);
        }
        StmtKind::DoWhile { body, cond } => {
            v.visit_block(body);
            v.visit_expr(cond);
        }
        StmtKind::Break | StmtKind::Continue => {}
        StmtKind::Try { body, catches, finally } => {
            v.visit_block(body);
            for c in catches {
                v.visit_block(&c.body);
            }
            if let Some(f) = finally {
                v.visit_block(f);
            }
        }
        StmtKind::Block(b) => v.visit_block(b),
    }
}

pub fn walk_expr<V: Visit + ?Sized>(v: &mut V, e: &Expr) {
    for c in expr_children(e) {
        v.visit_expr(c);
    }
}

/// Direct sub-expressions in evaluation order.
pub fn expr_children(e: &Expr) -> Vec<&Expr> {
    match &e.kind {
        ExprKind::Literal(_) | ExprKind::Ident(_) | ExprKind::This => vec![],
        ExprKind::FieldAccess { recv, .. } => vec![recv],
        ExprKind::ArrayAccess { recv, index } => vec![recv, index],
        ExprKind::MethodCall { recv, args, .. } => recv.iter().map(|r| &**r).chain(args.iter()).collect(),
        ExprKind::Binary { lhs, rhs, .. } => vec![lhs, rhs],
        ExprKind::Unary { operand, .. } => vec![operand],
        ExprKind::IncDec { target, .. } => vec![target],
        ExprKind::Assign { target, value, .. } => vec![target, value],
        ExprKind::Ternary { cond, then_expr, else_expr } => vec![cond, then_expr, else_expr],
        ExprKind::Cast { expr, .. } | ExprKind::InstanceOf { expr, .. } | ExprKind::Paren(expr) => vec![expr],
        ExprKind::New { args, .. } => args.iter().collect(),
        ExprKind::ArrayNew { dims, init, .. } => dims.iter().chain(init.iter().flatten()).collect(),
    }
}

pub trait VisitMut {
    fn visit_block_mut(&mut self, b: &mut Block) {
        walk_block_mut(self, b)
    }
    fn visit_stmt_mut(&mut self, s: &mut Stmt) {
        walk_stmt_mut(self, s)
    }
    fn visit_expr_mut(&mut self, e: &mut Expr) {
        walk_expr_mut(self, e)
    }
}

pub fn walk_block_mut<V: VisitMut + ?Sized>(v: &mut V, b: &mut Block) {
    for s in &mut b.stmts {
        v.visit_stmt_mut(s);
    }
}

pub fn walk_stmt_mut<V: VisitMut + ?Sized>(v: &mut V, s: &mut Stmt) {
    match &mut s.kind {
        StmtKind::LocalDecl { init, .. } => {
            if let Some(e) = init {
                v.visit_expr_mut(e);
            }
        }
        StmtKind::Expr(e) | StmtKind::Throw(e) => v.visit_expr_mut(e),
        StmtKind::Return(e) => {
            if let Some(e) = e {
                v.visit_expr_mut(e);
            }
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            v.visit_expr_mut(cond);
            v.visit_block_mut(then_branch);
            match else_branch {
                Some(ElseBranch::Block(b)) => v.visit_block_mut(b),
                Some(ElseBranch::If(s)) => v.visit_stmt_mut(s),
                None => {}
            }
        }
        StmtKind::For { init, cond, update, body } => {
            if let Some(i) = init {
                v.visit_stmt_mut(i);
            }
            if let Some(c) = cond {
                v.visit_expr_mut(c);
            }
            if let Some(u) = update {
                v.visit_expr_mut(u);
            }
            v.visit_block_mut(body);
        }
        StmtKind::EnhancedFor { iterable, body, .. } => {
            v.visit_expr_mut(iterable);
            v.visit_block_mut(body);
        }
        StmtKind::While { cond, body } => {
            v.visit_expr_mut(cond);
            v.visit_block_mut(body);
        }
        StmtKind::DoWhile { body, cond } => {
            v.visit_block_mut(body);
            v.visit_expr_mut(cond);
        }
        StmtKind::Break | StmtKind::Continue => {}
        StmtKind::Try { body, catches, finally } => {
            v.visit_block_mut(body);
            for c in catches {
                v.visit_block_mut(&mut c.body);
            }
            if let Some(f) = finally {
                v.visit_block_mut(f);
            }
        }
        StmtKind::Block(b) => v.visit_block_mut(b),
    }
}

pub fn walk_expr_mut<V: VisitMut + ?Sized>(v: &mut V, e: &mut Expr) {
    match &mut e.kind {
        ExprKind::Literal(_) | ExprKind::Ident(_) | ExprKind::This => {}
        ExprKind::FieldAccess { recv, .. } => v.visit_expr_mut(recv),
        ExprKind::ArrayAccess { recv, index } => {
            v.visit_expr_mut(recv);
            v.visit_expr_mut(index);
        }
        ExprKind::MethodCall { recv, args, .. } => {
            if let Some(r) = recv {
                v.visit_expr_mut(r);
            }
            for a in args {
                v.visit_expr_mut(a);
            }
        }
        ExprKind::Binary { lhs, rhs, .. } => {
            v.visit_expr_mut(lhs);
            v.visit_expr_mut(rhs);
        }
        ExprKind::Unary { operand, .. } => v.visit_expr_mut(operand),
        ExprKind::IncDec { target, .. } => v.visit_expr_mut(target),
        ExprKind::Assign { target, value, .. } => {
            v.visit_expr_mut(target);
            v.visit_expr_mut(value);
        }
        ExprKind::Ternary { cond, then_expr, else_expr } => {
            v.visit_expr_mut(cond);
            v.visit_expr_mut(then_expr);
            v.visit_expr_mut(else_expr);
        }
        ExprKind::Cast { expr, .. } | ExprKind::InstanceOf { expr, .. } | ExprKind::Paren(expr) => {
            v.visit_expr_mut(expr)
        }
        ExprKind::New { args, .. } => {
            for a in args {
                v.visit_expr_mut(a);
            }
        }
        ExprKind::ArrayNew { dims, init, .. } => {
            for d in dims {
                v.visit_expr_mut(d);
            }
            for i in init.iter_mut().flatten() {
                v.visit_expr_mut(i);
            }
        }
    }
}

struct SpanClearer;

impl VisitMut for SpanClearer {
    fn visit_block_mut(&mut self, b: &mut Block) {
        b.span = SourceSpan::default();
        walk_block_mut(self, b);
    }

    fn visit_stmt_mut(&mut self, s: &mut Stmt) {
        s.span = SourceSpan::default();
        match &mut s.kind {
            StmtKind::LocalDecl { name_span, .. } | StmtKind::EnhancedFor { name_span, .. } => {
                *name_span = SourceSpan::default()
            }
            StmtKind::Try { catches, .. } => {
                for c in catches {
                    c.name_span = SourceSpan::default();
                }
            }
            _ => {}
        }
        walk_stmt_mut(self, s);
    }

    fn visit_expr_mut(&mut self, e: &mut Expr) {
        e.span = SourceSpan::default();
        walk_expr_mut(self, e);
    }
}

/// Resets every span so trees can be compared structurally.
pub fn clear_spans(m: &mut Method) {
    m.span = SourceSpan::default();
    for p in &mut m.params {
        p.span = SourceSpan::default();
    }
    SpanClearer.visit_block_mut(&mut m.body);
}

/// Equality ignoring source positions.
pub fn structurally_equal(a: &Method, b: &Method) -> bool {
    let mut a = a.clone();
    let mut b = b.clone();
    clear_spans(&mut a);
    clear_spans(&mut b);
    a == b
}

/// Counts statements and expressions; used for size budgets and edit accounting.
pub fn node_count(m: &Method) -> usize {
    struct Counter(usize);
    impl Visit for Counter {
        fn visit_stmt(&mut self, s: &Stmt) {
            self.0 += 1;
            walk_stmt(self, s);
        }
        fn visit_expr(&mut self, e: &Expr) {
            self.0 += 1;
            walk_expr(self, e);
        }
    }
    let mut c = Counter(0);
    c.visit_block(&m.body);
    c.0
}
