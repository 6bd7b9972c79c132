//! Seeded random generator of well-typed methods in the supported subset.
//!
//! Loops are bounded by construction (locked counters, masked bounds), so
//! nearly all generated programs finish well inside the default fuel.

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GTy {
    Int,
    Long,
    Double,
    Bool,
    Str,
    Char,
    IntArr,
}

impl GTy {
    fn type_ref(self) -> TypeRef {
        match self {
            GTy::Int => TypeRef::simple("int"),
            GTy::Long => TypeRef::simple("long"),
            GTy::Double => TypeRef::simple("double"),
            GTy::Bool => TypeRef::simple("boolean"),
            GTy::Str => TypeRef::simple("String"),
            GTy::Char => TypeRef::simple("char"),
            GTy::IntArr => TypeRef { name: "int".into(), args: vec![], dims: 1 },
        }
    }
}

struct Var {
    name: String,
    ty: GTy,
    locked: bool,
}

const NAMES: &[&str] = &[
    "count", "total", "index", "value", "result", "sum", "limit", "flag", "temp", "acc", "offset", "delta", "score",
    "width", "height", "size", "left", "right", "low", "high", "mid", "step", "pos", "key", "item", "text", "label",
    "ratio", "factor", "current", "previous", "start", "end", "data", "values", "input", "rate", "letter", "enabled",
    "amount", "number", "bound", "target", "found", "length", "weight",
];

const FUNCTION_NAMES: &[&str] = &[
    "compute",
    "process",
    "findIndex",
    "sumValues",
    "checkRange",
    "countMatches",
    "normalize",
    "updateTotal",
    "scaleValue",
    "clampValue",
    "parseToken",
    "mergeRanges",
    "evaluate",
    "adjustScore",
];

const SINKS: &[&str] = &["log", "emit", "record"];
const SOURCES: &[&str] = &["next", "probe", "lookup"];
const FIELDS: &[&str] = &["cacheSize", "hits"];
const COMMENTS: &[&str] = &["// check bounds", "// TODO: simplify", "// update running value", "// edge case"];

struct Gen {
    rng: ChaCha8Rng,
    budget: i64,
    scopes: Vec<Vec<Var>>,
    used: HashSet<String>,
    /// Innermost loop allows `continue` (update is not hand-written in the body).
    loops: Vec<bool>,
    ret: Option<GTy>,
}

fn e(kind: ExprKind) -> Expr {
    Expr::new(kind)
}

fn s(kind: StmtKind) -> Stmt {
    Stmt::new(kind)
}

fn bx(x: Expr) -> Box<Expr> {
    Box::new(x)
}

fn lit(l: Literal) -> Expr {
    e(ExprKind::Literal(l))
}

fn int_lit(v: i64) -> Expr {
    if v < 0 {
        e(ExprKind::Unary { op: UnaryOp::Neg, operand: bx(Expr::int(&(-v).to_string())) })
    } else {
        Expr::int(&v.to_string())
    }
}

fn call(name: &str, args: Vec<Expr>) -> Expr {
    e(ExprKind::MethodCall { recv: None, name: name.into(), args })
}

fn assign(op: AssignOp, target: Expr, value: Expr) -> Expr {
    e(ExprKind::Assign { op, target: bx(target), value: bx(value) })
}

fn incdec(op: IncDecOp, prefix: bool, target: Expr) -> Expr {
    e(ExprKind::IncDec { op, prefix, target: bx(target) })
}

fn decl(ty: GTy, name: &str, init: Expr) -> Stmt {
    s(StmtKind::LocalDecl {
        modifiers: vec![],
        ty: ty.type_ref(),
        name: name.into(),
        name_span: SourceSpan::default(),
        init: Some(init),
    })
}

fn block(stmts: Vec<Stmt>) -> Block {
    Block::new(stmts)
}

fn field(name: &str) -> Expr {
    e(ExprKind::FieldAccess { recv: bx(e(ExprKind::This)), name: name.into() })
}

impl Gen {
    fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        items.choose(&mut self.rng).expect("non-empty choice")
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    /// Index into `weights`, proportional to weight.
    fn weighted(&mut self, weights: &[u32]) -> usize {
        let total: u32 = weights.iter().sum();
        let mut r = self.rng.random_range(0..total.max(1));
        for (i, w) in weights.iter().enumerate() {
            if r < *w {
                return i;
            }
            r -= w;
        }
        0
    }

    fn fresh(&mut self, pool: &[&str]) -> String {
        for _ in 0..8 {
            let n = pool.choose(&mut self.rng).expect("pool").to_string();
            if self.used.insert(n.clone()) {
                return n;
            }
        }
        let base = pool.choose(&mut self.rng).expect("pool").to_string();
        let mut i = 2;
        loop {
            let n = format!("{base}{i}");
            if self.used.insert(n.clone()) {
                return n;
            }
            i += 1;
        }
    }

    fn declare(&mut self, name: &str, ty: GTy, locked: bool) {
        self.scopes.last_mut().expect("scope").push(Var { name: name.into(), ty, locked });
    }

    fn vars(&self, ty: GTy, writable: bool) -> Vec<String> {
        self.scopes
            .iter()
            .flatten()
            .filter(|v| v.ty == ty && (!writable || !v.locked))
            .map(|v| v.name.clone())
            .collect()
    }

    fn var_of(&mut self, ty: GTy, writable: bool) -> Option<String> {
        let vs = self.vars(ty, writable);
        vs.choose(&mut self.rng).cloned()
    }

    fn lock(&mut self, name: &str, locked: bool) {
        for v in self.scopes.iter_mut().flatten() {
            if v.name == name {
                v.locked = locked;
            }
        }
    }

    // ---- expressions ----

    fn leaf(&mut self, ty: GTy) -> Expr {
        if self.chance(0.6) {
            if let Some(v) = self.var_of(ty, false) {
                return Expr::ident(&v);
            }
        }
        match ty {
            GTy::Int => {
                if self.chance(0.05) {
                    Expr::int(self.pick(&["0x10", "0xFF", "2147483647", "1_000"]))
                } else {
                    int_lit(self.rng.random_range(-2..=9))
                }
            }
            GTy::Long => lit(Literal::Long(format!("{}L", self.rng.random_range(0..=20)))),
            GTy::Double => lit(Literal::Double((*self.pick(&["0.0", "0.5", "1.0", "2.5", "3.0", "1e3"])).into())),
            GTy::Bool => Expr::bool(self.chance(0.5)),
            GTy::Str => lit(Literal::Str((*self.pick(&["\"\"", "\"a\"", "\"abc\"", "\"x\\n\""])).into())),
            GTy::Char => lit(Literal::Char((*self.pick(&["'a'", "'z'", "'0'", "'\\t'"])).into())),
            GTy::IntArr => {
                let n = self.rng.random_range(0..=3);
                let items = (0..n).map(|_| int_lit(self.rng.random_range(-2..=9))).collect();
                e(ExprKind::ArrayNew { elem: TypeRef::simple("int"), dims: vec![], extra_dims: 1, init: Some(items) })
            }
        }
    }

    fn expr(&mut self, ty: GTy, depth: usize) -> Expr {
        self.budget -= 1;
        if depth >= 3 || self.budget <= 0 {
            return self.leaf(ty);
        }
        let d = depth + 1;
        match ty {
            GTy::Int => self.int_expr(d),
            GTy::Long => match self.weighted(&[40, 40, 10, 10]) {
                0 => self.leaf(ty),
                1 => {
                    let op = *self.pick(&[BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul]);
                    let other = if self.chance(0.5) { GTy::Int } else { GTy::Long };
                    Expr::binary(op, self.expr(GTy::Long, d), self.expr(other, d))
                }
                2 => e(ExprKind::Cast { ty: TypeRef::simple("long"), expr: bx(self.paren_expr(GTy::Double, d)) }),
                _ => Expr::binary(BinaryOp::Shl, self.expr(GTy::Long, d), int_lit(self.rng.random_range(0..=40))),
            },
            GTy::Double => match self.weighted(&[35, 35, 10, 5, 3, 5, 7]) {
                0 => self.leaf(ty),
                1 => {
                    let op = *self.pick(&[BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div]);
                    Expr::binary(op, self.expr(GTy::Double, d), self.expr(GTy::Double, d))
                }
                2 => Expr::binary(BinaryOp::Mul, self.expr(GTy::Int, d), lit(Literal::Double("1.5".into()))),
                3 => self.ternary(GTy::Double, d),
                4 => {
                    Expr::binary(BinaryOp::Div, lit(Literal::Double("0.0".into())), lit(Literal::Double("0.0".into())))
                }
                5 => e(ExprKind::Unary { op: UnaryOp::Neg, operand: bx(self.paren_expr(GTy::Double, d)) }),
                _ => e(ExprKind::Cast { ty: TypeRef::simple("double"), expr: bx(self.paren_expr(GTy::Int, d)) }),
            },
            GTy::Bool => self.bool_expr(d),
            GTy::Str => {
                if self.chance(0.5) {
                    self.leaf(ty)
                } else {
                    let other = *self.pick(&[GTy::Int, GTy::Char, GTy::Double, GTy::Bool, GTy::Str]);
                    Expr::binary(BinaryOp::Add, self.expr(GTy::Str, d), self.expr(other, d))
                }
            }
            GTy::Char => {
                if self.chance(0.7) {
                    self.leaf(ty)
                } else {
                    let inner = Expr::binary(BinaryOp::Add, self.leaf(GTy::Char), int_lit(1));
                    e(ExprKind::Cast { ty: TypeRef::simple("char"), expr: bx(e(ExprKind::Paren(bx(inner)))) })
                }
            }
            GTy::IntArr => {
                if self.chance(0.85) {
                    self.leaf(ty)
                } else {
                    let n = self.small_bound(d);
                    e(ExprKind::ArrayNew { elem: TypeRef::simple("int"), dims: vec![n], extra_dims: 0, init: None })
                }
            }
        }
    }

    fn paren_expr(&mut self, ty: GTy, d: usize) -> Expr {
        let x = self.expr(ty, d);
        match x.kind {
            ExprKind::Literal(_) | ExprKind::Ident(_) => x,
            _ => e(ExprKind::Paren(bx(x))),
        }
    }

    fn ternary(&mut self, ty: GTy, d: usize) -> Expr {
        e(ExprKind::Ternary {
            cond: bx(self.expr(GTy::Bool, d)),
            then_expr: bx(self.expr(ty, d)),
            else_expr: bx(self.expr(ty, d)),
        })
    }

    fn int_expr(&mut self, d: usize) -> Expr {
        let has_arr = !self.vars(GTy::IntArr, false).is_empty();
        let has_writable = !self.vars(GTy::Int, true).is_empty();
        let weights = [
            25,
            25,
            6,
            6,
            4,
            4,
            5,
            5,
            6,
            if has_arr { 4 } else { 0 },
            if has_arr { 4 } else { 0 },
            2,
            if has_writable { 2 } else { 0 },
            if has_writable { 1 } else { 0 },
            2,
            1,
        ];
        match self.weighted(&weights) {
            0 => self.leaf(GTy::Int),
            1 => {
                let op = *self.pick(&[BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul]);
                Expr::binary(op, self.expr(GTy::Int, d), self.expr(GTy::Int, d))
            }
            2 => {
                let op = *self.pick(&[BinaryOp::Div, BinaryOp::Rem]);
                Expr::binary(op, self.expr(GTy::Int, d), self.leaf(GTy::Int))
            }
            3 => {
                let op = *self.pick(&[BinaryOp::BitAnd, BinaryOp::BitOr, BinaryOp::BitXor]);
                Expr::binary(op, self.expr(GTy::Int, d), self.expr(GTy::Int, d))
            }
            4 => {
                let op = *self.pick(&[BinaryOp::Shl, BinaryOp::Shr, BinaryOp::UShr]);
                Expr::binary(op, self.expr(GTy::Int, d), int_lit(self.rng.random_range(0..=33)))
            }
            5 => {
                let op = *self.pick(&[UnaryOp::Neg, UnaryOp::BitNot]);
                e(ExprKind::Unary { op, operand: bx(self.paren_expr(GTy::Int, d)) })
            }
            6 => {
                let from = if self.chance(0.6) { GTy::Double } else { GTy::Long };
                e(ExprKind::Cast { ty: TypeRef::simple("int"), expr: bx(self.paren_expr(from, d)) })
            }
            7 => self.ternary(GTy::Int, d),
            8 => {
                let name = *self.pick(SOURCES);
                let n = self.rng.random_range(0..=2);
                let args = (0..n).map(|_| self.expr(GTy::Int, d)).collect();
                call(name, args)
            }
            9 => {
                let a = self.var_of(GTy::IntArr, false).expect("array var");
                e(ExprKind::FieldAccess { recv: bx(Expr::ident(&a)), name: "length".into() })
            }
            10 => {
                let a = self.var_of(GTy::IntArr, false).expect("array var");
                let idx = if self.chance(0.6) { int_lit(self.rng.random_range(0..=2)) } else { self.leaf(GTy::Int) };
                e(ExprKind::ArrayAccess { recv: bx(Expr::ident(&a)), index: bx(idx) })
            }
            11 => Expr::binary(BinaryOp::Sub, self.leaf(GTy::Char), lit(Literal::Char("'a'".into()))),
            12 => {
                let v = self.var_of(GTy::Int, true).expect("writable int");
                let op = *self.pick(&[IncDecOp::Inc, IncDecOp::Dec]);
                let prefix = self.chance(0.5);
                incdec(op, prefix, Expr::ident(&v))
            }
            13 => {
                let v = self.var_of(GTy::Int, true).expect("writable int");
                let value = self.expr(GTy::Int, d);
                e(ExprKind::Paren(bx(assign(AssignOp::Assign, Expr::ident(&v), value))))
            }
            14 => e(ExprKind::Paren(bx(self.expr(GTy::Int, d)))),
            _ => field(self.pick(FIELDS)),
        }
    }

    fn bool_expr(&mut self, d: usize) -> Expr {
        let has_ref = !self.vars(GTy::Str, false).is_empty() || !self.vars(GTy::IntArr, false).is_empty();
        let has_str = !self.vars(GTy::Str, false).is_empty();
        let weights = [25, 10, 4, 3, 10, 4, 3, if has_ref { 4 } else { 0 }, 12, 6, 12, if has_str { 2 } else { 0 }];
        let rel = [BinaryOp::Lt, BinaryOp::Le, BinaryOp::Gt, BinaryOp::Ge];
        let eq = [BinaryOp::Eq, BinaryOp::Ne];
        match self.weighted(&weights) {
            0 => {
                let op = *self.pick(&rel);
                Expr::binary(op, self.expr(GTy::Int, d), self.expr(GTy::Int, d))
            }
            1 => {
                let op = *self.pick(&rel);
                Expr::binary(op, self.expr(GTy::Double, d), self.expr(GTy::Double, d))
            }
            2 => {
                let op = *self.pick(&rel);
                Expr::binary(op, self.expr(GTy::Long, d), self.expr(GTy::Int, d))
            }
            3 => {
                let op = *self.pick(&rel);
                Expr::binary(op, self.leaf(GTy::Char), self.leaf(GTy::Char))
            }
            4 => {
                let op = *self.pick(&eq);
                Expr::binary(op, self.expr(GTy::Int, d), self.expr(GTy::Int, d))
            }
            5 => {
                let op = *self.pick(&eq);
                Expr::binary(op, self.expr(GTy::Double, d), self.expr(GTy::Double, d))
            }
            6 => {
                let op = *self.pick(&eq);
                Expr::binary(op, self.leaf(GTy::Bool), self.leaf(GTy::Bool))
            }
            7 => {
                let mut refs = self.vars(GTy::Str, false);
                refs.extend(self.vars(GTy::IntArr, false));
                let v = refs.choose(&mut self.rng).cloned().expect("ref var");
                let op = *self.pick(&eq);
                Expr::binary(op, Expr::ident(&v), lit(Literal::Null))
            }
            8 => {
                let op = *self.pick(&[BinaryOp::And, BinaryOp::Or]);
                Expr::binary(op, self.expr(GTy::Bool, d), self.expr(GTy::Bool, d))
            }
            9 => e(ExprKind::Unary { op: UnaryOp::Not, operand: bx(self.paren_expr(GTy::Bool, d)) }),
            10 => self.leaf(GTy::Bool),
            _ => {
                let v = self.var_of(GTy::Str, false).expect("string var");
                e(ExprKind::InstanceOf { expr: bx(Expr::ident(&v)), ty: TypeRef::simple("String") })
            }
        }
    }

    /// Loop bound in [0, 7] or an array length.
    fn small_bound(&mut self, d: usize) -> Expr {
        let arr = self.var_of(GTy::IntArr, false);
        match self.weighted(&[60, 25, if arr.is_some() { 15 } else { 0 }]) {
            0 => int_lit(self.rng.random_range(0..=6)),
            1 => {
                let x = self.paren_expr(GTy::Int, d.max(2));
                e(ExprKind::Paren(bx(Expr::binary(BinaryOp::BitAnd, x, int_lit(7)))))
            }
            _ => e(ExprKind::FieldAccess { recv: bx(Expr::ident(&arr.expect("array var"))), name: "length".into() }),
        }
    }

    // ---- statements ----

    fn block(&mut self, depth: usize, max: usize) -> Block {
        self.scopes.push(Vec::new());
        let n = self.rng.random_range(1..=max);
        let mut stmts = Vec::new();
        for _ in 0..n {
            if self.budget <= 0 && !stmts.is_empty() {
                break;
            }
            stmts.extend(self.stmt(depth));
        }
        self.scopes.pop();
        block(stmts)
    }

    fn stmt(&mut self, depth: usize) -> Vec<Stmt> {
        self.budget -= 1;
        let nested = depth < 3 && self.budget > 0;
        let in_loop = !self.loops.is_empty();
        let continue_ok = self.loops.last().copied().unwrap_or(false);
        let has_arr = !self.vars(GTy::IntArr, false).is_empty();
        let weights = [
            18,
            14,
            8,
            if nested { 14 } else { 0 },
            if nested { 10 } else { 0 },
            if nested { 4 } else { 0 },
            if nested { 3 } else { 0 },
            if nested && has_arr { 4 } else { 0 },
            6,
            if nested { 4 } else { 0 },
            if nested { 2 } else { 0 },
            if in_loop { 6 } else { 0 },
            3,
            2,
            2,
            if has_arr { 4 } else { 0 },
        ];
        let mut out = match self.weighted(&weights) {
            0 => {
                let ty =
                    [GTy::Int, GTy::Int, GTy::Int, GTy::Long, GTy::Double, GTy::Bool, GTy::Str, GTy::Char, GTy::IntArr]
                        [self.rng.random_range(0..9)];
                let init = self.expr(ty, 0);
                let name = self.fresh(NAMES);
                self.declare(&name, ty, false);
                vec![decl(ty, &name, init)]
            }
            1 => self.assign_stmt(),
            2 => match self.var_of(GTy::Int, true).or_else(|| self.var_of(GTy::Long, true)) {
                Some(v) => {
                    let op = *self.pick(&[IncDecOp::Inc, IncDecOp::Dec]);
                    let prefix = self.chance(0.3);
                    vec![s(StmtKind::Expr(incdec(op, prefix, Expr::ident(&v))))]
                }
                None => self.assign_stmt(),
            },
            3 => vec![self.if_stmt(depth, 0)],
            4 => self.for_stmt(depth),
            5 => {
                let w = self.fresh(&["w", "iter", "round"]);
                let bound = self.small_bound(1);
                self.declare(&w, GTy::Int, true);
                self.loops.push(true);
                let mut body = self.block(depth + 1, 3);
                self.loops.pop();
                body.stmts.insert(0, s(StmtKind::Expr(incdec(IncDecOp::Inc, false, Expr::ident(&w)))));
                let cond = Expr::binary(BinaryOp::Lt, Expr::ident(&w), bound);
                vec![decl(GTy::Int, &w, int_lit(0)), s(StmtKind::While { cond, body })]
            }
            6 => {
                let w = self.fresh(&["w", "iter", "round"]);
                let bound = self.small_bound(1);
                self.declare(&w, GTy::Int, true);
                self.loops.push(true);
                let mut body = self.block(depth + 1, 3);
                self.loops.pop();
                body.stmts.insert(0, s(StmtKind::Expr(incdec(IncDecOp::Inc, false, Expr::ident(&w)))));
                let cond = Expr::binary(BinaryOp::Lt, Expr::ident(&w), bound);
                vec![decl(GTy::Int, &w, int_lit(0)), s(StmtKind::DoWhile { body, cond })]
            }
            7 => {
                let arr = self.var_of(GTy::IntArr, false).expect("array var");
                let v = self.fresh(&["v", "elem", "entry"]);
                self.scopes.push(Vec::new());
                self.declare(&v, GTy::Int, true);
                self.loops.push(true);
                let body = self.block(depth + 1, 3);
                self.loops.pop();
                self.scopes.pop();
                vec![s(StmtKind::EnhancedFor {
                    modifiers: vec![],
                    ty: GTy::Int.type_ref(),
                    name: v,
                    name_span: SourceSpan::default(),
                    iterable: Expr::ident(&arr),
                    body,
                })]
            }
            8 => {
                let name = *self.pick(SINKS);
                let n = self.rng.random_range(1..=2);
                let args = (0..n)
                    .map(|_| {
                        let ty = *self.pick(&[GTy::Int, GTy::Int, GTy::Double, GTy::Str, GTy::Bool]);
                        self.expr(ty, 1)
                    })
                    .collect();
                vec![s(StmtKind::Expr(call(name, args)))]
            }
            9 => vec![self.try_stmt(depth)],
            10 => vec![s(StmtKind::Block(self.block(depth + 1, 2)))],
            11 => {
                let jump = if continue_ok && self.chance(0.4) { StmtKind::Continue } else { StmtKind::Break };
                let cond = self.expr(GTy::Bool, 1);
                vec![s(StmtKind::If { cond, then_branch: block(vec![s(jump)]), else_branch: None })]
            }
            12 => {
                let value = self.ret.map(|t| self.expr(t, 1));
                let cond = self.expr(GTy::Bool, 1);
                vec![s(StmtKind::If { cond, then_branch: block(vec![s(StmtKind::Return(value))]), else_branch: None })]
            }
            13 => {
                let class = *self.pick(&["IllegalArgumentException", "IllegalStateException"]);
                let msg = lit(Literal::Str("\"bad input\"".into()));
                let thrown = e(ExprKind::New { ty: TypeRef::simple(class), args: vec![msg] });
                let cond = self.expr(GTy::Bool, 1);
                vec![s(StmtKind::If { cond, then_branch: block(vec![s(StmtKind::Throw(thrown))]), else_branch: None })]
            }
            14 => {
                let op = *self.pick(&[AssignOp::Assign, AssignOp::Add]);
                let value = self.expr(GTy::Int, 1);
                vec![s(StmtKind::Expr(assign(op, field(self.pick(FIELDS)), value)))]
            }
            _ => {
                let arr = self.var_of(GTy::IntArr, false).expect("array var");
                let idx = if self.chance(0.7) { int_lit(self.rng.random_range(0..=2)) } else { self.leaf(GTy::Int) };
                let target = e(ExprKind::ArrayAccess { recv: bx(Expr::ident(&arr)), index: bx(idx) });
                let op = *self.pick(&[AssignOp::Assign, AssignOp::Add, AssignOp::Mul]);
                let value = self.expr(GTy::Int, 1);
                vec![s(StmtKind::Expr(assign(op, target, value)))]
            }
        };
        if self.chance(0.06) {
            if let Some(first) = out.first_mut() {
                first.comments.push((*self.pick(COMMENTS)).to_string());
            }
        }
        out
    }

    fn assign_stmt(&mut self) -> Vec<Stmt> {
        let candidates: Vec<GTy> = [GTy::Int, GTy::Long, GTy::Double, GTy::Bool, GTy::Str, GTy::Char]
            .into_iter()
            .filter(|t| !self.vars(*t, true).is_empty())
            .collect();
        let Some(&ty) = candidates.choose(&mut self.rng) else {
            let name = *self.pick(SINKS);
            let arg = self.expr(GTy::Int, 1);
            return vec![s(StmtKind::Expr(call(name, vec![arg])))];
        };
        let v = self.var_of(ty, true).expect("writable var");
        let (op, rhs_ty) = match ty {
            GTy::Int | GTy::Long => {
                let op = *self.pick(&[
                    AssignOp::Assign,
                    AssignOp::Assign,
                    AssignOp::Add,
                    AssignOp::Sub,
                    AssignOp::Mul,
                    AssignOp::BitXor,
                    AssignOp::Shl,
                ]);
                (op, GTy::Int)
            }
            GTy::Double => (*self.pick(&[AssignOp::Assign, AssignOp::Add, AssignOp::Div]), GTy::Double),
            GTy::Bool => (*self.pick(&[AssignOp::Assign, AssignOp::BitAnd, AssignOp::BitOr]), GTy::Bool),
            GTy::Str => (*self.pick(&[AssignOp::Assign, AssignOp::Add]), GTy::Str),
            _ => (AssignOp::Add, GTy::Int),
        };
        let rhs_ty = if ty == GTy::Long && op == AssignOp::Assign && self.chance(0.5) { GTy::Long } else { rhs_ty };
        let value = self.expr(rhs_ty, 0);
        vec![s(StmtKind::Expr(assign(op, Expr::ident(&v), value)))]
    }

    fn if_stmt(&mut self, depth: usize, chain: usize) -> Stmt {
        let cond = self.expr(GTy::Bool, 0);
        let then_branch = self.block(depth + 1, 3);
        let else_branch = match self.weighted(&[40, 35, if chain < 2 { 25 } else { 0 }]) {
            0 => None,
            1 => Some(ElseBranch::Block(self.block(depth + 1, 2))),
            _ => Some(ElseBranch::If(Box::new(self.if_stmt(depth, chain + 1)))),
        };
        s(StmtKind::If { cond, then_branch, else_branch })
    }

    fn for_stmt(&mut self, depth: usize) -> Vec<Stmt> {
        let bound = self.small_bound(1);
        self.scopes.push(Vec::new());
        let reuse = if self.chance(0.15) { self.var_of(GTy::Int, true) } else { None };
        let counter = match &reuse {
            Some(v) => {
                self.lock(v, true);
                v.clone()
            }
            None => {
                let c = self.fresh(&["i", "j", "k"]);
                self.declare(&c, GTy::Int, true);
                c
            }
        };
        let init_of = |value: Expr, reuse: &Option<String>| -> Box<Stmt> {
            Box::new(match reuse {
                Some(v) => s(StmtKind::Expr(assign(AssignOp::Assign, Expr::ident(v), value))),
                None => decl(GTy::Int, &counter, value),
            })
        };
        let var = || Expr::ident(&counter);
        let variant = self.weighted(&[50, 15, 10, 10, 10]);
        let stmt = match variant {
            0 | 2 => {
                let update = if variant == 0 {
                    incdec(IncDecOp::Inc, self.chance(0.2), var())
                } else {
                    assign(AssignOp::Add, var(), int_lit(2))
                };
                self.loops.push(true);
                let body = self.block(depth + 1, 3);
                self.loops.pop();
                s(StmtKind::For {
                    init: Some(init_of(int_lit(0), &reuse)),
                    cond: Some(Expr::binary(BinaryOp::Lt, var(), bound)),
                    update: Some(update),
                    body,
                })
            }
            1 => {
                self.loops.push(true);
                let body = self.block(depth + 1, 3);
                self.loops.pop();
                s(StmtKind::For {
                    init: Some(init_of(bound, &reuse)),
                    cond: Some(Expr::binary(BinaryOp::Gt, var(), int_lit(0))),
                    update: Some(incdec(IncDecOp::Dec, false, var())),
                    body,
                })
            }
            3 => {
                self.loops.push(true);
                let mut body = self.block(depth + 1, 3);
                self.loops.pop();
                let exit = s(StmtKind::If {
                    cond: Expr::binary(BinaryOp::Ge, var(), bound),
                    then_branch: block(vec![s(StmtKind::Break)]),
                    else_branch: None,
                });
                body.stmts.insert(0, exit);
                s(StmtKind::For {
                    init: Some(init_of(int_lit(0), &reuse)),
                    cond: None,
                    update: Some(incdec(IncDecOp::Inc, false, var())),
                    body,
                })
            }
            _ => {
                self.loops.push(false);
                let mut body = self.block(depth + 1, 3);
                self.loops.pop();
                body.stmts.push(s(StmtKind::Expr(incdec(IncDecOp::Inc, false, var()))));
                s(StmtKind::For {
                    init: Some(init_of(int_lit(0), &reuse)),
                    cond: Some(Expr::binary(BinaryOp::Lt, var(), bound)),
                    update: None,
                    body,
                })
            }
        };
        self.scopes.pop();
        if let Some(v) = &reuse {
            self.lock(v, false);
        }
        vec![stmt]
    }

    fn try_stmt(&mut self, depth: usize) -> Stmt {
        self.scopes.push(Vec::new());
        let mut body = Vec::new();
        let risky_target = self.var_of(GTy::Int, true);
        let risky = match (risky_target, self.chance(0.5)) {
            (Some(t), true) => {
                let divisor = self.leaf(GTy::Int);
                assign(AssignOp::Assign, Expr::ident(&t), Expr::binary(BinaryOp::Div, self.expr(GTy::Int, 1), divisor))
            }
            _ => {
                let arg = Expr::binary(BinaryOp::Rem, self.expr(GTy::Int, 1), self.leaf(GTy::Int));
                call(self.pick(SINKS), vec![arg])
            }
        };
        body.push(s(StmtKind::Expr(risky)));
        self.scopes.pop();
        let mut body = block(body);
        body.stmts.extend(self.block(depth + 1, 2).stmts);
        let mut catches = Vec::new();
        let shapes: &[&[&str]] = &[
            &["ArithmeticException"],
            &["RuntimeException"],
            &["ArithmeticException", "Exception"],
            &["ArrayIndexOutOfBoundsException", "RuntimeException"],
            &[],
        ];
        let shape = *self.pick(shapes);
        for class in shape {
            let name = self.fresh(&["e", "ex", "err"]);
            self.scopes.push(Vec::new());
            let cbody = self.block(depth + 1, 2);
            self.scopes.pop();
            catches.push(CatchClause {
                modifiers: vec![],
                ty: TypeRef::simple(class),
                name,
                name_span: SourceSpan::default(),
                body: cbody,
            });
        }
        let finally = (catches.is_empty() || self.chance(0.3)).then(|| self.block(depth + 1, 2));
        s(StmtKind::Try { body, catches, finally })
    }

    fn method(&mut self) -> Method {
        let ret = [
            Some(GTy::Int),
            Some(GTy::Int),
            Some(GTy::Int),
            Some(GTy::Int),
            Some(GTy::Int),
            Some(GTy::Long),
            Some(GTy::Double),
            Some(GTy::Bool),
            Some(GTy::Str),
            None,
        ][self.rng.random_range(0..10)];
        self.ret = ret;
        self.scopes.push(Vec::new());
        let n_params = self.rng.random_range(1..=4);
        let mut params = Vec::new();
        for i in 0..n_params {
            let ty = if i == 0 {
                GTy::Int
            } else {
                [
                    GTy::Int,
                    GTy::Int,
                    GTy::Int,
                    GTy::Double,
                    GTy::Long,
                    GTy::Bool,
                    GTy::Str,
                    GTy::Char,
                    GTy::IntArr,
                    GTy::IntArr,
                ][self.rng.random_range(0..10)]
            };
            let name = self.fresh(NAMES);
            self.declare(&name, ty, false);
            params.push(Param {
                modifiers: vec![],
                ty: ty.type_ref(),
                name,
                varargs: false,
                span: SourceSpan::default(),
            });
        }
        let name = (*self.pick(FUNCTION_NAMES)).to_string();
        self.used.insert(name.clone());
        self.scopes.push(Vec::new());
        let mut stmts = Vec::new();
        while self.budget > 0 && stmts.len() < 14 {
            stmts.extend(self.stmt(0));
        }
        if let Some(t) = ret {
            let v = self.expr(t, 0);
            stmts.push(s(StmtKind::Return(Some(v))));
        }
        let javadoc = self.chance(0.3).then(|| {
            let mut doc = String::from("/**\n * Generated method.\n");
            for p in &params {
                doc.push_str(&format!(" * @param {} the {} value\n", p.name, p.name));
            }
            doc.push_str(" */");
            doc
        });
        Method {
            leading_comments: vec![],
            javadoc,
            modifiers: if self.chance(0.5) { vec!["static".into()] } else { vec![] },
            return_type: ret.map(GTy::type_ref).unwrap_or_else(|| TypeRef::simple("void")),
            name,
            params,
            throws: vec![],
            body: block(stmts),
            trailing_comments: vec![],
            span: SourceSpan::default(),
        }
    }
}

/// Deterministic for a given `(seed, size_budget)`. The result is re-parsed
/// from its printed form, so spans are real.
pub fn generate_program(seed: u64, size_budget: usize) -> Method {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        budget: size_budget.max(1) as i64,
        scopes: Vec::new(),
        used: HashSet::new(),
        loops: Vec::new(),
        ret: None,
    };
    let m = g.method();
    let text = print_method(&m);
    parse_method(&text).unwrap_or_else(|err| panic!("generated program does not parse: {err}\n{text}"))
}
