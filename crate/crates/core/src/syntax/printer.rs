//! Canonical pretty printer: 4-space indentation, one statement per line,
//! single spaces around binary operators, braces on every body.

use super::ast::*;

const INDENT: &str = "    ";

pub fn print_method(m: &Method) -> String {
    let mut p = Printer::default();
    p.method(m, true);
    p.finish()
}

/// Prints the declaration without its leading comments or Javadoc.
pub fn print_method_signature_and_body(m: &Method) -> String {
    let mut p = Printer::default();
    p.method(m, false);
    p.finish()
}

pub fn print_expr(e: &Expr) -> String {
    expr_to_string(e)
}

pub fn print_type(t: &TypeRef) -> String {
    let mut s = t.name.clone();
    if !t.args.is_empty() {
        s.push('<');
        s.push_str(&t.args.iter().map(print_type).collect::<Vec<_>>().join(", "));
        s.push('>');
    }
    for _ in 0..t.dims {
        s.push_str("[]");
    }
    s
}

#[derive(Default)]
struct Printer {
    out: String,
}

impl Printer {
    fn finish(mut self) -> String {
        while self.out.ends_with('\n') {
            self.out.pop();
        }
        self.out
    }

    fn line(&mut self, depth: usize, text: &str) {
        for _ in 0..depth {
            self.out.push_str(INDENT);
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn comments(&mut self, depth: usize, comments: &[String]) {
        for c in comments {
            self.line(depth, c);
        }
    }

    fn method(&mut self, m: &Method, with_header: bool) {
        if with_header {
            self.comments(0, &m.leading_comments);
            if let Some(doc) = &m.javadoc {
                self.line(0, doc);
            }
        }
        let mut sig = String::new();
        for md in &m.modifiers {
            sig.push_str(md);
            sig.push(' ');
        }
        sig.push_str(&print_type(&m.return_type));
        sig.push(' ');
        sig.push_str(&m.name);
        sig.push('(');
        let params: Vec<String> = m.params.iter().map(param_to_string).collect();
        sig.push_str(&params.join(", "));
        sig.push(')');
        if !m.throws.is_empty() {
            sig.push_str(" throws ");
            sig.push_str(&m.throws.iter().map(print_type).collect::<Vec<_>>().join(", "));
        }
        sig.push_str(" {");
        self.line(0, &sig);
        self.block_body(1, &m.body);
        self.line(0, "}");
        if with_header {
            self.comments(0, &m.trailing_comments);
        }
    }

    fn block_body(&mut self, depth: usize, b: &Block) {
        for s in &b.stmts {
            self.stmt(depth, s);
        }
        self.comments(depth, &b.inner_comments);
    }

    /// Appends trailing comments to the last emitted line.
    fn trailing(&mut self, trailing: &[String]) {
        if trailing.is_empty() {
            return;
        }
        debug_assert!(self.out.ends_with('\n'));
        self.out.pop();
        for c in trailing {
            self.out.push(' ');
            self.out.push_str(c);
        }
        self.out.push('\n');
    }

    fn stmt(&mut self, depth: usize, s: &Stmt) {
        self.comments(depth, &s.comments);
        match &s.kind {
            StmtKind::LocalDecl { .. } | StmtKind::Expr(_) => {
                let text = format!("{};", simple_stmt_to_string(&s.kind));
                self.line(depth, &text);
            }
            StmtKind::If { .. } => self.if_chain(depth, s, "if"),
            StmtKind::For { init, cond, update, body } => {
                let mut head = String::from("for (");
                if let Some(init) = init {
                    head.push_str(&simple_stmt_to_string(&init.kind));
                }
                head.push(';');
                if let Some(c) = cond {
                    head.push(' ');
                    head.push_str(&expr_to_string(c));
                }
                head.push(';');
                if let Some(u) = update {
                    head.push(' ');
                    head.push_str(&expr_to_string(u));
                }
                head.push_str(") {");
                self.line(depth, &head);
                self.block_body(depth + 1, body);
                self.line(depth, "}");
            }
            StmtKind::EnhancedFor { modifiers, ty, name, iterable, body, .. } => {
                let head = format!(
                    "for ({}{} {} : {}) {{",
                    mods_prefix(modifiers),
                    print_type(ty),
                    name,
                    expr_to_string(iterable)
                );
                self.line(depth, &head);
                self.block_body(depth + 1, body);
                self.line(depth, "}");
            }
            StmtKind::While { cond, body } => {
                self.line(depth, &format!("while ({}) {{", expr_to_string(cond)));
                self.block_body(depth + 1, body);
                self.line(depth, "}");
            }
            StmtKind::DoWhile { body, cond } => {
                self.line(depth, "do {");
                self.block_body(depth + 1, body);
                self.line(depth, &format!("}} while ({});", expr_to_string(cond)));
            }
            StmtKind::Return(None) => self.line(depth, "return;"),
            StmtKind::Return(Some(e)) => self.line(depth, &format!("return {};", expr_to_string(e))),
            StmtKind::Break => self.line(depth, "break;"),
            StmtKind::Continue => self.line(depth, "continue;"),
            StmtKind::Throw(e) => self.line(depth, &format!("throw {};", expr_to_string(e))),
            StmtKind::Try { body, catches, finally } => {
                self.line(depth, "try {");
                self.block_body(depth + 1, body);
                for c in catches {
                    self.line(
                        depth,
                        &format!("}} catch ({}{} {}) {{", mods_prefix(&c.modifiers), print_type(&c.ty), c.name),
                    );
                    self.block_body(depth + 1, &c.body);
                }
                if let Some(f) = finally {
                    self.line(depth, "} finally {");
                    self.block_body(depth + 1, f);
                }
                self.line(depth, "}");
            }
            StmtKind::Block(b) => {
                self.line(depth, "{");
                self.block_body(depth + 1, b);
                self.line(depth, "}");
            }
        }
        self.trailing(&s.trailing);
    }

    fn if_chain(&mut self, depth: usize, s: &Stmt, lead: &str) {
        let StmtKind::If { cond, then_branch, else_branch } = &s.kind else { unreachable!() };
        self.line(depth, &format!("{lead} ({}) {{", expr_to_string(cond)));
        self.block_body(depth + 1, then_branch);
        match else_branch {
            None => self.line(depth, "}"),
            Some(ElseBranch::Block(b)) => {
                self.line(depth, "} else {");
                self.block_body(depth + 1, b);
                self.line(depth, "}");
            }
            Some(ElseBranch::If(inner)) => {
                // comments on a chained `else if` move in front of the chain's brace line
                self.comments(depth + 1, &inner.comments);
                self.if_chain(depth, inner, "} else if");
                self.trailing(&inner.trailing);
            }
        }
    }
}

fn mods_prefix(mods: &[String]) -> String {
    mods.iter().map(|m| format!("{m} ")).collect()
}

fn param_to_string(p: &Param) -> String {
    format!("{}{}{} {}", mods_prefix(&p.modifiers), print_type(&p.ty), if p.varargs { "..." } else { "" }, p.name)
}

fn simple_stmt_to_string(kind: &StmtKind) -> String {
    match kind {
        StmtKind::LocalDecl { modifiers, ty, name, init, .. } => {
            let mut s = format!("{}{} {}", mods_prefix(modifiers), print_type(ty), name);
            if let Some(e) = init {
                s.push_str(" = ");
                s.push_str(&expr_to_string(e));
            }
            s
        }
        StmtKind::Expr(e) => expr_to_string(e),
        _ => unreachable!("only declarations and expressions are printed inline"),
    }
}

const PREC_ASSIGN: u8 = 0;
const PREC_TERNARY: u8 = 1;
const PREC_UNARY: u8 = 20;
const PREC_POSTFIX: u8 = 21;

fn binary_prec(op: BinaryOp) -> u8 {
    op.precedence() + 1
}

fn expr_prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Assign { .. } => PREC_ASSIGN,
        ExprKind::Ternary { .. } => PREC_TERNARY,
        ExprKind::Binary { op, .. } => binary_prec(*op),
        ExprKind::InstanceOf { .. } => binary_prec(BinaryOp::Lt),
        ExprKind::Unary { .. } | ExprKind::Cast { .. } => PREC_UNARY,
        ExprKind::IncDec { prefix: true, .. } => PREC_UNARY,
        _ => PREC_POSTFIX,
    }
}

/// Prints `e`, adding parentheses when its precedence is below `min`.
fn child(e: &Expr, min: u8) -> String {
    let s = expr_to_string(e);
    if expr_prec(e) < min {
        format!("({s})")
    } else {
        s
    }
}

fn expr_to_string(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Literal(lit) => match lit {
            Literal::Int(s) | Literal::Long(s) | Literal::Double(s) | Literal::Str(s) | Literal::Char(s) => s.clone(),
            Literal::Bool(b) => b.to_string(),
            Literal::Null => "null".into(),
        },
        ExprKind::Ident(n) => n.clone(),
        ExprKind::This => "this".into(),
        ExprKind::FieldAccess { recv, name } => format!("{}.{}", child(recv, PREC_POSTFIX), name),
        ExprKind::ArrayAccess { recv, index } => format!("{}[{}]", child(recv, PREC_POSTFIX), expr_to_string(index)),
        ExprKind::MethodCall { recv, name, args } => {
            let args = args.iter().map(expr_to_string).collect::<Vec<_>>().join(", ");
            match recv {
                Some(r) => format!("{}.{}({})", child(r, PREC_POSTFIX), name, args),
                None => format!("{name}({args})"),
            }
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let p = binary_prec(*op);
            format!("{} {} {}", child(lhs, p), op.symbol(), child(rhs, p + 1))
        }
        ExprKind::Unary { op, operand } => {
            let inner = child(operand, PREC_UNARY);
            let sym = op.symbol();
            // keep `- -x` and `+ +x` from fusing into `--` / `++`
            if (sym == "-" && inner.starts_with('-')) || (sym == "+" && inner.starts_with('+')) {
                format!("{sym} {inner}")
            } else {
                format!("{sym}{inner}")
            }
        }
        ExprKind::IncDec { op, prefix, target } => {
            if *prefix {
                format!("{}{}", op.symbol(), child(target, PREC_UNARY))
            } else {
                format!("{}{}", child(target, PREC_POSTFIX), op.symbol())
            }
        }
        ExprKind::Assign { op, target, value } => {
            format!("{} {} {}", child(target, PREC_POSTFIX), op.symbol(), child(value, PREC_ASSIGN))
        }
        ExprKind::Ternary { cond, then_expr, else_expr } => format!(
            "{} ? {} : {}",
            child(cond, PREC_TERNARY + 1),
            child(then_expr, PREC_ASSIGN),
            child(else_expr, PREC_TERNARY)
        ),
        ExprKind::Cast { ty, expr } => format!("({}) {}", print_type(ty), child(expr, PREC_UNARY)),
        ExprKind::New { ty, args } => {
            format!("new {}({})", print_type(ty), args.iter().map(expr_to_string).collect::<Vec<_>>().join(", "))
        }
        ExprKind::ArrayNew { elem, dims, extra_dims, init } => {
            let mut s = format!("new {}", print_type(elem));
            for d in dims {
                s.push('[');
                s.push_str(&expr_to_string(d));
                s.push(']');
            }
            for _ in 0..*extra_dims {
                s.push_str("[]");
            }
            if let Some(items) = init {
                s.push('{');
                s.push_str(&items.iter().map(expr_to_string).collect::<Vec<_>>().join(", "));
                s.push('}');
            }
            s
        }
        ExprKind::InstanceOf { expr, ty } => {
            format!("{} instanceof {}", child(expr, binary_prec(BinaryOp::Lt)), print_type(ty))
        }
        ExprKind::Paren(inner) => format!("({})", expr_to_string(inner)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_method;

    #[test]
    fn canonical_add() {
        let m = parse_method("int add(int a,int b){return a+b;}").unwrap();
        assert_eq!(print_method(&m), "int add(int a, int b) {\n    return a + b;\n}");
    }

    #[test]
    fn javadoc_reemitted_verbatim() {
        let src = "/**\n   * Sums.\n   */\npublic static int add(int a, int b) { return a + b; }";
        let m = parse_method(src).unwrap();
        let out = print_method(&m);
        assert!(out.starts_with("/**\n   * Sums.\n   */\npublic static int add("));
    }

    #[test]
    fn control_flow_layout() {
        let src = "void f(int n){ for(int i=0;i<n;i++) g(i); if(n>0){h();}else if(n<0){k();}else{z();} do{n--;}while(n>0); for(;;){break;} }";
        let m = parse_method(src).unwrap();
        let expected = "void f(int n) {
    for (int i = 0; i < n; i++) {
        g(i);
    }
    if (n > 0) {
        h();
    } else if (n < 0) {
        k();
    } else {
        z();
    }
    do {
        n--;
    } while (n > 0);
    for (;;) {
        break;
    }
}";
        assert_eq!(print_method(&m), expected);
    }

    #[test]
    fn unary_minus_does_not_fuse() {
        let m = parse_method("int f(int x){ return - -x + -(-x); }").unwrap();
        let out = print_method(&m);
        assert!(out.contains("return - -x + -(-x);"), "{out}");
    }

    #[test]
    fn synthesized_trees_get_required_parens() {
        let sum = Expr::binary(BinaryOp::Add, Expr::ident("a"), Expr::ident("b"));
        let prod = Expr::binary(BinaryOp::Mul, sum, Expr::ident("c"));
        assert_eq!(print_expr(&prod), "(a + b) * c");
        let sub = Expr::binary(
            BinaryOp::Sub,
            Expr::ident("a"),
            Expr::binary(BinaryOp::Sub, Expr::ident("b"), Expr::ident("c")),
        );
        assert_eq!(print_expr(&sub), "a - (b - c)");
    }

    #[test]
    fn trailing_and_inner_comments() {
        let src = "void f() {\n  a(); // one\n  /* two */ b();\n  // end\n}";
        let out = print_method(&parse_method(src).unwrap());
        assert_eq!(out, "void f() {\n    a(); // one\n    /* two */\n    b();\n    // end\n}");
    }
}
