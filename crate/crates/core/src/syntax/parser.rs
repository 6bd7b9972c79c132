//! Recursive-descent parser for single method declarations.
//!
//! Anything outside the supported subset (lambdas, switch, anonymous classes,
//! labels, generic calls, try-with-resources, ...) is rejected with
//! [`SyntaxError::Unsupported`] rather than approximated.

use super::ast::*;
use super::error::SyntaxError;
use super::lexer::{tokenize, Token, TokenKind};

type PResult<T> = Result<T, SyntaxError>;

const MODIFIER_KEYWORDS: &[&str] =
    &["public", "private", "protected", "static", "final", "abstract", "synchronized", "native", "strictfp"];

/// Parses text holding exactly one method declaration (optionally preceded by
/// comments and Javadoc).
pub fn parse_method(text: &str) -> PResult<Method> {
    let mut p = Parser::new(text)?;
    let m = p.method()?;
    p.expect_eof()?;
    Ok(m)
}

/// Parses a standalone expression.
pub fn parse_expression(text: &str) -> PResult<Expr> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

pub(crate) struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    prev_end: usize,
}

impl Parser {
    pub(crate) fn new(text: &str) -> PResult<Self> {
        Ok(Self { tokens: tokenize(text)?, pos: 0, prev_end: 0 })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, n: usize) -> &Token {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i]
    }

    fn at(&self, kind: TokenKind) -> bool {
        self.peek().kind == kind
    }

    fn at_op(&self, op: &str) -> bool {
        self.peek().is_op(op)
    }

    fn at_kw(&self, kw: &str) -> bool {
        self.peek().is_keyword(kw)
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
            self.prev_end = t.span.end_offset;
        }
        t
    }

    fn span_from(&self, start: SourceSpan) -> SourceSpan {
        SourceSpan { end_offset: self.prev_end.max(start.start_offset), ..start }
    }

    fn error(&self, expected: &str) -> SyntaxError {
        let t = self.peek();
        SyntaxError::Parse {
            line: t.span.line,
            column: t.span.column,
            expected: expected.to_string(),
            found: if t.kind == TokenKind::Eof { "end of input".into() } else { t.text.clone() },
        }
    }

    fn unsupported(&self, construct: &str) -> SyntaxError {
        SyntaxError::Unsupported { construct: construct.to_string(), span: self.peek().span }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> PResult<Token> {
        if self.at(kind) {
            Ok(self.bump())
        } else {
            Err(self.error(what))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Token> {
        if self.at_kw(kw) {
            Ok(self.bump())
        } else {
            Err(self.error(&format!("`{kw}`")))
        }
    }

    fn expect_ident(&mut self) -> PResult<Token> {
        self.expect(TokenKind::Ident, "identifier")
    }

    fn expect_eof(&mut self) -> PResult<()> {
        if self.at(TokenKind::Eof) {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    fn take_comments(&mut self, idx: usize) -> Vec<String> {
        std::mem::take(&mut self.tokens[idx].comments).into_iter().map(|c| c.text).collect()
    }

    /// Unclaimed comments on tokens in `from..self.pos`.
    fn sweep_comments(&mut self, from: usize) -> Vec<String> {
        (from..self.pos).flat_map(|i| self.take_comments(i)).collect()
    }

    /// Same-line comments on the current token (trailing the previous statement).
    fn take_trailing(&mut self) -> Vec<String> {
        let comments = &mut self.tokens[self.pos].comments;
        let n = comments.iter().take_while(|c| c.same_line).count();
        comments.drain(..n).map(|c| c.text).collect()
    }

    // ---- declarations -------------------------------------------------

    fn method(&mut self) -> PResult<Method> {
        let start = self.peek().span;
        let mut leading = self.take_comments(self.pos);
        let javadoc = match leading.iter().rposition(|c| c.starts_with("/**") && c != "/**/") {
            Some(i) if i + 1 == leading.len() => leading.pop(),
            _ => None,
        };
        let sig_start = self.pos;
        let modifiers = self.modifiers()?;
        if self.at_op("<") {
            return Err(self.unsupported("generic method"));
        }
        if self.at_kw("class") || self.at_kw("interface") || self.at_kw("enum") {
            return Err(self.unsupported("type declaration"));
        }
        let return_type = if self.at_kw("void") {
            self.bump();
            TypeRef::simple("void")
        } else {
            self.type_ref()?
        };
        if self.at(TokenKind::LParen) {
            return Err(self.unsupported("constructor"));
        }
        let name = self.expect_ident()?.text;
        self.expect(TokenKind::LParen, "`(`")?;
        let mut params = Vec::new();
        if !self.at(TokenKind::RParen) {
            loop {
                params.push(self.param()?);
                if self.at(TokenKind::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen, "`)`")?;
        if self.at(TokenKind::LBracket) {
            return Err(self.unsupported("array dimensions after parameter list"));
        }
        let mut throws = Vec::new();
        if self.at_kw("throws") {
            self.bump();
            loop {
                throws.push(self.type_ref()?);
                if self.at(TokenKind::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        if self.at(TokenKind::Semi) {
            return Err(self.unsupported("method without body"));
        }
        if !self.at(TokenKind::LBrace) {
            return Err(self.error("`{`"));
        }
        // comments inside the signature and on the opening brace
        let brace = self.pos;
        let mut sig_comments = self.sweep_comments(sig_start);
        sig_comments.extend(self.take_comments(brace));
        leading.extend(sig_comments);
        let body = self.block()?;
        let span = self.span_from(start);
        let trailing_comments = self.take_comments(self.pos);

        let mut seen = std::collections::HashSet::new();
        for p in &params {
            if !seen.insert(p.name.as_str()) {
                return Err(SyntaxError::Parse {
                    line: p.span.line,
                    column: p.span.column,
                    expected: "distinct parameter names".into(),
                    found: p.name.clone(),
                });
            }
        }

        Ok(Method {
            leading_comments: leading,
            javadoc,
            modifiers,
            return_type,
            name,
            params,
            throws,
            body,
            trailing_comments,
            span,
        })
    }

    fn modifiers(&mut self) -> PResult<Vec<String>> {
        let mut mods = Vec::new();
        loop {
            if self.at(TokenKind::At) {
                mods.push(self.annotation()?);
            } else if self.peek().kind == TokenKind::Keyword && MODIFIER_KEYWORDS.contains(&self.peek().text.as_str()) {
                // `synchronized (x) {...}` is a statement, not a modifier
                if self.at_kw("synchronized") && self.peek_at(1).kind == TokenKind::LParen {
                    break;
                }
                mods.push(self.bump().text);
            } else {
                break;
            }
        }
        Ok(mods)
    }

    /// `@Name` or `@Name(simple, tokens)`, kept as normalized text.
    fn annotation(&mut self) -> PResult<String> {
        self.expect(TokenKind::At, "`@`")?;
        if self.at_kw("interface") {
            return Err(self.unsupported("annotation type declaration"));
        }
        let mut text = format!("@{}", self.expect_ident()?.text);
        while self.at(TokenKind::Dot) {
            self.bump();
            text.push('.');
            text.push_str(&self.expect_ident()?.text);
        }
        if self.at(TokenKind::LParen) {
            self.bump();
            text.push('(');
            let mut depth = 0usize;
            loop {
                let t = self.peek().clone();
                match t.kind {
                    TokenKind::Eof => return Err(self.error("`)`")),
                    TokenKind::RParen if depth == 0 => break,
                    TokenKind::LParen | TokenKind::LBrace => depth += 1,
                    TokenKind::RParen | TokenKind::RBrace => depth -= 1,
                    _ => {}
                }
                if t.kind == TokenKind::Comma {
                    text.push_str(", ");
                } else if t.kind == TokenKind::Op && t.text == "=" {
                    text.push_str(" = ");
                } else {
                    text.push_str(&t.text);
                }
                self.bump();
            }
            self.bump();
            text.push(')');
        }
        Ok(text)
    }

    fn param(&mut self) -> PResult<Param> {
        let start = self.peek().span;
        let modifiers = self.modifiers()?;
        let ty = self.type_ref()?;
        let varargs = if self.at(TokenKind::Ellipsis) {
            self.bump();
            true
        } else {
            false
        };
        let name = self.expect_ident()?.text;
        if self.at(TokenKind::LBracket) {
            return Err(self.unsupported("array declarator after name"));
        }
        Ok(Param { modifiers, ty, name, varargs, span: self.span_from(start) })
    }

    // ---- types --------------------------------------------------------

    pub(crate) fn type_ref(&mut self) -> PResult<TypeRef> {
        let mut ty = self.type_name()?;
        while self.at(TokenKind::LBracket) && self.peek_at(1).kind == TokenKind::RBracket {
            self.bump();
            self.bump();
            ty.dims += 1;
        }
        Ok(ty)
    }

    /// Type without trailing `[]` pairs.
    fn type_name(&mut self) -> PResult<TypeRef> {
        let t = self.peek().clone();
        let mut name = match t.kind {
            TokenKind::Keyword if is_primitive_name(&t.text) => {
                self.bump();
                t.text
            }
            TokenKind::Ident => {
                self.bump();
                t.text
            }
            _ => return Err(self.error("type")),
        };
        let mut args = Vec::new();
        if !is_primitive_name(&name) {
            loop {
                if self.at_op("<") {
                    if !args.is_empty() {
                        return Err(self.unsupported("qualified generic type"));
                    }
                    self.bump();
                    if self.at_op(">") {
                        return Err(self.unsupported("diamond operator"));
                    }
                    loop {
                        if self.at(TokenKind::Question) {
                            return Err(self.unsupported("wildcard type argument"));
                        }
                        let arg = self.type_ref()?;
                        if arg.is_primitive() {
                            return Err(self.error("reference type argument"));
                        }
                        args.push(arg);
                        if self.at(TokenKind::Comma) {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.close_angle()?;
                } else if self.at(TokenKind::Dot) && self.peek_at(1).kind == TokenKind::Ident && args.is_empty() {
                    self.bump();
                    name.push('.');
                    name.push_str(&self.bump().text);
                } else {
                    break;
                }
            }
        }
        Ok(TypeRef { name, args, dims: 0 })
    }

    /// Consumes one `>`, splitting `>>` / `>>>` / `>=`-style tokens.
    fn close_angle(&mut self) -> PResult<()> {
        let t = self.peek().clone();
        if t.kind == TokenKind::Op && t.text.starts_with('>') {
            if t.text == ">" {
                self.bump();
            } else {
                let tok = &mut self.tokens[self.pos];
                tok.text.remove(0);
                tok.span.start_offset += 1;
                tok.span.column += 1;
                self.prev_end = tok.span.start_offset;
            }
            Ok(())
        } else {
            Err(self.error("`>`"))
        }
    }

    /// Speculatively checks whether a local variable declaration starts here.
    fn looks_like_decl(&mut self) -> PResult<bool> {
        if self.at(TokenKind::At) || self.at_kw("final") {
            return Ok(true);
        }
        let save = (self.pos, self.prev_end);
        let saved_tokens: Vec<Token> = self.tokens[self.pos..(self.pos + 64).min(self.tokens.len())].to_vec();
        let ok = match self.type_ref() {
            Ok(_) => {
                self.at(TokenKind::Ident) && {
                    let next = self.peek_at(1);
                    next.is_op("=")
                        || matches!(
                            next.kind,
                            TokenKind::Semi | TokenKind::Comma | TokenKind::Colon | TokenKind::LBracket
                        )
                }
            }
            Err(e @ SyntaxError::Unsupported { .. }) => return Err(e),
            Err(_) => false,
        };
        // close_angle may have split tokens in place
        let start = save.0;
        for (i, t) in saved_tokens.into_iter().enumerate() {
            self.tokens[start + i] = t;
        }
        self.pos = save.0;
        self.prev_end = save.1;
        Ok(ok)
    }

    // ---- statements ---------------------------------------------------

    fn block(&mut self) -> PResult<Block> {
        let start = self.expect(TokenKind::LBrace, "`{`")?.span;
        let mut stmts: Vec<Stmt> = Vec::new();
        loop {
            if self.at(TokenKind::Eof) {
                return Err(self.error("`}`"));
            }
            if let Some(last) = stmts.last_mut() {
                let trailing = self.take_trailing();
                last.trailing.extend(trailing);
            }
            if self.at(TokenKind::RBrace) {
                break;
            }
            stmts.push(self.stmt()?);
        }
        let inner_comments = self.take_comments(self.pos);
        self.bump();
        Ok(Block { stmts, inner_comments, span: self.span_from(start) })
    }

    /// A statement used as a loop/if body; non-blocks are wrapped.
    fn body(&mut self) -> PResult<Block> {
        if self.at(TokenKind::LBrace) {
            self.block()
        } else {
            let s = self.stmt()?;
            if matches!(s.kind, StmtKind::LocalDecl { .. }) {
                return Err(SyntaxError::Parse {
                    line: s.span.line,
                    column: s.span.column,
                    expected: "statement".into(),
                    found: "declaration".into(),
                });
            }
            let span = s.span;
            Ok(Block { stmts: vec![s], inner_comments: Vec::new(), span })
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let first = self.pos;
        let start = self.peek().span;
        let comments = self.take_comments(first);
        let kind = self.stmt_kind()?;
        let mut comments = comments;
        comments.extend(self.sweep_comments(first + 1));
        Ok(Stmt { kind, comments, trailing: Vec::new(), span: self.span_from(start) })
    }

    fn stmt_kind(&mut self) -> PResult<StmtKind> {
        let t = self.peek().clone();
        match t.kind {
            TokenKind::LBrace => return Ok(StmtKind::Block(self.block()?)),
            TokenKind::Semi => return Err(self.unsupported("empty statement")),
            TokenKind::Ident if self.peek_at(1).kind == TokenKind::Colon => {
                return Err(self.unsupported("labeled statement"))
            }
            TokenKind::Keyword => match t.text.as_str() {
                "if" => return self.if_stmt(),
                "for" => return self.for_stmt(),
                "while" => {
                    self.bump();
                    let cond = self.paren_cond()?;
                    let body = self.body()?;
                    return Ok(StmtKind::While { cond, body });
                }
                "do" => {
                    self.bump();
                    let body = self.body()?;
                    self.expect_kw("while")?;
                    let cond = self.paren_cond()?;
                    self.expect(TokenKind::Semi, "`;`")?;
                    return Ok(StmtKind::DoWhile { body, cond });
                }
                "return" => {
                    self.bump();
                    let value = if self.at(TokenKind::Semi) { None } else { Some(self.expr()?) };
                    self.expect(TokenKind::Semi, "`;`")?;
                    return Ok(StmtKind::Return(value));
                }
                "break" | "continue" => {
                    self.bump();
                    if self.at(TokenKind::Ident) {
                        return Err(self.unsupported("labeled jump"));
                    }
                    self.expect(TokenKind::Semi, "`;`")?;
                    return Ok(if t.text == "break" { StmtKind::Break } else { StmtKind::Continue });
                }
                "throw" => {
                    self.bump();
                    let e = self.expr()?;
                    self.expect(TokenKind::Semi, "`;`")?;
                    return Ok(StmtKind::Throw(e));
                }
                "try" => return self.try_stmt(),
                "switch" => return Err(self.unsupported("switch")),
                "synchronized" if self.peek_at(1).kind == TokenKind::LParen => {
                    return Err(self.unsupported("synchronized block"))
                }
                "assert" => return Err(self.unsupported("assert")),
                "class" | "interface" | "enum" | "abstract" | "static" => {
                    return Err(self.unsupported("local type declaration"))
                }
                "else" | "catch" | "finally" | "case" | "default" => return Err(self.error("statement")),
                "this" | "super" if self.peek_at(1).kind == TokenKind::LParen => {
                    return Err(self.unsupported("explicit constructor invocation"))
                }
                _ => {}
            },
            _ => {}
        }
        if self.looks_like_decl()? {
            let decl = self.local_decl()?;
            self.expect(TokenKind::Semi, "`;`")?;
            return Ok(decl);
        }
        let e = self.expr()?;
        self.check_statement_expr(&e)?;
        self.expect(TokenKind::Semi, "`;`")?;
        Ok(StmtKind::Expr(e))
    }

    fn check_statement_expr(&self, e: &Expr) -> PResult<()> {
        match e.kind {
            ExprKind::Assign { .. } | ExprKind::IncDec { .. } | ExprKind::MethodCall { .. } | ExprKind::New { .. } => {
                Ok(())
            }
            _ => Err(SyntaxError::Parse {
                line: e.span.line,
                column: e.span.column,
                expected: "statement expression".into(),
                found: "expression".into(),
            }),
        }
    }

    /// Declaration without the terminating `;`.
    fn local_decl(&mut self) -> PResult<StmtKind> {
        let modifiers = self.modifiers()?;
        let ty = self.type_ref()?;
        let name_tok = self.expect_ident()?;
        if self.at(TokenKind::LBracket) {
            return Err(self.unsupported("array declarator after name"));
        }
        let init = if self.at_op("=") {
            self.bump();
            if self.at(TokenKind::LBrace) {
                Some(self.array_initializer_for(&ty)?)
            } else {
                Some(self.expr()?)
            }
        } else {
            None
        };
        if self.at(TokenKind::Comma) {
            return Err(self.unsupported("multiple declarators"));
        }
        Ok(StmtKind::LocalDecl { modifiers, ty, name: name_tok.text, name_span: name_tok.span, init })
    }

    /// `int[] a = {1, 2}` is kept as `new int[]{1, 2}`.
    fn array_initializer_for(&mut self, ty: &TypeRef) -> PResult<Expr> {
        let start = self.peek().span;
        let Some(elem_full) = ty.element() else {
            return Err(self.error("array type for initializer"));
        };
        let elems = self.array_init_elems()?;
        let elem = TypeRef { dims: 0, ..elem_full.clone() };
        Ok(Expr {
            kind: ExprKind::ArrayNew { elem, dims: Vec::new(), extra_dims: elem_full.dims + 1, init: Some(elems) },
            span: self.span_from(start),
        })
    }

    fn array_init_elems(&mut self) -> PResult<Vec<Expr>> {
        self.expect(TokenKind::LBrace, "`{`")?;
        let mut elems = Vec::new();
        while !self.at(TokenKind::RBrace) {
            if self.at(TokenKind::LBrace) {
                return Err(self.unsupported("nested array initializer"));
            }
            elems.push(self.expr()?);
            if self.at(TokenKind::Comma) {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(TokenKind::RBrace, "`}`")?;
        Ok(elems)
    }

    fn paren_cond(&mut self) -> PResult<Expr> {
        self.expect(TokenKind::LParen, "`(`")?;
        let e = self.expr()?;
        self.expect(TokenKind::RParen, "`)`")?;
        Ok(e)
    }

    fn if_stmt(&mut self) -> PResult<StmtKind> {
        self.expect_kw("if")?;
        let cond = self.paren_cond()?;
        let then_branch = self.body()?;
        let else_branch = if self.at_kw("else") {
            self.bump();
            if self.at_kw("if") {
                // comments inside the chain stay on the tokens for the outer statement
                let start = self.peek().span;
                let kind = self.if_stmt()?;
                Some(ElseBranch::If(Box::new(Stmt {
                    kind,
                    comments: Vec::new(),
                    trailing: Vec::new(),
                    span: self.span_from(start),
                })))
            } else {
                Some(ElseBranch::Block(self.body()?))
            }
        } else {
            None
        };
        Ok(StmtKind::If { cond, then_branch, else_branch })
    }

    fn for_stmt(&mut self) -> PResult<StmtKind> {
        self.expect_kw("for")?;
        self.expect(TokenKind::LParen, "`(`")?;
        let mut init = None;
        if !self.at(TokenKind::Semi) {
            let start = self.peek().span;
            if self.looks_like_decl()? {
                // enhanced for: [mods] Type name :
                let save = self.pos;
                let modifiers = self.modifiers()?;
                let ty = self.type_ref()?;
                if self.at(TokenKind::Ident) && self.peek_at(1).kind == TokenKind::Colon {
                    let name_tok = self.bump();
                    self.bump();
                    let iterable = self.expr()?;
                    self.expect(TokenKind::RParen, "`)`")?;
                    let body = self.body()?;
                    return Ok(StmtKind::EnhancedFor {
                        modifiers,
                        ty,
                        name: name_tok.text,
                        name_span: name_tok.span,
                        iterable,
                        body,
                    });
                }
                self.pos = save;
                let kind = self.local_decl()?;
                init = Some(Box::new(Stmt {
                    kind,
                    comments: Vec::new(),
                    trailing: Vec::new(),
                    span: self.span_from(start),
                }));
            } else {
                let e = self.expr()?;
                self.check_statement_expr(&e)?;
                if self.at(TokenKind::Comma) {
                    return Err(self.unsupported("comma-separated for initializer"));
                }
                init = Some(Box::new(Stmt {
                    kind: StmtKind::Expr(e),
                    comments: Vec::new(),
                    trailing: Vec::new(),
                    span: self.span_from(start),
                }));
            }
        }
        self.expect(TokenKind::Semi, "`;`")?;
        let cond = if self.at(TokenKind::Semi) { None } else { Some(self.expr()?) };
        self.expect(TokenKind::Semi, "`;`")?;
        let update = if self.at(TokenKind::RParen) {
            None
        } else {
            let e = self.expr()?;
            self.check_statement_expr(&e)?;
            if self.at(TokenKind::Comma) {
                return Err(self.unsupported("comma-separated for update"));
            }
            Some(e)
        };
        self.expect(TokenKind::RParen, "`)`")?;
        let body = self.body()?;
        Ok(StmtKind::For { init, cond, update, body })
    }

    fn try_stmt(&mut self) -> PResult<StmtKind> {
        self.expect_kw("try")?;
        if self.at(TokenKind::LParen) {
            return Err(self.unsupported("try-with-resources"));
        }
        let body = self.block()?;
        let mut catches = Vec::new();
        while self.at_kw("catch") {
            self.bump();
            self.expect(TokenKind::LParen, "`(`")?;
            let modifiers = self.modifiers()?;
            let ty = self.type_ref()?;
            if self.at_op("|") {
                return Err(self.unsupported("multi-catch"));
            }
            let name_tok = self.expect_ident()?;
            self.expect(TokenKind::RParen, "`)`")?;
            let cbody = self.block()?;
            catches.push(CatchClause { modifiers, ty, name: name_tok.text, name_span: name_tok.span, body: cbody });
        }
        let finally = if self.at_kw("finally") {
            self.bump();
            Some(self.block()?)
        } else {
            None
        };
        if catches.is_empty() && finally.is_none() {
            return Err(self.error("`catch` or `finally`"));
        }
        Ok(StmtKind::Try { body, catches, finally })
    }

    // ---- expressions --------------------------------------------------

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        let start = self.peek().span;
        if self.at(TokenKind::Ident) && self.peek_at(1).is_op("->") {
            return Err(self.unsupported("lambda"));
        }
        let lhs = self.ternary()?;
        if self.at_op("->") {
            return Err(self.unsupported("lambda"));
        }
        let t = self.peek().clone();
        if t.kind == TokenKind::Op {
            if let Some(op) = AssignOp::from_symbol(&t.text) {
                if !lhs.is_lvalue() {
                    return Err(SyntaxError::Parse {
                        line: t.span.line,
                        column: t.span.column,
                        expected: "assignable expression before assignment".into(),
                        found: t.text,
                    });
                }
                self.bump();
                let value = self.expr()?;
                return Ok(Expr {
                    kind: ExprKind::Assign { op, target: Box::new(lhs), value: Box::new(value) },
                    span: self.span_from(start),
                });
            }
        }
        Ok(lhs)
    }

    fn ternary(&mut self) -> PResult<Expr> {
        let start = self.peek().span;
        let cond = self.binary(1)?;
        if self.at(TokenKind::Question) {
            self.bump();
            let then_expr = self.expr()?;
            self.expect(TokenKind::Colon, "`:`")?;
            let else_expr = self.ternary()?;
            return Ok(Expr {
                kind: ExprKind::Ternary {
                    cond: Box::new(cond),
                    then_expr: Box::new(then_expr),
                    else_expr: Box::new(else_expr),
                },
                span: self.span_from(start),
            });
        }
        Ok(cond)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let start = self.peek().span;
        let mut lhs = self.unary()?;
        loop {
            let t = self.peek().clone();
            if t.is_keyword("instanceof") {
                if BinaryOp::Lt.precedence() < min_prec {
                    break;
                }
                self.bump();
                let ty = self.type_ref()?;
                lhs = Expr { kind: ExprKind::InstanceOf { expr: Box::new(lhs), ty }, span: self.span_from(start) };
                continue;
            }
            let op = match (t.kind, BinaryOp::from_symbol(&t.text)) {
                (TokenKind::Op, Some(op)) => op,
                _ => break,
            };
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr {
                kind: ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) },
                span: self.span_from(start),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.peek().span;
        let t = self.peek().clone();
        if t.kind == TokenKind::Op {
            let op = match t.text.as_str() {
                "!" => Some(UnaryOp::Not),
                "-" => Some(UnaryOp::Neg),
                "+" => Some(UnaryOp::Plus),
                "~" => Some(UnaryOp::BitNot),
                _ => None,
            };
            if let Some(op) = op {
                self.bump();
                let operand = self.unary()?;
                return Ok(Expr {
                    kind: ExprKind::Unary { op, operand: Box::new(operand) },
                    span: self.span_from(start),
                });
            }
            if t.text == "++" || t.text == "--" {
                self.bump();
                let target = self.unary()?;
                if !target.is_lvalue() {
                    return Err(self.error("assignable operand"));
                }
                let op = if t.text == "++" { IncDecOp::Inc } else { IncDecOp::Dec };
                return Ok(Expr {
                    kind: ExprKind::IncDec { op, prefix: true, target: Box::new(target) },
                    span: self.span_from(start),
                });
            }
        }
        if t.kind == TokenKind::LParen {
            if self.paren_followed_by_arrow() {
                return Err(self.unsupported("lambda"));
            }
            if let Some(cast) = self.try_cast(start)? {
                return Ok(cast);
            }
        }
        self.postfix()
    }

    fn paren_followed_by_arrow(&self) -> bool {
        let mut depth = 0usize;
        let mut i = self.pos;
        while i < self.tokens.len() {
            match self.tokens[i].kind {
                TokenKind::LParen => depth += 1,
                TokenKind::RParen => {
                    depth -= 1;
                    if depth == 0 {
                        return self.tokens.get(i + 1).is_some_and(|t| t.is_op("->"));
                    }
                }
                TokenKind::Eof => return false,
                _ => {}
            }
            i += 1;
        }
        false
    }

    fn try_cast(&mut self, start: SourceSpan) -> PResult<Option<Expr>> {
        let next = self.peek_at(1).clone();
        let primitive = next.kind == TokenKind::Keyword && is_primitive_name(&next.text);
        if !primitive && next.kind != TokenKind::Ident {
            return Ok(None);
        }
        let saved_pos = self.pos;
        let saved_end = self.prev_end;
        let saved: Vec<Token> = self.tokens[self.pos..(self.pos + 64).min(self.tokens.len())].to_vec();
        self.bump();
        let ty = match self.type_ref() {
            Ok(ty) if self.at(TokenKind::RParen) => Some(ty),
            _ => None,
        };
        let is_cast = match &ty {
            Some(ty) if ty.is_primitive() => true,
            Some(_) => {
                let after = self.peek_at(1);
                match after.kind {
                    TokenKind::Ident
                    | TokenKind::IntLit
                    | TokenKind::LongLit
                    | TokenKind::FloatLit
                    | TokenKind::CharLit
                    | TokenKind::StringLit
                    | TokenKind::LParen => true,
                    TokenKind::Op => after.text == "!" || after.text == "~",
                    TokenKind::Keyword => {
                        matches!(after.text.as_str(), "this" | "new" | "true" | "false" | "null" | "super")
                    }
                    _ => false,
                }
            }
            None => false,
        };
        if !is_cast {
            for (i, t) in saved.into_iter().enumerate() {
                self.tokens[saved_pos + i] = t;
            }
            self.pos = saved_pos;
            self.prev_end = saved_end;
            return Ok(None);
        }
        self.expect(TokenKind::RParen, "`)`")?;
        let operand = self.unary()?;
        Ok(Some(Expr {
            kind: ExprKind::Cast { ty: ty.expect("checked above"), expr: Box::new(operand) },
            span: self.span_from(start),
        }))
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect(TokenKind::LParen, "`(`")?;
        let mut args = Vec::new();
        if !self.at(TokenKind::RParen) {
            loop {
                args.push(self.expr()?);
                if self.at(TokenKind::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen, "`)`")?;
        Ok(args)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let start = self.peek().span;
        let mut e = self.primary()?;
        loop {
            if self.at(TokenKind::Dot) {
                self.bump();
                let t = self.peek().clone();
                match t.kind {
                    TokenKind::Ident => {
                        self.bump();
                        if self.at(TokenKind::LParen) {
                            let args = self.args()?;
                            e = Expr {
                                kind: ExprKind::MethodCall { recv: Some(Box::new(e)), name: t.text, args },
                                span: self.span_from(start),
                            };
                        } else {
                            e = Expr {
                                kind: ExprKind::FieldAccess { recv: Box::new(e), name: t.text },
                                span: self.span_from(start),
                            };
                        }
                    }
                    TokenKind::Keyword if t.text == "class" => return Err(self.unsupported("class literal")),
                    TokenKind::Keyword if t.text == "new" => {
                        return Err(self.unsupported("qualified instance creation"))
                    }
                    TokenKind::Keyword if t.text == "this" => return Err(self.unsupported("qualified this")),
                    TokenKind::Op if t.text == "<" => return Err(self.unsupported("explicit generic invocation")),
                    _ => return Err(self.error("member name")),
                }
            } else if self.at(TokenKind::LBracket) {
                self.bump();
                let index = self.expr()?;
                self.expect(TokenKind::RBracket, "`]`")?;
                e = Expr {
                    kind: ExprKind::ArrayAccess { recv: Box::new(e), index: Box::new(index) },
                    span: self.span_from(start),
                };
            } else if self.at_op("++") || self.at_op("--") {
                if !e.is_lvalue() {
                    return Err(self.error("assignable operand"));
                }
                let op = if self.bump().text == "++" { IncDecOp::Inc } else { IncDecOp::Dec };
                e = Expr {
                    kind: ExprKind::IncDec { op, prefix: false, target: Box::new(e) },
                    span: self.span_from(start),
                };
            } else if self.at_op("::") {
                return Err(self.unsupported("method reference"));
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.peek().span;
        let t = self.peek().clone();
        let kind = match t.kind {
            TokenKind::IntLit => {
                self.bump();
                ExprKind::Literal(Literal::Int(t.text))
            }
            TokenKind::LongLit => {
                self.bump();
                ExprKind::Literal(Literal::Long(t.text))
            }
            TokenKind::FloatLit => {
                self.bump();
                ExprKind::Literal(Literal::Double(t.text))
            }
            TokenKind::StringLit => {
                self.bump();
                ExprKind::Literal(Literal::Str(t.text))
            }
            TokenKind::CharLit => {
                self.bump();
                ExprKind::Literal(Literal::Char(t.text))
            }
            TokenKind::Ident => {
                self.bump();
                if self.at(TokenKind::LParen) {
                    let args = self.args()?;
                    ExprKind::MethodCall { recv: None, name: t.text, args }
                } else {
                    ExprKind::Ident(t.text)
                }
            }
            TokenKind::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                ExprKind::Paren(Box::new(inner))
            }
            TokenKind::Keyword => match t.text.as_str() {
                "true" | "false" => {
                    self.bump();
                    ExprKind::Literal(Literal::Bool(t.text == "true"))
                }
                "null" => {
                    self.bump();
                    ExprKind::Literal(Literal::Null)
                }
                "this" => {
                    self.bump();
                    ExprKind::This
                }
                "new" => return self.creator(),
                "super" => return Err(self.unsupported("super reference")),
                "switch" => return Err(self.unsupported("switch expression")),
                kw if is_primitive_name(kw) || kw == "void" => {
                    return Err(self.unsupported("class literal or primitive type in expression"))
                }
                _ => return Err(self.error("expression")),
            },
            _ => return Err(self.error("expression")),
        };
        Ok(Expr { kind, span: self.span_from(start) })
    }

    fn creator(&mut self) -> PResult<Expr> {
        let start = self.expect_kw("new")?.span;
        let t = self.peek().clone();
        let ty = if t.kind == TokenKind::Keyword && is_primitive_name(&t.text) {
            self.bump();
            TypeRef::simple(&t.text)
        } else {
            if self.at_op("<") {
                return Err(self.unsupported("explicit generic constructor"));
            }
            self.type_name()?
        };
        if self.at(TokenKind::LParen) {
            let args = self.args()?;
            if self.at(TokenKind::LBrace) {
                return Err(self.unsupported("anonymous class"));
            }
            return Ok(Expr { kind: ExprKind::New { ty, args }, span: self.span_from(start) });
        }
        if !self.at(TokenKind::LBracket) {
            return Err(self.error("`(` or `[`"));
        }
        let mut dims = Vec::new();
        let mut extra_dims = 0;
        while self.at(TokenKind::LBracket) {
            self.bump();
            if self.at(TokenKind::RBracket) {
                self.bump();
                extra_dims += 1;
            } else {
                if extra_dims > 0 {
                    return Err(self.error("`]`"));
                }
                dims.push(self.expr()?);
                self.expect(TokenKind::RBracket, "`]`")?;
            }
        }
        let init = if self.at(TokenKind::LBrace) {
            if !dims.is_empty() {
                return Err(self.error("no initializer with explicit dimensions"));
            }
            Some(self.array_init_elems()?)
        } else {
            if dims.is_empty() {
                return Err(self.error("array dimension"));
            }
            None
        };
        Ok(Expr { kind: ExprKind::ArrayNew { elem: ty, dims, extra_dims, init }, span: self.span_from(start) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_method() {
        let m = parse_method("int add(int a, int b){ return a+b; }").unwrap();
        assert_eq!(m.name, "add");
        assert_eq!(m.params.len(), 2);
        assert_eq!(m.body.stmts.len(), 1);
        match &m.body.stmts[0].kind {
            StmtKind::Return(Some(e)) => {
                assert!(matches!(e.kind, ExprKind::Binary { op: BinaryOp::Add, .. }))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn classic_for_loop_shape() {
        let m = parse_method("void f(int n) { for (int i = 0; i < n; i++) { g(i); } }").unwrap();
        let StmtKind::For { init, cond, update, .. } = &m.body.stmts[0].kind else { panic!() };
        assert!(matches!(init.as_deref().unwrap().kind, StmtKind::LocalDecl { .. }));
        assert!(matches!(cond.as_ref().unwrap().kind, ExprKind::Binary { op: BinaryOp::Lt, .. }));
        assert!(matches!(update.as_ref().unwrap().kind, ExprKind::IncDec { op: IncDecOp::Inc, prefix: false, .. }));
    }

    #[test]
    fn lambdas_are_unsupported() {
        for src in
            ["void f() { Runnable r = () -> g(); }", "void f() { h(x -> x + 1); }", "void f() { h((a, b) -> a); }"]
        {
            let err = parse_method(src).unwrap_err();
            assert!(
                matches!(&err, SyntaxError::Unsupported { construct, .. } if construct == "lambda"),
                "{src}: {err}"
            );
        }
    }

    #[test]
    fn other_unsupported_constructs() {
        let cases = [
            ("void f(int x) { switch (x) { default: } }", "switch"),
            ("void f() { Object o = new Object() { }; }", "anonymous class"),
            ("void f() { a: for (;;) { break a; } }", "labeled statement"),
            ("void f() { int a = 1, b = 2; }", "multiple declarators"),
            ("void f() { try (R r = open()) { } }", "try-with-resources"),
            ("void f() { g(String::valueOf); }", "method reference"),
        ];
        for (src, construct) in cases {
            match parse_method(src) {
                Err(SyntaxError::Unsupported { construct: c, .. }) => assert_eq!(c, construct, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }

    #[test]
    fn casts_and_parens() {
        let e = parse_expression("(int) x + (a) + (String) o").unwrap();
        let ExprKind::Binary { lhs, .. } = &e.kind else { panic!() };
        let ExprKind::Binary { lhs: cast, rhs: paren, .. } = &lhs.kind else { panic!() };
        assert!(matches!(cast.kind, ExprKind::Cast { .. }));
        assert!(matches!(paren.kind, ExprKind::Paren(_)));
    }

    #[test]
    fn generic_local_types() {
        let m = parse_method("void f() { Map<String, List<Integer>> m = make(); int x = a < b ? 1 : 2; }").unwrap();
        let StmtKind::LocalDecl { ty, .. } = &m.body.stmts[0].kind else { panic!() };
        assert_eq!(ty.args.len(), 2);
        assert_eq!(ty.args[1].args[0].name, "Integer");
        assert!(matches!(m.body.stmts[1].kind, StmtKind::LocalDecl { .. }));
    }

    #[test]
    fn parse_error_positions() {
        match parse_method("int f() {\n  return 1\n}") {
            Err(SyntaxError::Parse { line, column, .. }) => assert_eq!((line, column), (3, 1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn javadoc_and_comments_are_attached() {
        let src = "/** Adds. */\nint add(int a, int b) {\n    // sum\n    int s = a + b; // tail\n    return s;\n    // end\n}";
        let m = parse_method(src).unwrap();
        assert_eq!(m.javadoc.as_deref(), Some("/** Adds. */"));
        assert_eq!(m.body.stmts[0].comments, vec!["// sum"]);
        assert_eq!(m.body.stmts[0].trailing, vec!["// tail"]);
        assert_eq!(m.body.inner_comments, vec!["// end"]);
    }

    #[test]
    fn duplicate_parameter_names_rejected() {
        assert!(parse_method("int f(int a, int a) { return a; }").is_err());
    }

    #[test]
    fn array_initializer_in_declaration() {
        let m = parse_method("int f() { int[] a = {1, 2}; return a[0]; }").unwrap();
        let StmtKind::LocalDecl { init: Some(e), .. } = &m.body.stmts[0].kind else { panic!() };
        assert!(matches!(&e.kind, ExprKind::ArrayNew { init: Some(v), extra_dims: 1, .. } if v.len() == 2));
    }
}
