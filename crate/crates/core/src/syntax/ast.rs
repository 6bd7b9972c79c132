//! Tree types for the supported Java method subset.

use serde::{Deserialize, Serialize};

/// Byte range plus the 1-based line/column of its first byte.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub start_offset: usize,
    pub end_offset: usize,
    pub line: usize,
    pub column: usize,
}

impl SourceSpan {
    pub fn new(start_offset: usize, end_offset: usize, line: usize, column: usize) -> Self {
        Self { start_offset, end_offset, line, column }
    }

    /// Span covering `self` through `other`.
    pub fn to(self, other: SourceSpan) -> SourceSpan {
        SourceSpan {
            start_offset: self.start_offset,
            end_offset: other.end_offset.max(self.end_offset),
            line: self.line,
            column: self.column,
        }
    }

    pub fn contains(&self, other: &SourceSpan) -> bool {
        self.start_offset <= other.start_offset && other.end_offset <= self.end_offset
    }

    pub fn is_synthetic(&self) -> bool {
        self.line == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypeRef {
    /// Possibly qualified name, e.g. `int`, `java.util.List`.
    pub name: String,
    pub args: Vec<TypeRef>,
    pub dims: usize,
}

impl TypeRef {
    pub fn simple(name: &str) -> Self {
        Self { name: name.to_string(), args: Vec::new(), dims: 0 }
    }

    pub fn is_primitive(&self) -> bool {
        self.dims == 0 && is_primitive_name(&self.name)
    }

    pub fn is_integral(&self) -> bool {
        self.dims == 0 && matches!(self.name.as_str(), "byte" | "short" | "int" | "long" | "char")
    }

    pub fn element(&self) -> Option<TypeRef> {
        (self.dims > 0).then(|| TypeRef { name: self.name.clone(), args: self.args.clone(), dims: self.dims - 1 })
    }
}

pub fn is_primitive_name(name: &str) -> bool {
    matches!(name, "byte" | "short" | "int" | "long" | "char" | "float" | "double" | "boolean")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub modifiers: Vec<String>,
    pub ty: TypeRef,
    pub name: String,
    pub varargs: bool,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Method {
    /// Comments before the declaration other than the Javadoc block.
    pub leading_comments: Vec<String>,
    pub javadoc: Option<String>,
    pub modifiers: Vec<String>,
    pub return_type: TypeRef,
    pub name: String,
    pub params: Vec<Param>,
    pub throws: Vec<TypeRef>,
    pub body: Block,
    /// Comments after the closing brace.
    pub trailing_comments: Vec<String>,
    pub span: SourceSpan,
}

impl Method {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    /// Comments right before the closing brace.
    pub inner_comments: Vec<String>,
    pub span: SourceSpan,
}

impl Block {
    pub fn new(stmts: Vec<Stmt>) -> Self {
        Self { stmts, inner_comments: Vec::new(), span: SourceSpan::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stmt {
    pub kind: StmtKind,
    pub comments: Vec<String>,
    pub trailing: Vec<String>,
    pub span: SourceSpan,
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Self {
        Self { kind, comments: Vec::new(), trailing: Vec::new(), span: SourceSpan::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ElseBranch {
    Block(Block),
    If(Box<Stmt>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatchClause {
    pub modifiers: Vec<String>,
    pub ty: TypeRef,
    pub name: String,
    pub name_span: SourceSpan,
    pub body: Block,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StmtKind {
    LocalDecl {
        modifiers: Vec<String>,
        ty: TypeRef,
        name: String,
        name_span: SourceSpan,
        init: Option<Expr>,
    },
    Expr(Expr),
    If {
        cond: Expr,
        then_branch: Block,
        else_branch: Option<ElseBranch>,
    },
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        update: Option<Expr>,
        body: Block,
    },
    EnhancedFor {
        modifiers: Vec<String>,
        ty: TypeRef,
        name: String,
        name_span: SourceSpan,
        iterable: Expr,
        body: Block,
    },
    While {
        cond: Expr,
        body: Block,
    },
    DoWhile {
        body: Block,
        cond: Expr,
    },
    Return(Option<Expr>),
    Break,
    Continue,
    Throw(Expr),
    Try {
        body: Block,
        catches: Vec<CatchClause>,
        finally: Option<Block>,
    },
    Block(Block),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Literal {
    /// Lexeme kept verbatim, e.g. `0x10`, `42L`.
    Int(String),
    Long(String),
    Double(String),
    Bool(bool),
    Str(String),
    Char(String),
    Null,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    BitAnd,
    BitOr,
    BitXor,
    Shl,
    Shr,
    UShr,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        use BinaryOp::*;
        match self {
            Add => "+",
            Sub => "-",
            Mul => "*",
            Div => "/",
            Rem => "%",
            Eq => "==",
            Ne => "!=",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            And => "&&",
            Or => "||",
            BitAnd => "&",
            BitOr => "|",
            BitXor => "^",
            Shl => "<<",
            Shr => ">>",
            UShr => ">>>",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        use BinaryOp::*;
        Some(match s {
            "+" => Add,
            "-" => Sub,
            "*" => Mul,
            "/" => Div,
            "%" => Rem,
            "==" => Eq,
            "!=" => Ne,
            "<" => Lt,
            "<=" => Le,
            ">" => Gt,
            ">=" => Ge,
            "&&" => And,
            "||" => Or,
            "&" => BitAnd,
            "|" => BitOr,
            "^" => BitXor,
            "<<" => Shl,
            ">>" => Shr,
            ">>>" => UShr,
            _ => return None,
        })
    }

    /// Binding power; higher binds tighter.
    pub fn precedence(self) -> u8 {
        use BinaryOp::*;
        match self {
            Or => 1,
            And => 2,
            BitOr => 3,
            BitXor => 4,
            BitAnd => 5,
            Eq | Ne => 6,
            Lt | Le | Gt | Ge => 7,
            Shl | Shr | UShr => 8,
            Add | Sub => 9,
            Mul | Div | Rem => 10,
        }
    }

    pub fn is_equality(self) -> bool {
        matches!(self, BinaryOp::Eq | BinaryOp::Ne)
    }

    pub fn is_relational(self) -> bool {
        matches!(self, BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge)
    }

    /// `a op b` == `b op.mirror() a`.
    pub fn mirror(self) -> Self {
        use BinaryOp::*;
        match self {
            Lt => Gt,
            Gt => Lt,
            Le => Ge,
            Ge => Le,
            other => other,
        }
    }

    /// Logical complement for comparison operators.
    pub fn complement(self) -> Option<Self> {
        use BinaryOp::*;
        Some(match self {
            Eq => Ne,
            Ne => Eq,
            Lt => Ge,
            Ge => Lt,
            Gt => Le,
            Le => Gt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnaryOp {
    Not,
    Neg,
    Plus,
    BitNot,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Not => "!",
            UnaryOp::Neg => "-",
            UnaryOp::Plus => "+",
            UnaryOp::BitNot => "~",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IncDecOp {
    Inc,
    Dec,
}

impl IncDecOp {
    pub fn symbol(self) -> &'static str {
        match self {
            IncDecOp::Inc => "++",
            IncDecOp::Dec => "--",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AssignOp {
    Assign,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    BitAnd,
    BitOr,
    BitXor,
    Shl,
    Shr,
    UShr,
}

impl AssignOp {
    pub fn symbol(self) -> &'static str {
        use AssignOp::*;
        match self {
            Assign => "=",
            Add => "+=",
            Sub => "-=",
            Mul => "*=",
            Div => "/=",
            Rem => "%=",
            BitAnd => "&=",
            BitOr => "|=",
            BitXor => "^=",
            Shl => "<<=",
            Shr => ">>=",
            UShr => ">>>=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        use AssignOp::*;
        Some(match s {
            "=" => Assign,
            "+=" => Add,
            "-=" => Sub,
            "*=" => Mul,
            "/=" => Div,
            "%=" => Rem,
            "&=" => BitAnd,
            "|=" => BitOr,
            "^=" => BitXor,
            "<<=" => Shl,
            ">>=" => Shr,
            ">>>=" => UShr,
            _ => return None,
        })
    }

    /// Binary operator applied by a compound assignment.
    pub fn binary(self) -> Option<BinaryOp> {
        use AssignOp::*;
        Some(match self {
            Assign => return None,
            Add => BinaryOp::Add,
            Sub => BinaryOp::Sub,
            Mul => BinaryOp::Mul,
            Div => BinaryOp::Div,
            Rem => BinaryOp::Rem,
            BitAnd => BinaryOp::BitAnd,
            BitOr => BinaryOp::BitOr,
            BitXor => BinaryOp::BitXor,
            Shl => BinaryOp::Shl,
            Shr => BinaryOp::Shr,
            UShr => BinaryOp::UShr,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: SourceSpan,
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Self { kind, span: SourceSpan::default() }
    }

    pub fn ident(name: &str) -> Self {
        Self::new(ExprKind::Ident(name.to_string()))
    }

    pub fn int(lexeme: &str) -> Self {
        Self::new(ExprKind::Literal(Literal::Int(lexeme.to_string())))
    }

    pub fn bool(value: bool) -> Self {
        Self::new(ExprKind::Literal(Literal::Bool(value)))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Self {
        Self::new(ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) })
    }

    pub fn is_lvalue(&self) -> bool {
        matches!(self.kind, ExprKind::Ident(_) | ExprKind::FieldAccess { .. } | ExprKind::ArrayAccess { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExprKind {
    Literal(Literal),
    Ident(String),
    This,
    FieldAccess {
        recv: Box<Expr>,
        name: String,
    },
    ArrayAccess {
        recv: Box<Expr>,
        index: Box<Expr>,
    },
    MethodCall {
        recv: Option<Box<Expr>>,
        name: String,
        args: Vec<Expr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    IncDec {
        op: IncDecOp,
        prefix: bool,
        target: Box<Expr>,
    },
    Assign {
        op: AssignOp,
        target: Box<Expr>,
        value: Box<Expr>,
    },
    Ternary {
        cond: Box<Expr>,
        then_expr: Box<Expr>,
        else_expr: Box<Expr>,
    },
    Cast {
        ty: TypeRef,
        expr: Box<Expr>,
    },
    New {
        ty: TypeRef,
        args: Vec<Expr>,
    },
    /// `new T[d1][d2][]...` or `new T[]{...}`.
    ArrayNew {
        elem: TypeRef,
        dims: Vec<Expr>,
        extra_dims: usize,
        init: Option<Vec<Expr>>,
    },
    InstanceOf {
        expr: Box<Expr>,
        ty: TypeRef,
    },
    Paren(Box<Expr>),
}
