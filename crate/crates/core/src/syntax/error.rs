use thiserror::Error;

use super::ast::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexErrorKind {
    UnterminatedLiteral,
    UnterminatedComment,
    IllegalCharacter(char),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {}", describe(.kind))]
pub struct LexError {
    pub kind: LexErrorKind,
    pub line: usize,
    pub column: usize,
    pub offset: usize,
}

fn describe(kind: &LexErrorKind) -> String {
    match kind {
        LexErrorKind::UnterminatedLiteral => "unterminated literal".to_string(),
        LexErrorKind::UnterminatedComment => "unterminated comment".to_string(),
        LexErrorKind::IllegalCharacter(c) => format!("illegal character {c:?}"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("{line}:{column}: expected {expected}, found {found:?}")]
    Parse { line: usize, column: usize, expected: String, found: String },
    #[error("{}:{}: unsupported syntax: {construct}", .span.line, .span.column)]
    Unsupported { construct: String, span: SourceSpan },
}

impl SyntaxError {
    /// `(line, column)` of the offending location.
    pub fn position(&self) -> (usize, usize) {
        match self {
            SyntaxError::Lex(e) => (e.line, e.column),
            SyntaxError::Parse { line, column, .. } => (*line, *column),
            SyntaxError::Unsupported { span, .. } => (span.line, span.column),
        }
    }

    pub fn is_unsupported(&self) -> bool {
        matches!(self, SyntaxError::Unsupported { .. })
    }

    /// Formats as `file:line:col: message`.
    pub fn with_file(&self, file: &str) -> String {
        format!("{file}:{self}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}:{}: duplicate declaration of `{name}`", .span.line, .span.column)]
pub struct DuplicateDeclaration {
    pub name: String,
    pub span: SourceSpan,
}
