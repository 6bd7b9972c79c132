//! Lexing, parsing, scope resolution and canonical printing of single
//! methods written in a Java subset.

pub mod ast;
mod error;
pub mod lexer;
mod parser;
mod printer;
pub mod scope;
pub mod visit;

pub use ast::*;
pub use error::{DuplicateDeclaration, LexError, LexErrorKind, SyntaxError};
pub use lexer::{is_ident_char, is_ident_start, is_reserved, is_valid_identifier, tokenize, Comment, Token, TokenKind};
pub use parser::{parse_expression, parse_method};
pub use printer::{print_expr, print_method, print_method_signature_and_body, print_type};
pub use scope::{resolve_scopes, Binding, DeclId, DeclKind, Declaration, IdentUse, ScopeTable};
pub use visit::{
    clear_spans, node_count, structurally_equal, walk_block, walk_block_mut, walk_expr, walk_expr_mut, walk_stmt,
    walk_stmt_mut, Visit, VisitMut,
};

/// Alias matching the printing operation's name.
pub fn print(m: &Method) -> String {
    print_method(m)
}
