use serde::{Deserialize, Serialize};

use super::ast::SourceSpan;
use super::error::{LexError, LexErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Ident,
    Keyword,
    IntLit,
    LongLit,
    FloatLit,
    CharLit,
    StringLit,
    Op,
    Semi,
    Comma,
    Dot,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Question,
    Colon,
    At,
    Ellipsis,
    Eof,
}

/// A comment, attached to the token that follows it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub text: String,
    pub span: SourceSpan,
    /// Starts on the line where the previous token ended.
    pub same_line: bool,
}

impl Comment {
    pub fn is_javadoc(&self) -> bool {
        self.text.starts_with("/**") && self.text != "/**/"
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: SourceSpan,
    pub comments: Vec<Comment>,
}

impl Token {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }

    pub fn is_op(&self, text: &str) -> bool {
        self.is(TokenKind::Op, text)
    }

    pub fn is_keyword(&self, text: &str) -> bool {
        self.is(TokenKind::Keyword, text)
    }
}

pub const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
    "true",
    "false",
    "null",
];

/// Words that can never be used as identifiers in generated names. Includes
/// the contextual keywords of later Java versions.
pub fn is_reserved(word: &str) -> bool {
    KEYWORDS.contains(&word) || matches!(word, "_" | "var" | "record" | "yield")
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$' || (!c.is_ascii() && c.is_alphabetic())
}

pub fn is_ident_char(c: char) -> bool {
    is_ident_start(c) || c.is_ascii_digit() || (!c.is_ascii() && c.is_alphanumeric())
}

/// Valid, non-reserved identifier.
pub fn is_valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if is_ident_start(c) => {}
        _ => return false,
    }
    chars.all(is_ident_char) && !is_reserved(s)
}

const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "<<", ">>", "+", "-", "*", "/", "%", "=", "<", ">", "!", "~", "&", "|", "^",
];

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn starts_with(&self, s: &str) -> bool {
        self.src[self.pos..].starts_with(s)
    }

    fn error(&self, kind: LexErrorKind, line: usize, column: usize) -> LexError {
        LexError { kind, line, column, offset: self.pos }
    }
}

/// Splits source text into tokens. Comments ride along on the next token;
/// a final `Eof` token carries any comments at the end of input.
pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor { src: text, pos: 0, line: 1, col: 1 };
    let mut tokens = Vec::new();
    let mut pending: Vec<Comment> = Vec::new();
    let mut last_token_line = 0usize;

    loop {
        while matches!(cur.peek(), Some(c) if c.is_whitespace()) {
            cur.bump();
        }
        let (start, line, col) = (cur.pos, cur.line, cur.col);
        let Some(c) = cur.peek() else {
            tokens.push(Token {
                kind: TokenKind::Eof,
                text: String::new(),
                span: SourceSpan::new(start, start, line, col),
                comments: std::mem::take(&mut pending),
            });
            return Ok(tokens);
        };

        if cur.starts_with("//") {
            while matches!(cur.peek(), Some(c) if c != '\n') {
                cur.bump();
            }
            let text = cur.src[start..cur.pos].trim_end().to_string();
            pending.push(Comment {
                text,
                span: SourceSpan::new(start, cur.pos, line, col),
                same_line: line == last_token_line,
            });
            continue;
        }
        if cur.starts_with("/*") {
            cur.bump();
            cur.bump();
            loop {
                if cur.starts_with("*/") {
                    cur.bump();
                    cur.bump();
                    break;
                }
                if cur.bump().is_none() {
                    return Err(cur.error(LexErrorKind::UnterminatedComment, line, col));
                }
            }
            pending.push(Comment {
                text: cur.src[start..cur.pos].to_string(),
                span: SourceSpan::new(start, cur.pos, line, col),
                same_line: line == last_token_line,
            });
            continue;
        }

        let kind = if is_ident_start(c) {
            while matches!(cur.peek(), Some(c) if is_ident_char(c)) {
                cur.bump();
            }
            if KEYWORDS.contains(&&cur.src[start..cur.pos]) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            }
        } else if c.is_ascii_digit() || (c == '.' && matches!(cur.peek_at(1), Some(d) if d.is_ascii_digit())) {
            lex_number(&mut cur)
        } else if c == '"' {
            lex_quoted(&mut cur, '"', line, col)?;
            TokenKind::StringLit
        } else if c == '\'' {
            lex_quoted(&mut cur, '\'', line, col)?;
            TokenKind::CharLit
        } else if cur.starts_with("...") {
            for _ in 0..3 {
                cur.bump();
            }
            TokenKind::Ellipsis
        } else {
            let simple = match c {
                ';' => Some(TokenKind::Semi),
                ',' => Some(TokenKind::Comma),
                '.' => Some(TokenKind::Dot),
                '(' => Some(TokenKind::LParen),
                ')' => Some(TokenKind::RParen),
                '{' => Some(TokenKind::LBrace),
                '}' => Some(TokenKind::RBrace),
                '[' => Some(TokenKind::LBracket),
                ']' => Some(TokenKind::RBracket),
                '?' => Some(TokenKind::Question),
                ':' if !cur.starts_with("::") => Some(TokenKind::Colon),
                '@' => Some(TokenKind::At),
                _ => None,
            };
            if let Some(kind) = simple {
                cur.bump();
                kind
            } else if let Some(op) = OPERATORS.iter().find(|op| cur.starts_with(op)) {
                for _ in 0..op.len() {
                    cur.bump();
                }
                TokenKind::Op
            } else {
                return Err(cur.error(LexErrorKind::IllegalCharacter(c), line, col));
            }
        };

        last_token_line = cur.line;
        tokens.push(Token {
            kind,
            text: cur.src[start..cur.pos].to_string(),
            span: SourceSpan::new(start, cur.pos, line, col),
            comments: std::mem::take(&mut pending),
        });
    }
}

fn lex_number(cur: &mut Cursor<'_>) -> TokenKind {
    let digits = |cur: &mut Cursor<'_>, radix: u32| {
        while matches!(cur.peek(), Some(c) if c.is_digit(radix) || c == '_') {
            cur.bump();
        }
    };
    if cur.starts_with("0x") || cur.starts_with("0X") {
        cur.bump();
        cur.bump();
        digits(cur, 16);
    } else if cur.starts_with("0b") || cur.starts_with("0B") {
        cur.bump();
        cur.bump();
        digits(cur, 2);
    } else {
        let mut float = false;
        digits(cur, 10);
        if cur.peek() == Some('.') && matches!(cur.peek_at(1), Some(d) if d.is_ascii_digit()) {
            float = true;
            cur.bump();
            digits(cur, 10);
        } else if cur.peek() == Some('.') && !matches!(cur.peek_at(1), Some(c) if is_ident_start(c) || c == '.') {
            // `1.` is a valid double literal
            float = true;
            cur.bump();
        }
        if matches!(cur.peek(), Some('e' | 'E')) {
            let sign = matches!(cur.peek_at(1), Some('+' | '-'));
            let digit_at = if sign { 2 } else { 1 };
            if matches!(cur.peek_at(digit_at), Some(d) if d.is_ascii_digit()) {
                float = true;
                for _ in 0..digit_at {
                    cur.bump();
                }
                digits(cur, 10);
            }
        }
        if matches!(cur.peek(), Some('f' | 'F' | 'd' | 'D')) {
            cur.bump();
            return TokenKind::FloatLit;
        }
        if float {
            return TokenKind::FloatLit;
        }
    }
    if matches!(cur.peek(), Some('l' | 'L')) {
        cur.bump();
        return TokenKind::LongLit;
    }
    TokenKind::IntLit
}

fn lex_quoted(cur: &mut Cursor<'_>, quote: char, line: usize, col: usize) -> Result<(), LexError> {
    cur.bump();
    loop {
        match cur.bump() {
            None | Some('\n') => return Err(cur.error(LexErrorKind::UnterminatedLiteral, line, col)),
            Some('\\') => {
                if cur.bump().is_none() {
                    return Err(cur.error(LexErrorKind::UnterminatedLiteral, line, col));
                }
            }
            Some(c) if c == quote => return Ok(()),
            Some(_) => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src).unwrap().into_iter().filter(|t| t.kind != TokenKind::Eof).map(|t| (t.kind, t.text)).collect()
    }

    #[test]
    fn increment_is_two_tokens() {
        assert_eq!(kinds("i++"), vec![(TokenKind::Ident, "i".into()), (TokenKind::Op, "++".into())]);
    }

    #[test]
    fn declaration_tokens() {
        assert_eq!(
            kinds("int i = 0;"),
            vec![
                (TokenKind::Keyword, "int".into()),
                (TokenKind::Ident, "i".into()),
                (TokenKind::Op, "=".into()),
                (TokenKind::IntLit, "0".into()),
                (TokenKind::Semi, ";".into()),
            ]
        );
    }

    #[test]
    fn string_escape_preserved_byte_exact() {
        let src = r#""a\"b""#;
        let toks = tokenize(src).unwrap();
        assert_eq!(toks[0].kind, TokenKind::StringLit);
        assert_eq!(toks[0].text, src);
    }

    #[test]
    fn numeric_literals_kept_lexically() {
        let ks = kinds("0x10 1e3 42L 3.5f .5 1_000");
        let got: Vec<_> = ks.iter().map(|(k, t)| (*k, t.as_str())).collect();
        assert_eq!(
            got,
            vec![
                (TokenKind::IntLit, "0x10"),
                (TokenKind::FloatLit, "1e3"),
                (TokenKind::LongLit, "42L"),
                (TokenKind::FloatLit, "3.5f"),
                (TokenKind::FloatLit, ".5"),
                (TokenKind::IntLit, "1_000"),
            ]
        );
    }

    #[test]
    fn comments_attach_to_following_token() {
        let toks = tokenize("/** doc */ int x; // tail\n y").unwrap();
        assert_eq!(toks[0].comments.len(), 1);
        assert!(toks[0].comments[0].is_javadoc());
        let y = toks.iter().find(|t| t.text == "y").unwrap();
        assert_eq!(y.comments[0].text, "// tail");
        assert!(y.comments[0].same_line);
    }

    #[test]
    fn longest_operator_match() {
        let ks = kinds("a >>>= b >> c -> d");
        let ops: Vec<_> = ks.iter().filter(|(k, _)| *k == TokenKind::Op).map(|(_, t)| t.as_str()).collect();
        assert_eq!(ops, vec![">>>=", ">>", "->"]);
    }

    #[test]
    fn lexical_errors_report_position() {
        let e = tokenize("int x = \"abc").unwrap_err();
        assert_eq!((e.kind.clone(), e.line, e.column), (LexErrorKind::UnterminatedLiteral, 1, 9));
        let e = tokenize("x\n  /* open").unwrap_err();
        assert_eq!((e.kind.clone(), e.line, e.column), (LexErrorKind::UnterminatedComment, 2, 3));
        let e = tokenize("a # b").unwrap_err();
        assert_eq!(e.kind, LexErrorKind::IllegalCharacter('#'));
        assert_eq!(e.column, 3);
    }
}
