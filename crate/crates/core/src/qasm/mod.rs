//! OpenQASM reader and writer.
//!
//! The reader accepts OpenQASM 2.0 programs and a small OpenQASM 3.0 subset
//! (`qubit[n]`/`bit[n]` declarations, `c[i] = measure q[j]`, single-bit
//! `if` conditions, `ctrl @`/`negctrl @`/`inv @` modifiers). The writer always
//! produces the 3.0 subset. The accepted grammar is in `docs/qasm-subset.md`.

mod expr;
mod lexer;
mod parser;
mod serialize;

use std::fmt;

use serde::Serialize;

use crate::angle::Angle;

pub use parser::parse;
pub use serialize::serialize;

/// Location of a diagnostic: 1-based line and column of the first character,
/// plus the byte range `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Lex,
    Syntax,
    Semantic,
    Unsupported,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Lex => "lex",
            ErrorKind::Syntax => "syntax",
            ErrorKind::Semantic => "semantic",
            ErrorKind::Unsupported => "unsupported",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub kind: ErrorKind,
}

impl ParseError {
    pub(crate) fn new(kind: ErrorKind, span: SourceSpan, message: impl Into<String>) -> Self {
        let message = message.into();
        debug_assert!(!message.is_empty());
        ParseError { span, message, kind }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {} error: {}", self.span.line, self.span.column, self.kind, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Evaluates a constant parameter expression such as `3*pi/8` or `-0.25`.
pub fn eval_angle_expression(text: &str) -> Result<Angle, String> {
    let (tokens, _) = lexer::tokenize(text).map_err(|e| e.message)?;
    let mut p = expr::ExprParser { tokens: &tokens, pos: 0 };
    let value = p.expression().map_err(|e| e.message)?;
    match &tokens[p.pos].tok {
        lexer::Tok::Eof => Ok(value.to_angle()),
        other => Err(format!("unexpected {} after expression", expr::describe(other))),
    }
}
