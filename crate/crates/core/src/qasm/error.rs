use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// 1-based position in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Loc {
    pub line: usize,
    pub column: usize,
}

impl Loc {
    pub fn new(line: usize, column: usize) -> Self {
        Self { line, column }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QasmErrorKind {
    LexError,
    ParseError,
    UnsupportedError,
    IncludeError,
    SemanticError,
}

impl QasmErrorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            QasmErrorKind::LexError => "LexError",
            QasmErrorKind::ParseError => "ParseError",
            QasmErrorKind::UnsupportedError => "UnsupportedError",
            QasmErrorKind::IncludeError => "IncludeError",
            QasmErrorKind::SemanticError => "SemanticError",
        }
    }
}

/// Any failure raised while turning OpenQASM text into a [`Circuit`](super::Circuit).
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{} at {loc}: {message}", kind.as_str())]
pub struct QasmError {
    pub kind: QasmErrorKind,
    pub message: String,
    pub loc: Loc,
}

impl QasmError {
    pub fn new(kind: QasmErrorKind, loc: Loc, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
            loc,
        }
    }

    pub fn lex(loc: Loc, message: impl Into<String>) -> Self {
        Self::new(QasmErrorKind::LexError, loc, message)
    }

    pub fn parse(loc: Loc, message: impl Into<String>) -> Self {
        Self::new(QasmErrorKind::ParseError, loc, message)
    }

    pub fn unsupported(loc: Loc, message: impl Into<String>) -> Self {
        Self::new(QasmErrorKind::UnsupportedError, loc, message)
    }

    pub fn include(loc: Loc, message: impl Into<String>) -> Self {
        Self::new(QasmErrorKind::IncludeError, loc, message)
    }

    pub fn semantic(loc: Loc, message: impl Into<String>) -> Self {
        Self::new(QasmErrorKind::SemanticError, loc, message)
    }
}

pub type QasmResult<T> = Result<T, QasmError>;
