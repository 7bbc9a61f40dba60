//! OpenQASM 2.0 frontend: tokenize, parse, then lower to a [`Circuit`].
//!
//! `include "qelib1.inc"` resolves to the built-in gate table without
//! touching the filesystem, and the qelib1 gates are available whether or not
//! the include is present. The `OPENQASM 2.0;` header is optional.

pub mod ast;
mod error;
pub mod expr;
pub mod lexer;
mod lower;
pub mod parser;

pub use error::{Loc, QasmError, QasmErrorKind, QasmResult};
pub use lexer::{tokenize, Token, TokenKind};
pub use lower::lower;
pub use parser::parse;

use crate::circuit::Circuit;

/// Full pipeline from source text to a validated circuit.
pub fn compile(source: &str) -> QasmResult<Circuit> {
    let tokens = tokenize(source)?;
    let program = parse(&tokens)?;
    lower(&program)
}
