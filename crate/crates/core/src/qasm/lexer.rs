//! Tokenizer for OpenQASM 2.0 source.
//!
//! Besides the standard grammar the lexer tolerates two shapes that show up
//! in agent-generated programs: a `#` glued to `include`, and literal
//! two-character `\n` / `\t` / `\r` escapes left over from JSON payloads,
//! which are treated as whitespace.

use super::error::{Loc, QasmError, QasmResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Keyword,
    Identifier,
    Integer,
    Real,
    Str,
    Symbol,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub loc: Loc,
}

impl Token {
    pub fn is_symbol(&self, s: &str) -> bool {
        self.kind == TokenKind::Symbol && self.lexeme == s
    }

    pub fn is_keyword(&self, k: &str) -> bool {
        self.kind == TokenKind::Keyword && self.lexeme == k
    }
}

pub const KEYWORDS: &[&str] = &[
    "OPENQASM", "include", "qreg", "creg", "gate", "measure", "barrier", "opaque", "if", "pi",
];

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
}

impl Cursor {
    fn new(src: &str) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn loc(&self) -> Loc {
        Loc::new(self.line, self.column)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat_while(&mut self, out: &mut String, pred: impl Fn(char) -> bool) {
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            out.push(c);
            self.bump();
        }
    }
}

pub fn tokenize(source: &str) -> QasmResult<Vec<Token>> {
    let mut cur = Cursor::new(source);
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        let loc = cur.loc();
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '\\' && matches!(cur.peek_at(1), Some('n' | 't' | 'r')) {
            cur.bump();
            cur.bump();
            continue;
        }
        if c == '/' && cur.peek_at(1) == Some('/') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if c == '#' {
            cur.bump();
            let mut word = String::new();
            cur.eat_while(&mut word, |c| c.is_ascii_alphanumeric() || c == '_');
            if word != "include" {
                return Err(QasmError::lex(loc, "illegal character '#'"));
            }
            tokens.push(Token {
                kind: TokenKind::Keyword,
                lexeme: word,
                loc,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            cur.eat_while(&mut word, |c| c.is_ascii_alphanumeric() || c == '_');
            let kind = if KEYWORDS.contains(&word.as_str()) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            };
            tokens.push(Token {
                kind,
                lexeme: word,
                loc,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
            tokens.push(lex_number(&mut cur)?);
            continue;
        }
        if c == '"' {
            cur.bump();
            let mut text = String::new();
            loop {
                match cur.bump() {
                    Some('"') => break,
                    Some('\n') | None => {
                        return Err(QasmError::lex(loc, "unterminated string literal"));
                    }
                    Some(ch) => text.push(ch),
                }
            }
            tokens.push(Token {
                kind: TokenKind::Str,
                lexeme: text,
                loc,
            });
            continue;
        }

        let two: Option<&str> = match (c, cur.peek_at(1)) {
            ('-', Some('>')) => Some("->"),
            ('=', Some('=')) => Some("=="),
            _ => None,
        };
        if let Some(sym) = two {
            cur.bump();
            cur.bump();
            tokens.push(Token {
                kind: TokenKind::Symbol,
                lexeme: sym.to_string(),
                loc,
            });
            continue;
        }
        if "()[]{};,+-*/^".contains(c) {
            cur.bump();
            tokens.push(Token {
                kind: TokenKind::Symbol,
                lexeme: c.to_string(),
                loc,
            });
            continue;
        }
        return Err(QasmError::lex(loc, format!("illegal character {c:?}")));
    }
    Ok(tokens)
}

fn lex_number(cur: &mut Cursor) -> QasmResult<Token> {
    let loc = cur.loc();
    let mut text = String::new();
    let mut is_real = false;

    cur.eat_while(&mut text, |c| c.is_ascii_digit());
    if cur.peek() == Some('.') {
        is_real = true;
        text.push('.');
        cur.bump();
        cur.eat_while(&mut text, |c| c.is_ascii_digit());
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        is_real = true;
        text.push('e');
        cur.bump();
        if let Some(sign @ ('+' | '-')) = cur.peek() {
            text.push(sign);
            cur.bump();
        }
        let before = text.len();
        cur.eat_while(&mut text, |c| c.is_ascii_digit());
        if text.len() == before {
            return Err(QasmError::lex(loc, format!("malformed numeric literal '{text}'")));
        }
    }
    if let Some(c) = cur.peek() {
        if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
            text.push(c);
            return Err(QasmError::lex(loc, format!("malformed numeric literal '{text}'")));
        }
    }

    if is_real {
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => {}
            _ => return Err(QasmError::lex(loc, format!("malformed numeric literal '{text}'"))),
        }
    }
    Ok(Token {
        kind: if is_real {
            TokenKind::Real
        } else {
            TokenKind::Integer
        },
        lexeme: text,
        loc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lexemes(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.lexeme))
            .collect()
    }

    #[test]
    fn rotation_statement() {
        use TokenKind::*;
        let got = lexemes("rz(-1.4) q[1];");
        let want = [
            (Identifier, "rz"),
            (Symbol, "("),
            (Symbol, "-"),
            (Real, "1.4"),
            (Symbol, ")"),
            (Identifier, "q"),
            (Symbol, "["),
            (Integer, "1"),
            (Symbol, "]"),
            (Symbol, ";"),
        ];
        assert_eq!(got.len(), want.len());
        for ((gk, gl), (wk, wl)) in got.iter().zip(want) {
            assert_eq!((*gk, gl.as_str()), (wk, wl));
        }
    }

    #[test]
    fn empty_source() {
        assert!(tokenize("").unwrap().is_empty());
    }

    #[test]
    fn comments_are_stripped() {
        assert_eq!(lexemes("h q[0]; // comment"), lexemes("h q[0];"));
    }

    #[test]
    fn keywords_and_positions() {
        let toks = tokenize("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n  measure q -> c;").unwrap();
        assert!(toks[0].is_keyword("OPENQASM"));
        assert_eq!(toks[1].kind, TokenKind::Real);
        assert!(toks[3].is_keyword("include"));
        assert_eq!(toks[3].loc, Loc::new(2, 1));
        assert_eq!(toks[4].kind, TokenKind::Str);
        assert_eq!(toks[4].lexeme, "qelib1.inc");
        assert!(toks[6].is_keyword("measure"));
        assert_eq!(toks[6].loc, Loc::new(3, 3));
        assert!(toks[8].is_symbol("->"));
    }

    #[test]
    fn hash_include_and_escaped_newlines() {
        let toks = tokenize("#include \"qelib1.inc\";\\nqreg q[3];").unwrap();
        assert!(toks[0].is_keyword("include"));
        assert!(toks[3].is_keyword("qreg"));
    }

    #[test]
    fn real_forms() {
        use TokenKind::*;
        assert_eq!(lexemes(".5")[0], (Real, ".5".into()));
        assert_eq!(lexemes("2.")[0], (Real, "2.".into()));
        assert_eq!(lexemes("1e-3")[0], (Real, "1e-3".into()));
        assert_eq!(lexemes("3E2")[0], (Real, "3e2".into()));
    }

    #[test]
    fn lex_errors_carry_location() {
        let err = tokenize("qreg q[2];\nh q[0] @;").unwrap_err();
        assert_eq!(err.kind, super::super::QasmErrorKind::LexError);
        assert_eq!(err.loc, Loc::new(2, 8));

        for bad in ["1e", "1.2.3", "12abc", "1e999", "\"open", "#pragma"] {
            let err = tokenize(bad).unwrap_err();
            assert_eq!(err.kind, super::super::QasmErrorKind::LexError, "{bad}");
        }
    }
}
