use super::ast::{GateBodyStmt, GateCall, GateDecl, Operand, Program, Statement};
use super::error::{Loc, QasmError, QasmResult};
use super::expr::{BinOp, Func, ParamExpr};
use super::lexer::{Token, TokenKind};

pub const STANDARD_INCLUDE: &str = "qelib1.inc";

pub fn parse(tokens: &[Token]) -> QasmResult<Program> {
    Parser { tokens, pos: 0 }.program()
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.pos)
    }

    fn peek_is_symbol(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.is_symbol(s))
    }

    fn eof_loc(&self) -> Loc {
        self.tokens.last().map(|t| t.loc).unwrap_or(Loc::new(1, 1))
    }

    fn next(&mut self, expected: &str) -> QasmResult<&'t Token> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(QasmError::parse(
                self.eof_loc(),
                format!("unexpected end of input, expected {expected}"),
            )),
        }
    }

    fn unexpected(tok: &Token, expected: &str) -> QasmError {
        QasmError::parse(
            tok.loc,
            format!("unexpected token '{}', expected {expected}", tok.lexeme),
        )
    }

    fn expect_symbol(&mut self, s: &str) -> QasmResult<&'t Token> {
        let tok = self.next(&format!("'{s}'"))?;
        if tok.is_symbol(s) {
            Ok(tok)
        } else {
            Err(Self::unexpected(tok, &format!("'{s}'")))
        }
    }

    fn expect_ident(&mut self) -> QasmResult<&'t Token> {
        let tok = self.next("identifier")?;
        if tok.kind == TokenKind::Identifier {
            Ok(tok)
        } else {
            Err(Self::unexpected(tok, "identifier"))
        }
    }

    fn expect_size(&mut self) -> QasmResult<usize> {
        let tok = self.next("integer")?;
        if tok.kind != TokenKind::Integer {
            return Err(Self::unexpected(tok, "integer"));
        }
        tok.lexeme
            .parse()
            .map_err(|_| QasmError::parse(tok.loc, format!("integer '{}' out of range", tok.lexeme)))
    }

    fn program(mut self) -> QasmResult<Program> {
        let mut version = None;
        if let Some(tok) = self.peek().filter(|t| t.is_keyword("OPENQASM")) {
            self.pos += 1;
            let v = self.next("version number")?;
            if !matches!(v.kind, TokenKind::Real | TokenKind::Integer) {
                return Err(Self::unexpected(v, "version number"));
            }
            if v.lexeme.parse::<f64>().ok().map(|x| x.trunc()) != Some(2.0) {
                return Err(QasmError::unsupported(
                    tok.loc,
                    format!("OPENQASM {} is not supported, only 2.0", v.lexeme),
                ));
            }
            self.expect_symbol(";")?;
            version = Some(v.lexeme.clone());
        }

        let mut statements = Vec::new();
        while self.peek().is_some() {
            statements.push(self.statement()?);
        }
        Ok(Program {
            version,
            statements,
        })
    }

    fn statement(&mut self) -> QasmResult<Statement> {
        let tok = self.next("statement")?;
        let loc = tok.loc;
        match (tok.kind, tok.lexeme.as_str()) {
            (TokenKind::Keyword, "include") => {
                let path = self.next("include path")?;
                if path.kind != TokenKind::Str {
                    return Err(Self::unexpected(path, "string literal"));
                }
                self.expect_symbol(";")?;
                if path.lexeme != STANDARD_INCLUDE {
                    return Err(QasmError::include(
                        path.loc,
                        format!("cannot include \"{}\"; only \"{STANDARD_INCLUDE}\" is available", path.lexeme),
                    ));
                }
                Ok(Statement::Include {
                    path: path.lexeme.clone(),
                    loc,
                })
            }
            (TokenKind::Keyword, kw @ ("qreg" | "creg")) => {
                let name = self.expect_ident()?.lexeme.clone();
                self.expect_symbol("[")?;
                let size = self.expect_size()?;
                self.expect_symbol("]")?;
                self.expect_symbol(";")?;
                Ok(if kw == "qreg" {
                    Statement::QReg { name, size, loc }
                } else {
                    Statement::CReg { name, size, loc }
                })
            }
            (TokenKind::Keyword, "gate") => self.gate_decl(loc).map(Statement::Gate),
            (TokenKind::Keyword, "measure") => {
                let qubits = self.operand()?;
                self.expect_symbol("->")?;
                let clbits = self.operand()?;
                self.expect_symbol(";")?;
                Ok(Statement::Measure {
                    qubits,
                    clbits,
                    loc,
                })
            }
            (TokenKind::Keyword, "barrier") => {
                let args = self.operand_list()?;
                self.expect_symbol(";")?;
                Ok(Statement::Barrier { args, loc })
            }
            (TokenKind::Keyword, "if") => Err(QasmError::unsupported(
                loc,
                "classically controlled 'if' statements are not supported",
            )),
            (TokenKind::Keyword, "opaque") => Err(QasmError::unsupported(
                loc,
                "'opaque' gate declarations are not supported",
            )),
            (TokenKind::Keyword, "OPENQASM") => Err(QasmError::parse(
                loc,
                "version statement must be the first statement",
            )),
            (TokenKind::Identifier, "reset") => Err(QasmError::unsupported(
                loc,
                "'reset' is not supported",
            )),
            (TokenKind::Identifier, _) => {
                self.pos -= 1;
                let call = self.gate_call(false)?;
                Ok(Statement::Call(call))
            }
            _ => Err(Self::unexpected(tok, "statement")),
        }
    }

    fn gate_decl(&mut self, loc: Loc) -> QasmResult<GateDecl> {
        let name = self.expect_ident()?.lexeme.clone();
        let mut params = Vec::new();
        if self.peek_is_symbol("(") {
            self.pos += 1;
            if !self.peek_is_symbol(")") {
                params = self.ident_list()?;
            }
            self.expect_symbol(")")?;
        }
        let qargs = self.ident_list()?;
        self.expect_symbol("{")?;
        let mut body = Vec::new();
        loop {
            let tok = self.peek().ok_or_else(|| {
                QasmError::parse(self.eof_loc(), "unexpected end of input in gate body")
            })?;
            if tok.is_symbol("}") {
                self.pos += 1;
                break;
            }
            if tok.is_keyword("barrier") {
                self.pos += 1;
                let args = self.operand_list_bare()?;
                self.expect_symbol(";")?;
                body.push(GateBodyStmt::Barrier { args, loc: tok.loc });
            } else if tok.kind == TokenKind::Identifier {
                body.push(GateBodyStmt::Call(self.gate_call(true)?));
            } else if tok.is_keyword("measure") || tok.is_keyword("if") || tok.is_keyword("gate") {
                return Err(QasmError::parse(
                    tok.loc,
                    format!("'{}' is not allowed inside a gate body", tok.lexeme),
                ));
            } else {
                return Err(Self::unexpected(tok, "gate call or '}'"));
            }
        }
        Ok(GateDecl {
            name,
            params,
            qargs,
            body,
            loc,
        })
    }

    fn ident_list(&mut self) -> QasmResult<Vec<String>> {
        let mut out = vec![self.expect_ident()?.lexeme.clone()];
        while self.peek_is_symbol(",") {
            self.pos += 1;
            out.push(self.expect_ident()?.lexeme.clone());
        }
        Ok(out)
    }

    fn gate_call(&mut self, in_body: bool) -> QasmResult<GateCall> {
        let tok = self.expect_ident()?;
        let mut params = Vec::new();
        if self.peek_is_symbol("(") {
            self.pos += 1;
            if !self.peek_is_symbol(")") {
                params.push(self.expr()?);
                while self.peek_is_symbol(",") {
                    self.pos += 1;
                    params.push(self.expr()?);
                }
            }
            self.expect_symbol(")")?;
        }
        let args = if in_body {
            self.operand_list_bare()?
        } else {
            self.operand_list()?
        };
        self.expect_symbol(";")?;
        Ok(GateCall {
            name: tok.lexeme.clone(),
            params,
            args,
            loc: tok.loc,
        })
    }

    fn operand(&mut self) -> QasmResult<Operand> {
        let tok = self.expect_ident()?;
        if self.peek_is_symbol("[") {
            self.pos += 1;
            let index = self.expect_size()?;
            self.expect_symbol("]")?;
            Ok(Operand::Bit {
                name: tok.lexeme.clone(),
                index,
                loc: tok.loc,
            })
        } else {
            Ok(Operand::Register {
                name: tok.lexeme.clone(),
                loc: tok.loc,
            })
        }
    }

    fn operand_list(&mut self) -> QasmResult<Vec<Operand>> {
        let mut out = vec![self.operand()?];
        while self.peek_is_symbol(",") {
            self.pos += 1;
            out.push(self.operand()?);
        }
        Ok(out)
    }

    /// Inside gate bodies operands are bare formal names, never indexed.
    fn operand_list_bare(&mut self) -> QasmResult<Vec<Operand>> {
        let mut out = Vec::new();
        loop {
            let tok = self.expect_ident()?;
            if self.peek_is_symbol("[") {
                let bracket = self.peek().unwrap();
                return Err(QasmError::parse(
                    bracket.loc,
                    "indexed operands are not allowed inside a gate body",
                ));
            }
            out.push(Operand::Register {
                name: tok.lexeme.clone(),
                loc: tok.loc,
            });
            if !self.peek_is_symbol(",") {
                return Ok(out);
            }
            self.pos += 1;
        }
    }

    fn expr(&mut self) -> QasmResult<ParamExpr> {
        let mut lhs = self.term()?;
        while let Some(tok) = self.peek().filter(|t| t.is_symbol("+") || t.is_symbol("-")) {
            self.pos += 1;
            let op = if tok.lexeme == "+" { BinOp::Add } else { BinOp::Sub };
            let rhs = self.term()?;
            lhs = ParamExpr::Binary(op, Box::new(lhs), Box::new(rhs), tok.loc);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> QasmResult<ParamExpr> {
        let mut lhs = self.unary()?;
        while let Some(tok) = self.peek().filter(|t| t.is_symbol("*") || t.is_symbol("/")) {
            self.pos += 1;
            let op = if tok.lexeme == "*" { BinOp::Mul } else { BinOp::Div };
            let rhs = self.unary()?;
            lhs = ParamExpr::Binary(op, Box::new(lhs), Box::new(rhs), tok.loc);
        }
        Ok(lhs)
    }

    // `-` binds tighter than the binary operators but looser than `^`,
    // so `-2^2` is `-(2^2)`.
    fn unary(&mut self) -> QasmResult<ParamExpr> {
        if let Some(tok) = self.peek().filter(|t| t.is_symbol("-") || t.is_symbol("+")) {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(if tok.lexeme == "-" {
                ParamExpr::Neg(Box::new(inner), tok.loc)
            } else {
                inner
            });
        }
        self.power()
    }

    fn power(&mut self) -> QasmResult<ParamExpr> {
        let base = self.primary()?;
        if let Some(tok) = self.peek().filter(|t| t.is_symbol("^")) {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(ParamExpr::Binary(
                BinOp::Pow,
                Box::new(base),
                Box::new(exponent),
                tok.loc,
            ));
        }
        Ok(base)
    }

    fn primary(&mut self) -> QasmResult<ParamExpr> {
        let tok = self.next("expression")?;
        match tok.kind {
            TokenKind::Integer | TokenKind::Real => {
                let v: f64 = tok
                    .lexeme
                    .parse()
                    .map_err(|_| QasmError::parse(tok.loc, "invalid number"))?;
                Ok(ParamExpr::Real(v, tok.loc))
            }
            TokenKind::Keyword if tok.lexeme == "pi" => Ok(ParamExpr::Pi(tok.loc)),
            TokenKind::Identifier => {
                if self.peek_is_symbol("(") {
                    let func = Func::from_name(&tok.lexeme).ok_or_else(|| {
                        QasmError::parse(tok.loc, format!("unknown function '{}'", tok.lexeme))
                    })?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_symbol(")")?;
                    Ok(ParamExpr::Call(func, Box::new(arg), tok.loc))
                } else {
                    Ok(ParamExpr::Param(tok.lexeme.clone(), tok.loc))
                }
            }
            TokenKind::Symbol if tok.lexeme == "(" => {
                let inner = self.expr()?;
                self.expect_symbol(")")?;
                Ok(inner)
            }
            _ => Err(Self::unexpected(tok, "expression")),
        }
    }
}
