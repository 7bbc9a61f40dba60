use std::collections::HashMap;
use std::f64::consts::PI;

use super::error::{Loc, QasmError, QasmResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Sqrt => x.sqrt(),
        }
    }
}

/// Gate-parameter expression. Every node keeps the location of the token
/// that introduced it so evaluation errors point back into the source.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamExpr {
    Real(f64, Loc),
    Pi(Loc),
    Param(String, Loc),
    Neg(Box<ParamExpr>, Loc),
    Binary(BinOp, Box<ParamExpr>, Box<ParamExpr>, Loc),
    Call(Func, Box<ParamExpr>, Loc),
}

impl ParamExpr {
    pub fn loc(&self) -> Loc {
        match self {
            ParamExpr::Real(_, l)
            | ParamExpr::Pi(l)
            | ParamExpr::Param(_, l)
            | ParamExpr::Neg(_, l)
            | ParamExpr::Binary(_, _, _, l)
            | ParamExpr::Call(_, _, l) => *l,
        }
    }

    /// Evaluates to radians with the given formal-parameter bindings.
    pub fn eval(&self, bindings: &HashMap<String, f64>) -> QasmResult<f64> {
        let value = match self {
            ParamExpr::Real(v, _) => *v,
            ParamExpr::Pi(_) => PI,
            ParamExpr::Param(name, loc) => *bindings
                .get(name)
                .ok_or_else(|| QasmError::semantic(*loc, format!("unbound parameter '{name}'")))?,
            ParamExpr::Neg(inner, _) => -inner.eval(bindings)?,
            ParamExpr::Binary(op, lhs, rhs, loc) => {
                let a = lhs.eval(bindings)?;
                let b = rhs.eval(bindings)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(QasmError::semantic(*loc, "division by zero"));
                        }
                        a / b
                    }
                    BinOp::Pow => a.powf(b),
                }
            }
            ParamExpr::Call(f, arg, _) => f.apply(arg.eval(bindings)?),
        };
        if !value.is_finite() {
            return Err(QasmError::semantic(
                self.loc(),
                "expression does not evaluate to a finite real",
            ));
        }
        Ok(value)
    }
}
