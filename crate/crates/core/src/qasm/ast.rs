use super::error::Loc;
use super::expr::ParamExpr;

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub version: Option<String>,
    pub statements: Vec<Statement>,
}

impl Program {
    pub fn qregs(&self) -> impl Iterator<Item = (&str, usize)> {
        self.statements.iter().filter_map(|s| match s {
            Statement::QReg { name, size, .. } => Some((name.as_str(), *size)),
            _ => None,
        })
    }

    pub fn cregs(&self) -> impl Iterator<Item = (&str, usize)> {
        self.statements.iter().filter_map(|s| match s {
            Statement::CReg { name, size, .. } => Some((name.as_str(), *size)),
            _ => None,
        })
    }
}

/// A register operand: either a whole register or one indexed bit.
#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Register { name: String, loc: Loc },
    Bit { name: String, index: usize, loc: Loc },
}

impl Operand {
    pub fn name(&self) -> &str {
        match self {
            Operand::Register { name, .. } | Operand::Bit { name, .. } => name,
        }
    }

    pub fn loc(&self) -> Loc {
        match self {
            Operand::Register { loc, .. } | Operand::Bit { loc, .. } => *loc,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateCall {
    pub name: String,
    pub params: Vec<ParamExpr>,
    pub args: Vec<Operand>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateBodyStmt {
    Call(GateCall),
    Barrier { args: Vec<Operand>, loc: Loc },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateDecl {
    pub name: String,
    pub params: Vec<String>,
    pub qargs: Vec<String>,
    pub body: Vec<GateBodyStmt>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Include { path: String, loc: Loc },
    QReg { name: String, size: usize, loc: Loc },
    CReg { name: String, size: usize, loc: Loc },
    Gate(GateDecl),
    Call(GateCall),
    Measure { qubits: Operand, clbits: Operand, loc: Loc },
    Barrier { args: Vec<Operand>, loc: Loc },
}
