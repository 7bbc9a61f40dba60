use std::collections::{HashMap, HashSet};

use super::ast::{GateBodyStmt, GateCall, GateDecl, Operand, Program, Statement};
use super::error::{Loc, QasmError, QasmResult};
use crate::circuit::{Circuit, GateId, Op};

pub fn lower(program: &Program) -> QasmResult<Circuit> {
    let mut circuit = Circuit::default();
    let mut names: HashSet<&str> = HashSet::new();

    for stmt in &program.statements {
        match stmt {
            Statement::QReg { name, size, loc } | Statement::CReg { name, size, loc } => {
                if !names.insert(name) {
                    return Err(QasmError::semantic(*loc, format!("register '{name}' already declared")));
                }
                if *size == 0 {
                    return Err(QasmError::semantic(*loc, format!("register '{name}' has size 0")));
                }
                if matches!(stmt, Statement::QReg { .. }) {
                    circuit.add_qreg(name, *size);
                } else {
                    circuit.add_creg(name, *size);
                }
            }
            _ => {}
        }
    }

    let gates = collect_gates(program)?;
    let lowerer = Lowerer {
        circuit: &circuit,
        gates: &gates,
    };
    let mut ops = Vec::new();
    for stmt in &program.statements {
        match stmt {
            Statement::Call(call) => lowerer.top_level_call(call, &mut ops)?,
            Statement::Measure {
                qubits,
                clbits,
                loc,
            } => lowerer.measure(qubits, clbits, *loc, &mut ops)?,
            Statement::Barrier { args, .. } => {
                let mut qubits = Vec::new();
                for a in args {
                    qubits.extend(lowerer.qubit_operand(a)?);
                }
                ops.push(Op::Barrier { qubits });
            }
            Statement::Include { .. }
            | Statement::QReg { .. }
            | Statement::CReg { .. }
            | Statement::Gate(_) => {}
        }
    }
    circuit.ops = ops;
    Ok(circuit)
}

fn collect_gates(program: &Program) -> QasmResult<HashMap<&str, &GateDecl>> {
    let mut gates: HashMap<&str, &GateDecl> = HashMap::new();
    for stmt in &program.statements {
        let Statement::Gate(decl) = stmt else { continue };
        if GateId::from_name(&decl.name).is_some() || gates.contains_key(decl.name.as_str()) {
            return Err(QasmError::semantic(
                decl.loc,
                format!("gate '{}' is already defined", decl.name),
            ));
        }
        let mut seen = HashSet::new();
        for n in decl.params.iter().chain(&decl.qargs) {
            if !seen.insert(n) {
                return Err(QasmError::semantic(
                    decl.loc,
                    format!("duplicate formal argument '{n}' in gate '{}'", decl.name),
                ));
            }
        }
        gates.insert(&decl.name, decl);
    }

    // Reject cycles in the gate call graph up front so expansion always terminates.
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    fn visit<'a>(
        name: &'a str,
        gates: &HashMap<&'a str, &'a GateDecl>,
        marks: &mut HashMap<&'a str, Mark>,
    ) -> QasmResult<()> {
        let Some(decl) = gates.get(name) else { return Ok(()) };
        match marks.get(name) {
            Some(Mark::Done) => return Ok(()),
            Some(Mark::Active) => {
                return Err(QasmError::semantic(
                    decl.loc,
                    format!("recursive gate definition '{name}'"),
                ))
            }
            None => {}
        }
        marks.insert(name, Mark::Active);
        for stmt in &decl.body {
            if let GateBodyStmt::Call(call) = stmt {
                if marks.get(call.name.as_str()) == Some(&Mark::Active) {
                    return Err(QasmError::semantic(
                        call.loc,
                        format!("recursive gate definition '{}'", call.name),
                    ));
                }
                visit(&call.name, gates, marks)?;
            }
        }
        marks.insert(name, Mark::Done);
        Ok(())
    }
    let mut marks = HashMap::new();
    let mut order: Vec<&str> = gates.keys().copied().collect();
    order.sort_by_key(|n| gates[n].loc.line);
    for name in order {
        visit(name, &gates, &mut marks)?;
    }
    Ok(gates)
}

struct Lowerer<'a> {
    circuit: &'a Circuit,
    gates: &'a HashMap<&'a str, &'a GateDecl>,
}

impl Lowerer<'_> {
    fn qubit_operand(&self, operand: &Operand) -> QasmResult<Vec<usize>> {
        let name = operand.name();
        let reg = self.circuit.qreg(name).ok_or_else(|| {
            let msg = if self.circuit.creg(name).is_some() {
                format!("'{name}' is a classical register, expected a quantum register")
            } else {
                format!("undeclared quantum register '{name}'")
            };
            QasmError::semantic(operand.loc(), msg)
        })?;
        resolve(reg.offset, reg.size, operand)
    }

    fn clbit_operand(&self, operand: &Operand) -> QasmResult<Vec<usize>> {
        let name = operand.name();
        let reg = self.circuit.creg(name).ok_or_else(|| {
            let msg = if self.circuit.qreg(name).is_some() {
                format!("'{name}' is a quantum register, expected a classical register")
            } else {
                format!("undeclared classical register '{name}'")
            };
            QasmError::semantic(operand.loc(), msg)
        })?;
        resolve(reg.offset, reg.size, operand)
    }

    fn measure(&self, q: &Operand, c: &Operand, loc: Loc, ops: &mut Vec<Op>) -> QasmResult<()> {
        let qubits = self.qubit_operand(q)?;
        let clbits = self.clbit_operand(c)?;
        let whole_q = matches!(q, Operand::Register { .. });
        let whole_c = matches!(c, Operand::Register { .. });
        if whole_q != whole_c || qubits.len() != clbits.len() {
            return Err(QasmError::semantic(
                loc,
                format!(
                    "measure size mismatch: {} qubit(s) into {} classical bit(s)",
                    qubits.len(),
                    clbits.len()
                ),
            ));
        }
        for (qubit, clbit) in qubits.into_iter().zip(clbits) {
            ops.push(Op::Measure { qubit, clbit });
        }
        Ok(())
    }

    fn top_level_call(&self, call: &GateCall, ops: &mut Vec<Op>) -> QasmResult<()> {
        let no_bindings = HashMap::new();
        let params = call
            .params
            .iter()
            .map(|p| p.eval(&no_bindings))
            .collect::<QasmResult<Vec<_>>>()?;

        let resolved = call
            .args
            .iter()
            .map(|a| Ok((matches!(a, Operand::Register { .. }), self.qubit_operand(a)?)))
            .collect::<QasmResult<Vec<_>>>()?;

        // Whole-register operands broadcast; all of them must share one size.
        let mut width = None;
        for ((whole, qs), arg) in resolved.iter().zip(&call.args) {
            if *whole {
                match width {
                    None => width = Some(qs.len()),
                    Some(w) if w != qs.len() => {
                        return Err(QasmError::semantic(
                            arg.loc(),
                            "register operands of a gate call must have equal sizes",
                        ))
                    }
                    _ => {}
                }
            }
        }
        for i in 0..width.unwrap_or(1) {
            let qubits: Vec<usize> = resolved
                .iter()
                .map(|(whole, qs)| if *whole { qs[i] } else { qs[0] })
                .collect();
            self.expand(&call.name, &params, &qubits, call.loc, ops)?;
        }
        Ok(())
    }

    fn expand(
        &self,
        name: &str,
        params: &[f64],
        qubits: &[usize],
        loc: Loc,
        ops: &mut Vec<Op>,
    ) -> QasmResult<()> {
        let (n_params, n_qubits) = if let Some(g) = GateId::from_name(name) {
            (g.num_params(), g.num_qubits())
        } else if let Some(decl) = self.gates.get(name) {
            (decl.params.len(), decl.qargs.len())
        } else {
            return Err(QasmError::semantic(loc, format!("undefined gate '{name}'")));
        };
        if params.len() != n_params {
            return Err(QasmError::semantic(
                loc,
                format!("gate '{name}' takes {n_params} parameter(s), got {}", params.len()),
            ));
        }
        if qubits.len() != n_qubits {
            return Err(QasmError::semantic(
                loc,
                format!("gate '{name}' acts on {n_qubits} qubit(s), got {}", qubits.len()),
            ));
        }
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].contains(q) {
                return Err(QasmError::semantic(
                    loc,
                    format!("duplicate qubit operand in call to '{name}'"),
                ));
            }
        }

        let Some(decl) = self.gates.get(name) else {
            ops.push(Op::Gate {
                gate: GateId::from_name(name).expect("checked above"),
                params: params.to_vec(),
                qubits: qubits.to_vec(),
            });
            return Ok(());
        };

        let bindings: HashMap<String, f64> = decl
            .params
            .iter()
            .cloned()
            .zip(params.iter().copied())
            .collect();
        let formal = |op: &Operand| -> QasmResult<usize> {
            decl.qargs
                .iter()
                .position(|a| a == op.name())
                .map(|i| qubits[i])
                .ok_or_else(|| {
                    QasmError::semantic(
                        op.loc(),
                        format!("'{}' is not an argument of gate '{}'", op.name(), decl.name),
                    )
                })
        };
        for stmt in &decl.body {
            match stmt {
                GateBodyStmt::Call(call) => {
                    let inner_params = call
                        .params
                        .iter()
                        .map(|p| p.eval(&bindings))
                        .collect::<QasmResult<Vec<_>>>()?;
                    let inner_qubits = call
                        .args
                        .iter()
                        .map(formal)
                        .collect::<QasmResult<Vec<_>>>()?;
                    self.expand(&call.name, &inner_params, &inner_qubits, call.loc, ops)?;
                }
                GateBodyStmt::Barrier { args, .. } => {
                    let qs = args.iter().map(formal).collect::<QasmResult<Vec<_>>>()?;
                    ops.push(Op::Barrier { qubits: qs });
                }
            }
        }
        Ok(())
    }
}

fn resolve(offset: usize, size: usize, operand: &Operand) -> QasmResult<Vec<usize>> {
    match operand {
        Operand::Register { .. } => Ok((offset..offset + size).collect()),
        Operand::Bit { name, index, loc } => {
            if *index >= size {
                Err(QasmError::semantic(
                    *loc,
                    format!("index {index} out of bounds for register '{name}' of size {size}"),
                ))
            } else {
                Ok(vec![offset + index])
            }
        }
    }
}
