//! Executable circuit representation produced by the OpenQASM frontend.

use std::fmt;
use std::fmt::Write as _;

/// The primitive gate set: every gate of the standard `qelib1.inc` library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateId {
    U3,
    U2,
    U1,
    CX,
    Id,
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    RX,
    RY,
    RZ,
    CZ,
    CY,
    CH,
    CCX,
    CRZ,
    CU1,
    CU3,
}

impl GateId {
    pub const ALL: [GateId; 23] = [
        GateId::U3,
        GateId::U2,
        GateId::U1,
        GateId::CX,
        GateId::Id,
        GateId::X,
        GateId::Y,
        GateId::Z,
        GateId::H,
        GateId::S,
        GateId::Sdg,
        GateId::T,
        GateId::Tdg,
        GateId::RX,
        GateId::RY,
        GateId::RZ,
        GateId::CZ,
        GateId::CY,
        GateId::CH,
        GateId::CCX,
        GateId::CRZ,
        GateId::CU1,
        GateId::CU3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateId::U3 => "u3",
            GateId::U2 => "u2",
            GateId::U1 => "u1",
            GateId::CX => "cx",
            GateId::Id => "id",
            GateId::X => "x",
            GateId::Y => "y",
            GateId::Z => "z",
            GateId::H => "h",
            GateId::S => "s",
            GateId::Sdg => "sdg",
            GateId::T => "t",
            GateId::Tdg => "tdg",
            GateId::RX => "rx",
            GateId::RY => "ry",
            GateId::RZ => "rz",
            GateId::CZ => "cz",
            GateId::CY => "cy",
            GateId::CH => "ch",
            GateId::CCX => "ccx",
            GateId::CRZ => "crz",
            GateId::CU1 => "cu1",
            GateId::CU3 => "cu3",
        }
    }

    /// Looks up a gate by its OpenQASM name. The language built-ins `U` and
    /// `CX` resolve to `u3` and `cx`.
    pub fn from_name(name: &str) -> Option<GateId> {
        match name {
            "U" => return Some(GateId::U3),
            "CX" => return Some(GateId::CX),
            _ => {}
        }
        GateId::ALL.iter().copied().find(|g| g.name() == name)
    }

    pub fn num_params(self) -> usize {
        match self {
            GateId::U3 | GateId::CU3 => 3,
            GateId::U2 => 2,
            GateId::U1 | GateId::RX | GateId::RY | GateId::RZ | GateId::CRZ | GateId::CU1 => 1,
            _ => 0,
        }
    }

    pub fn num_qubits(self) -> usize {
        match self {
            GateId::CCX => 3,
            GateId::CX
            | GateId::CZ
            | GateId::CY
            | GateId::CH
            | GateId::CRZ
            | GateId::CU1
            | GateId::CU3 => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Gate {
        gate: GateId,
        params: Vec<f64>,
        qubits: Vec<usize>,
    },
    Measure {
        qubit: usize,
        clbit: usize,
    },
    Barrier {
        qubits: Vec<usize>,
    },
}

/// Named register laid out at `offset..offset + size` in the global index space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub offset: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub n_qubits: usize,
    pub n_clbits: usize,
    pub qregs: Vec<Register>,
    pub cregs: Vec<Register>,
    pub ops: Vec<Op>,
}

impl Circuit {
    /// Single anonymous-style circuit over `q[n]` / `c[m]`.
    pub fn with_registers(n_qubits: usize, n_clbits: usize) -> Self {
        let mut c = Circuit::default();
        c.add_qreg("q", n_qubits);
        if n_clbits > 0 {
            c.add_creg("c", n_clbits);
        }
        c
    }

    pub fn add_qreg(&mut self, name: &str, size: usize) {
        self.qregs.push(Register {
            name: name.to_string(),
            offset: self.n_qubits,
            size,
        });
        self.n_qubits += size;
    }

    pub fn add_creg(&mut self, name: &str, size: usize) {
        self.cregs.push(Register {
            name: name.to_string(),
            offset: self.n_clbits,
            size,
        });
        self.n_clbits += size;
    }

    pub fn qreg(&self, name: &str) -> Option<&Register> {
        self.qregs.iter().find(|r| r.name == name)
    }

    pub fn creg(&self, name: &str) -> Option<&Register> {
        self.cregs.iter().find(|r| r.name == name)
    }

    pub fn gate(&mut self, gate: GateId, params: &[f64], qubits: &[usize]) -> &mut Self {
        self.ops.push(Op::Gate {
            gate,
            params: params.to_vec(),
            qubits: qubits.to_vec(),
        });
        self
    }

    pub fn measure(&mut self, qubit: usize, clbit: usize) -> &mut Self {
        self.ops.push(Op::Measure { qubit, clbit });
        self
    }

    pub fn measure_all(&mut self) -> &mut Self {
        for q in 0..self.n_qubits.min(self.n_clbits) {
            self.measure(q, q);
        }
        self
    }

    pub fn has_measurements(&self) -> bool {
        self.ops.iter().any(|op| matches!(op, Op::Measure { .. }))
    }

    pub fn gate_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, Op::Gate { .. }))
            .count()
    }

    /// Copy of the circuit with measurements removed.
    pub fn without_measurements(&self) -> Circuit {
        Circuit {
            ops: self
                .ops
                .iter()
                .filter(|op| !matches!(op, Op::Measure { .. }))
                .cloned()
                .collect(),
            ..self.clone()
        }
    }

    /// Renders canonical OpenQASM 2.0 that lowers back to this circuit.
    pub fn to_qasm(&self) -> String {
        let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
        for r in &self.qregs {
            let _ = writeln!(out, "qreg {}[{}];", r.name, r.size);
        }
        for r in &self.cregs {
            let _ = writeln!(out, "creg {}[{}];", r.name, r.size);
        }
        let qname = |i: usize| locate(&self.qregs, i);
        let cname = |i: usize| locate(&self.cregs, i);
        for op in &self.ops {
            match op {
                Op::Gate {
                    gate,
                    params,
                    qubits,
                } => {
                    out.push_str(gate.name());
                    if !params.is_empty() {
                        let ps: Vec<String> = params.iter().map(|p| format!("{p}")).collect();
                        let _ = write!(out, "({})", ps.join(","));
                    }
                    let qs: Vec<String> = qubits.iter().map(|&q| qname(q)).collect();
                    let _ = writeln!(out, " {};", qs.join(","));
                }
                Op::Measure { qubit, clbit } => {
                    let _ = writeln!(out, "measure {} -> {};", qname(*qubit), cname(*clbit));
                }
                Op::Barrier { qubits } => {
                    let qs: Vec<String> = qubits.iter().map(|&q| qname(q)).collect();
                    let _ = writeln!(out, "barrier {};", qs.join(","));
                }
            }
        }
        out
    }
}

fn locate(regs: &[Register], index: usize) -> String {
    regs.iter()
        .find(|r| index >= r.offset && index < r.offset + r.size)
        .map(|r| format!("{}[{}]", r.name, index - r.offset))
        .unwrap_or_else(|| format!("?[{index}]"))
}
