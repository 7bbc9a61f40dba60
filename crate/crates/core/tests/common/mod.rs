#![allow(dead_code)]

pub mod oracle;

use proptest::prelude::*;
use qex_core::circuit::{Circuit, GateId};

pub const QAOA: &str = "OPENQASM 2.0;
include \"qelib1.inc\";
qreg q[3];
h q[0]; h q[1]; h q[2];
cx q[0],q[1]; rz(-1.4) q[1]; cx q[0],q[1];
cx q[1],q[2]; rz(-1.4) q[2]; cx q[1],q[2];
cx q[0],q[2]; rz(-1.4) q[2]; cx q[0],q[2];
rx(1.6) q[0]; rx(1.6) q[1]; rx(1.6) q[2];
";

pub const MAXCUT_TERMS: &str = r#"[
  {"coeff": 1.5, "pauli": ""},
  {"coeff": -0.5, "pauli": "Z0 Z1"},
  {"coeff": -0.5, "pauli": "Z1 Z2"},
  {"coeff": -0.5, "pauli": "Z0 Z2"}
]"#;

/// `<H_C>` for the QAOA instance in double precision, from a numpy dense
/// 8x8 evaluation (and reproduced by [`oracle::oracle_expectation`]).
pub const QAOA_EXPECTATION_F64: f64 = 0.029909231460930847;

#[derive(Debug, Clone)]
pub struct GateSpec {
    pub gate: GateId,
    pub params: Vec<f64>,
    pub qubits: Vec<usize>,
}

pub fn gate_on(n: usize) -> impl Strategy<Value = GateSpec> {
    let gates: Vec<GateId> = GateId::ALL
        .iter()
        .copied()
        .filter(|g| g.num_qubits() <= n)
        .collect();
    proptest::sample::select(gates).prop_flat_map(move |gate| {
        (
            Just(gate),
            proptest::collection::vec(-7.0f64..7.0, gate.num_params()),
            Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
        )
            .prop_map(|(gate, params, perm)| GateSpec {
                gate,
                params,
                qubits: perm[..gate.num_qubits()].to_vec(),
            })
    })
}

/// Random gate-only circuit on `q[n]` with `1 <= n <= max_n`.
pub fn random_circuit(max_n: usize, max_depth: usize) -> impl Strategy<Value = Circuit> {
    (1..=max_n).prop_flat_map(move |n| {
        proptest::collection::vec(gate_on(n), 0..=max_depth).prop_map(move |gates| {
            let mut c = Circuit::with_registers(n, 0);
            for g in gates {
                c.gate(g.gate, &g.params, &g.qubits);
            }
            c
        })
    })
}
