mod common;

use common::{gate_on, QAOA};
use proptest::prelude::*;
use qex_core::circuit::{Circuit, GateId, Op};
use qex_core::qasm::{compile, QasmErrorKind};

fn call(gate: GateId, n_params: usize, n_qubits: usize) -> String {
    let params: Vec<String> = (0..n_params).map(|i| format!("{}.25", i + 1)).collect();
    let qubits: Vec<String> = (0..n_qubits).map(|i| format!("q[{i}]")).collect();
    let p = if params.is_empty() {
        String::new()
    } else {
        format!("({})", params.join(", "))
    };
    format!("include \"qelib1.inc\";\nqreg q[4];\n{}{p} {};", gate.name(), qubits.join(", "))
}

#[test]
fn every_builtin_gate_lowers_with_correct_arity() {
    for g in GateId::ALL {
        let c = compile(&call(g, g.num_params(), g.num_qubits())).unwrap();
        assert_eq!(c.gate_count(), 1, "{g}");
        for (np, nq) in [
            (g.num_params() + 1, g.num_qubits()),
            (g.num_params(), g.num_qubits() + 1),
            (g.num_params(), g.num_qubits() - 1),
        ] {
            if nq == 0 {
                continue;
            }
            let err = compile(&call(g, np, nq)).unwrap_err();
            assert_eq!(err.kind, QasmErrorKind::SemanticError, "{g} with {np} params, {nq} qubits");
        }
        if g.num_params() > 0 {
            let err = compile(&call(g, g.num_params() - 1, g.num_qubits())).unwrap_err();
            assert_eq!(err.kind, QasmErrorKind::SemanticError);
        }
    }
}

fn registers() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (
        proptest::collection::vec(1usize..3, 1..3),
        proptest::collection::vec(1usize..3, 0..3),
    )
}

/// Random circuit over several registers, with barriers and terminal measures.
fn rich_circuit() -> impl Strategy<Value = Circuit> {
    registers().prop_flat_map(|(qs, cs)| {
        let n: usize = qs.iter().sum();
        let m: usize = cs.iter().sum();
        (
            Just((qs, cs)),
            proptest::collection::vec(
                prop_oneof![
                    4 => gate_on(n).prop_map(Some),
                    1 => Just(None),
                ],
                0..12,
            ),
            proptest::collection::vec((0..n, 0..m.max(1)), 0..=m.min(n)),
        )
            .prop_map(move |((qs, cs), body, measures)| {
                let mut c = Circuit::default();
                for (i, s) in qs.iter().enumerate() {
                    c.add_qreg(&format!("q{i}"), *s);
                }
                for (i, s) in cs.iter().enumerate() {
                    c.add_creg(&format!("c{i}"), *s);
                }
                for item in body {
                    match item {
                        Some(g) => {
                            c.gate(g.gate, &g.params, &g.qubits);
                        }
                        None => c.ops.push(Op::Barrier {
                            qubits: (0..n).collect(),
                        }),
                    }
                }
                if m > 0 {
                    for (q, cl) in measures {
                        c.measure(q, cl);
                    }
                }
                c
            })
    })
}

fn within_bounds(src: &str, line: usize, column: usize) -> bool {
    let lines: Vec<&str> = src.split('\n').collect();
    line >= 1 && line <= lines.len() && column >= 1 && column <= lines[line - 1].chars().count().max(1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn render_then_parse_round_trips(circuit in rich_circuit()) {
        let text = circuit.to_qasm();
        let again = compile(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(again, circuit);
    }

    #[test]
    fn errors_point_inside_the_source(pos in 0usize..400, insert in proptest::sample::select(vec!["@", ";", "[", "(", "q", "-", "}", "1.", "gate", "\"", "->"]), delete in 0usize..6) {
        let mut src: Vec<char> = QAOA.chars().collect();
        let at = pos % src.len();
        let end = (at + delete).min(src.len());
        src.splice(at..end, insert.chars());
        let src: String = src.into_iter().collect();
        if let Err(e) = compile(&src) {
            prop_assert!(within_bounds(&src, e.loc.line, e.loc.column), "{e} outside source:\n{src}");
        }
    }
}

#[test]
fn recursive_definitions_are_rejected() {
    for src in [
        "gate a q { a q; } qreg r[1]; a r[0];",
        "gate a q { b q; } gate b q { c q; } gate c q { a q; } qreg r[1];",
    ] {
        let err = compile(src).unwrap_err();
        assert_eq!(err.kind, QasmErrorKind::SemanticError);
        assert!(err.message.contains("recursive"), "{}", err.message);
    }
    // Deep but acyclic chains expand fine.
    let mut src = String::from("gate g0 a { h a; }\n");
    for i in 1..30 {
        src.push_str(&format!("gate g{i} a {{ g{} a; g{} a; }}\n", i - 1, i - 1));
    }
    src.push_str("qreg q[1]; g12 q[0];");
    assert_eq!(compile(&src).unwrap().gate_count(), 1 << 12);
}
