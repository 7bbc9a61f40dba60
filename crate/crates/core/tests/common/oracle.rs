//! Brute-force reference simulator for tests.
//!
//! Gate matrices are written out here independently of the engine, and every
//! gate is embedded into a full `2^n x 2^n` matrix (tensor products of 2x2
//! blocks, controlled gates as sums of projector terms) before multiplying.

#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64 as C;
use qex_core::circuit::{Circuit, GateId, Op};
use qex_core::observable::{Axis, Observable};

pub type Mat2 = [[C; 2]; 2];
pub type Mat = Vec<Vec<C>>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

const O: C = C::new(0.0, 0.0);
const L: C = C::new(1.0, 0.0);

pub const P0: Mat2 = [[L, O], [O, O]];
pub const P1: Mat2 = [[O, O], [O, L]];
pub const ID: Mat2 = [[L, O], [O, L]];
pub const PX: Mat2 = [[O, L], [L, O]];
pub const PY: Mat2 = [[O, C::new(0.0, -1.0)], [C::new(0.0, 1.0), O]];
pub const PZ: Mat2 = [[L, O], [O, C::new(-1.0, 0.0)]];

fn expi(t: f64) -> C {
    c(t.cos(), t.sin())
}

pub fn u3(theta: f64, phi: f64, lam: f64) -> Mat2 {
    let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    [
        [c(ct, 0.0), -expi(lam) * st],
        [expi(phi) * st, expi(phi + lam) * ct],
    ]
}

pub fn single(gate: GateId, p: &[f64]) -> Mat2 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match gate {
        GateId::U3 => u3(p[0], p[1], p[2]),
        GateId::U2 => u3(FRAC_PI_2, p[0], p[1]),
        GateId::U1 => [[L, O], [O, expi(p[0])]],
        GateId::Id => ID,
        GateId::X => PX,
        GateId::Y => PY,
        GateId::Z => PZ,
        GateId::H => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        GateId::S => [[L, O], [O, c(0.0, 1.0)]],
        GateId::Sdg => [[L, O], [O, c(0.0, -1.0)]],
        GateId::T => [[L, O], [O, expi(FRAC_PI_4)]],
        GateId::Tdg => [[L, O], [O, expi(-FRAC_PI_4)]],
        // exp(-i t P / 2) = cos(t/2) I - i sin(t/2) P
        GateId::RX | GateId::RY | GateId::RZ => {
            let pauli = match gate {
                GateId::RX => PX,
                GateId::RY => PY,
                _ => PZ,
            };
            let (co, si) = ((p[0] / 2.0).cos(), (p[0] / 2.0).sin());
            let mut m = [[O; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] = ID[i][j] * co - c(0.0, 1.0) * pauli[i][j] * si;
                }
            }
            m
        }
        _ => panic!("{gate} is not a single-qubit gate"),
    }
}

/// Tensor product of the given single-qubit factors (identity elsewhere).
pub fn embed(n: usize, factors: &[(usize, Mat2)]) -> Mat {
    let dim = 1 << n;
    let mut m = vec![vec![O; dim]; dim];
    for (r, row) in m.iter_mut().enumerate() {
        for (col, entry) in row.iter_mut().enumerate() {
            let mut v = L;
            for q in 0..n {
                let (rb, cb) = ((r >> q) & 1, (col >> q) & 1);
                let f = factors
                    .iter()
                    .find(|(fq, _)| *fq == q)
                    .map(|(_, f)| f[rb][cb])
                    .unwrap_or(if rb == cb { L } else { O });
                v *= f;
                if v == O {
                    break;
                }
            }
            *entry = v;
        }
    }
    m
}

pub fn add(a: &Mat, b: &Mat, scale: C) -> Mat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y * scale).collect())
        .collect()
}

pub fn matvec(m: &Mat, v: &[C]) -> Vec<C> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

pub fn full_gate(n: usize, gate: GateId, params: &[f64], qubits: &[usize]) -> Mat {
    let controlled = |ctrl: usize, tgt: usize, u: Mat2| {
        add(&embed(n, &[(ctrl, P0)]), &embed(n, &[(ctrl, P1), (tgt, u)]), L)
    };
    match gate {
        GateId::CX => controlled(qubits[0], qubits[1], PX),
        GateId::CY => controlled(qubits[0], qubits[1], PY),
        GateId::CZ => controlled(qubits[0], qubits[1], PZ),
        GateId::CH => controlled(qubits[0], qubits[1], single(GateId::H, &[])),
        GateId::CRZ => controlled(qubits[0], qubits[1], single(GateId::RZ, params)),
        GateId::CU1 => controlled(qubits[0], qubits[1], single(GateId::U1, params)),
        GateId::CU3 => controlled(qubits[0], qubits[1], single(GateId::U3, params)),
        GateId::CCX => {
            let both = embed(n, &[(qubits[0], P1), (qubits[1], P1)]);
            let flip = embed(n, &[(qubits[0], P1), (qubits[1], P1), (qubits[2], PX)]);
            add(&add(&embed(n, &[]), &both, -L), &flip, L)
        }
        g => embed(n, &[(qubits[0], single(g, params))]),
    }
}

/// Final amplitudes of the gate part of `circuit`, starting from |0…0⟩.
pub fn oracle_state(circuit: &Circuit) -> Vec<C> {
    let n = circuit.n_qubits;
    let mut psi = vec![O; 1 << n];
    psi[0] = L;
    for op in &circuit.ops {
        if let Op::Gate {
            gate,
            params,
            qubits,
        } = op
        {
            psi = matvec(&full_gate(n, *gate, params, qubits), &psi);
        }
    }
    psi
}

pub fn observable_matrix(n: usize, obs: &Observable) -> Mat {
    let mut h = vec![vec![O; 1 << n]; 1 << n];
    for term in &obs.terms {
        let factors: Vec<(usize, Mat2)> = term
            .factors()
            .iter()
            .map(|(&q, &a)| {
                (
                    q,
                    match a {
                        Axis::X => PX,
                        Axis::Y => PY,
                        Axis::Z => PZ,
                    },
                )
            })
            .collect();
        h = add(&h, &embed(n, &factors), c(term.coeff, 0.0));
    }
    h
}

pub fn oracle_expectation(circuit: &Circuit, obs: &Observable) -> C {
    let psi = oracle_state(circuit);
    let h_psi = matvec(&observable_matrix(circuit.n_qubits, obs), &psi);
    psi.iter().zip(&h_psi).map(|(a, b)| a.conj() * b).sum()
}
