//! Dense state-vector execution of a [`Circuit`].
//!
//! Two primitives are exposed: measurement sampling ([`Engine::sample`]) and
//! Pauli-sum expectation values ([`Engine::expectation`] and its finite-shot
//! counterpart [`Engine::expectation_sampled`]).
//!
//! Sampling draws from the exact outcome distribution of the pre-measurement
//! state, which is valid because measurements must be terminal. Bitstring keys
//! put classical bit `c[0]` in the leftmost character.

mod gates;
mod sampling;
mod state;

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;
use tracing::warn;

pub use gates::{gate_matrix, GateMatrix};
pub use sampling::{fresh_seed, multinomial, rng_from_seed, SimRng};
pub use state::StateVector;

use crate::circuit::{Circuit, GateId, Op};
use crate::observable::{Axis, Observable, PauliTerm};

pub const DEFAULT_MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("circuit needs {requested} qubits, engine is capped at {max}")]
    Capacity { requested: usize, max: usize },
    #[error("circuit has no measurements to sample")]
    NoMeasurement,
    #[error("gate '{gate}' acts on qubit {qubit} after it was measured")]
    MidCircuitMeasure { gate: GateId, qubit: usize },
    #[error("{0}")]
    Index(String),
    #[error("shots must be at least 1")]
    InvalidShots,
}

impl SimError {
    pub fn kind(&self) -> &'static str {
        match self {
            SimError::Capacity { .. } => "CapacityError",
            SimError::NoMeasurement => "NoMeasurementError",
            SimError::MidCircuitMeasure { .. } => "MidCircuitMeasureError",
            SimError::Index(_) => "IndexError",
            SimError::InvalidShots => "InvalidShotsError",
        }
    }
}

pub type SimResult<T> = Result<T, SimError>;

/// Measurement histogram keyed by bitstring (`c[0]` leftmost).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

impl Counts {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn get(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn frequency(&self, key: &str) -> f64 {
        self.get(key) as f64 / self.shots as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleResult {
    pub counts: Counts,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledExpectation {
    pub value: f64,
    pub std_error: f64,
    pub shots: u64,
    pub seed: u64,
}

/// Exact distribution over the classical register.
#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    n_clbits: usize,
    /// Distinct measured qubits; outcome index bit `j` is the value of `measured[j]`.
    measured: Vec<usize>,
    /// For each clbit, the position in `measured` of the qubit written to it.
    sources: Vec<Option<usize>>,
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn measured_qubits(&self) -> &[usize] {
        &self.measured
    }

    /// Clbits that receive a measurement result.
    pub fn measured_clbits(&self) -> Vec<usize> {
        (0..self.n_clbits)
            .filter(|&c| self.sources[c].is_some())
            .collect()
    }

    pub fn key(&self, outcome: usize) -> String {
        self.sources
            .iter()
            .map(|src| match src {
                Some(j) if (outcome >> j) & 1 == 1 => '1',
                _ => '0',
            })
            .collect()
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for (i, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                *out.entry(self.key(i)).or_insert(0.0) += p;
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Engine {
    max_qubits: usize,
}

impl Default for Engine {
    fn default() -> Self {
        Self {
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

impl Engine {
    pub fn with_max_qubits(max_qubits: usize) -> Self {
        Self { max_qubits }
    }

    pub fn max_qubits(&self) -> usize {
        self.max_qubits
    }

    fn check_capacity(&self, n: usize) -> SimResult<()> {
        if n > self.max_qubits {
            return Err(SimError::Capacity {
                requested: n,
                max: self.max_qubits,
            });
        }
        Ok(())
    }

    /// State before measurement, `U|0…0⟩`. Measurements must be terminal:
    /// no gate may touch a qubit after it has been measured.
    pub fn run(&self, circuit: &Circuit) -> SimResult<StateVector> {
        self.run_observed(circuit, |_| {})
    }

    /// Like [`run`](Self::run), calling `observe` after every gate.
    pub fn run_observed(
        &self,
        circuit: &Circuit,
        mut observe: impl FnMut(&StateVector),
    ) -> SimResult<StateVector> {
        self.check_capacity(circuit.n_qubits)?;
        check_terminal_measurements(circuit)?;
        let mut state = StateVector::zero(circuit.n_qubits);
        for op in &circuit.ops {
            if let Op::Gate {
                gate,
                params,
                qubits,
            } = op
            {
                state.apply(&gate_matrix(*gate, params), qubits);
                observe(&state);
            }
        }
        Ok(state)
    }

    pub fn outcome_distribution(&self, circuit: &Circuit) -> SimResult<OutcomeDistribution> {
        if !circuit.has_measurements() {
            return Err(SimError::NoMeasurement);
        }
        let state = self.run(circuit)?;

        let mut writer: Vec<Option<usize>> = vec![None; circuit.n_clbits];
        for op in &circuit.ops {
            if let Op::Measure { qubit, clbit } = op {
                writer[*clbit] = Some(*qubit);
            }
        }
        let mut measured: Vec<usize> = writer.iter().flatten().copied().collect();
        measured.sort_unstable();
        measured.dedup();
        let sources = writer
            .iter()
            .map(|w| w.map(|q| measured.binary_search(&q).expect("measured qubit")))
            .collect();

        let probs = marginal(&state, &measured);
        Ok(OutcomeDistribution {
            n_clbits: circuit.n_clbits,
            measured,
            sources,
            probs,
        })
    }

    /// Exact probability of every classical outcome with nonzero weight.
    pub fn probabilities(&self, circuit: &Circuit) -> SimResult<BTreeMap<String, f64>> {
        Ok(self.outcome_distribution(circuit)?.to_map())
    }

    pub fn sample(&self, circuit: &Circuit, shots: u64, seed: Option<u64>) -> SimResult<SampleResult> {
        if shots == 0 {
            return Err(SimError::InvalidShots);
        }
        let dist = self.outcome_distribution(circuit)?;
        let seed = seed.unwrap_or_else(fresh_seed);
        let mut rng = rng_from_seed(seed);
        let hits = multinomial(dist.probabilities(), shots, &mut rng);

        let mut counts = BTreeMap::new();
        for (i, &n) in hits.iter().enumerate() {
            if n > 0 {
                *counts.entry(dist.key(i)).or_insert(0) += n;
            }
        }
        Ok(SampleResult {
            counts: Counts { shots, counts },
            seed,
        })
    }

    fn estimator_state(&self, circuit: &Circuit, observable: &Observable) -> SimResult<StateVector> {
        let needed = observable.min_qubits();
        if needed > circuit.n_qubits {
            return Err(SimError::Index(format!(
                "observable acts on qubit {} but the circuit has {} qubit(s)",
                needed - 1,
                circuit.n_qubits
            )));
        }
        if circuit.has_measurements() {
            warn!("ignoring measurements in circuit passed to the estimator");
            self.run(&circuit.without_measurements())
        } else {
            self.run(circuit)
        }
    }

    /// `Σ_k c_k ⟨ψ|P_k|ψ⟩` before the real part is taken.
    pub fn expectation_raw(&self, circuit: &Circuit, observable: &Observable) -> SimResult<Complex64> {
        let state = self.estimator_state(circuit, observable)?;
        Ok(observable
            .terms
            .iter()
            .map(|term| {
                if term.is_identity() {
                    Complex64::new(term.coeff, 0.0)
                } else {
                    state.inner(&apply_pauli(&state, term)) * term.coeff
                }
            })
            .sum())
    }

    pub fn expectation(&self, circuit: &Circuit, observable: &Observable) -> SimResult<f64> {
        Ok(self.expectation_raw(circuit, observable)?.re)
    }

    /// Finite-shot estimate: each non-identity term is rotated into the Z
    /// basis, sampled `shots` times on its own qubits, and averaged by parity.
    pub fn expectation_sampled(
        &self,
        circuit: &Circuit,
        observable: &Observable,
        shots: u64,
        seed: Option<u64>,
    ) -> SimResult<SampledExpectation> {
        if shots == 0 {
            return Err(SimError::InvalidShots);
        }
        let state = self.estimator_state(circuit, observable)?;
        let seed = seed.unwrap_or_else(fresh_seed);
        let mut rng = rng_from_seed(seed);

        let mut value = 0.0;
        let mut variance = 0.0;
        for term in &observable.terms {
            if term.is_identity() {
                value += term.coeff;
                continue;
            }
            let mut rotated = state.clone();
            for (&q, &axis) in term.factors() {
                match axis {
                    Axis::Z => {}
                    Axis::X => rotated.apply(&gate_matrix(GateId::H, &[]), &[q]),
                    Axis::Y => {
                        rotated.apply(&gate_matrix(GateId::Sdg, &[]), &[q]);
                        rotated.apply(&gate_matrix(GateId::H, &[]), &[q]);
                    }
                }
            }
            let qubits: Vec<usize> = term.factors().keys().copied().collect();
            let hits = multinomial(&marginal(&rotated, &qubits), shots, &mut rng);

            let mut bits = vec![b'0'; state.n_qubits()];
            let mut sum = 0i64;
            for (outcome, &n) in hits.iter().enumerate() {
                if n == 0 {
                    continue;
                }
                for (j, &q) in qubits.iter().enumerate() {
                    bits[q] = if (outcome >> j) & 1 == 1 { b'1' } else { b'0' };
                }
                let bitstring = std::str::from_utf8(&bits).expect("ascii");
                let eig = term
                    .eigenvalue(bitstring)
                    .map_err(|e| SimError::Index(e.to_string()))?;
                sum += i64::from(eig) * n as i64;
            }
            let mean = sum as f64 / shots as f64;
            value += term.coeff * mean;
            if shots > 1 {
                let sample_var = (1.0 - mean * mean) * shots as f64 / (shots - 1) as f64;
                variance += term.coeff * term.coeff * sample_var / shots as f64;
            }
        }
        Ok(SampledExpectation {
            value,
            std_error: variance.max(0.0).sqrt(),
            shots,
            seed,
        })
    }
}

fn check_terminal_measurements(circuit: &Circuit) -> SimResult<()> {
    let mut measured = vec![false; circuit.n_qubits];
    for op in &circuit.ops {
        match op {
            Op::Measure { qubit, .. } => measured[*qubit] = true,
            Op::Gate { gate, qubits, .. } => {
                if let Some(&q) = qubits.iter().find(|&&q| measured[q]) {
                    return Err(SimError::MidCircuitMeasure {
                        gate: *gate,
                        qubit: q,
                    });
                }
            }
            Op::Barrier { .. } => {}
        }
    }
    Ok(())
}

/// Probabilities of the joint values of `qubits` (bit `j` of the index is `qubits[j]`).
fn marginal(state: &StateVector, qubits: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; 1usize << qubits.len()];
    for (b, amp) in state.amplitudes().iter().enumerate() {
        let p = amp.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let idx = qubits
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, &q)| acc | (((b >> q) & 1) << j));
        out[idx] += p;
    }
    out
}

/// `P|ψ⟩` for a Pauli string, using `P|b⟩ = i^{#Y} (-1)^{popcount(b & (Y|Z))} |b ^ (X|Y)⟩`.
fn apply_pauli(state: &StateVector, term: &PauliTerm) -> StateVector {
    let (mut flip, mut sign, mut n_y) = (0usize, 0usize, 0u32);
    for (&q, &axis) in term.factors() {
        match axis {
            Axis::X => flip |= 1 << q,
            Axis::Y => {
                flip |= 1 << q;
                sign |= 1 << q;
                n_y += 1;
            }
            Axis::Z => sign |= 1 << q,
        }
    }
    let global = Complex64::new(0.0, 1.0).powu(n_y);
    let src = state.amplitudes();
    let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
    for (b, &a) in src.iter().enumerate() {
        let s = if (b & sign).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        out[b ^ flip] = a * global * s;
    }
    StateVector::from_amplitudes(out)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;

    use serde_json::json;

    use super::*;
    use crate::observable::parse_observable_terms;
    use crate::qasm::compile;

    const GHZ: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\ncreg c[3];\nh q[0];\ncx q[0], q[1];\ncx q[0], q[2];\nmeasure q -> c;";
    const BELL: &str = "qreg q[2]; h q[0]; cx q[0], q[1];";

    fn obs(v: serde_json::Value) -> Observable {
        parse_observable_terms(&v).unwrap()
    }

    #[test]
    fn ghz_state() {
        let c = compile(GHZ).unwrap();
        let s = Engine::default().run(&c).unwrap();
        for (i, a) in s.amplitudes().iter().enumerate() {
            let want = if i == 0 || i == 7 { FRAC_1_SQRT_2 } else { 0.0 };
            assert!((a.re - want).abs() < 1e-15 && a.im.abs() < 1e-15, "index {i}");
        }
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c = Circuit::with_registers(2, 0);
        let s = Engine::default().run(&c).unwrap();
        assert_eq!(s, StateVector::zero(2));
    }

    #[test]
    fn mid_circuit_measurement_rejected() {
        let c = compile("qreg q[2]; creg c[2]; measure q[0] -> c[0]; x q[0];").unwrap();
        assert!(matches!(
            Engine::default().run(&c),
            Err(SimError::MidCircuitMeasure { qubit: 0, .. })
        ));
        // Gates on other qubits after a measurement are fine.
        let c = compile("qreg q[2]; creg c[2]; measure q[0] -> c[0]; x q[1]; measure q[1] -> c[1];").unwrap();
        assert!(Engine::default().run(&c).is_ok());
    }

    #[test]
    fn capacity_cap() {
        let c = Circuit::with_registers(30, 0);
        assert_eq!(
            Engine::default().run(&c),
            Err(SimError::Capacity {
                requested: 30,
                max: 24
            })
        );
    }

    #[test]
    fn bitstring_order_puts_c0_leftmost() {
        let c = compile("qreg q[3]; creg c[3]; x q[0]; measure q -> c;").unwrap();
        let r = Engine::default().sample(&c, 5, Some(1)).unwrap();
        assert_eq!(r.counts.counts, BTreeMap::from([("100".to_string(), 5)]));
    }

    #[test]
    fn measure_wiring_and_unmeasured_clbits() {
        let c = compile("qreg q[2]; creg c[3]; x q[1]; measure q[1] -> c[2];").unwrap();
        let p = Engine::default().probabilities(&c).unwrap();
        assert_eq!(p, BTreeMap::from([("001".to_string(), 1.0)]));
    }

    #[test]
    fn ghz_sampling() {
        let c = compile(GHZ).unwrap();
        let r = Engine::default().sample(&c, 2000, Some(7)).unwrap();
        assert_eq!(r.counts.total(), 2000);
        assert!(r.counts.counts.keys().all(|k| k == "000" || k == "111"));
        assert!((r.counts.frequency("000") - 0.5).abs() < 0.05);
    }

    #[test]
    fn sampling_requires_measurement_and_shots() {
        let c = compile(BELL).unwrap();
        assert_eq!(Engine::default().sample(&c, 10, None), Err(SimError::NoMeasurement));
        let c = compile(GHZ).unwrap();
        assert_eq!(Engine::default().sample(&c, 0, None), Err(SimError::InvalidShots));
    }

    #[test]
    fn hadamard_frequency_million_shots() {
        // Binomial oracle: sd of the frequency is 0.5/sqrt(1e6) = 5e-4, the band is 4 sd.
        let c = compile("qreg q[1]; creg c[1]; h q[0]; measure q -> c;").unwrap();
        let r = Engine::default().sample(&c, 1_000_000, Some(2024)).unwrap();
        let f = r.counts.frequency("1");
        assert!((0.498..=0.502).contains(&f), "{f}");
    }

    #[test]
    fn identity_term_on_zero_state() {
        let c = Circuit::with_registers(1, 0);
        let v = Engine::default()
            .expectation(&c, &obs(json!([{"coeff": 1.5, "pauli": ""}])))
            .unwrap();
        assert_eq!(v, 1.5);
    }

    #[test]
    fn bell_expectations() {
        // Hand-computed oracle: |Φ+⟩ is a +1 eigenstate of ZZ and XX, ⟨Z0⟩ = 0, ⟨YY⟩ = -1.
        let c = compile(BELL).unwrap();
        let e = Engine::default();
        let cases = [("Z0 Z1", 1.0), ("X0 X1", 1.0), ("Z0", 0.0), ("Y0 Y1", -1.0), ("X0", 0.0)];
        for (p, want) in cases {
            let got = e.expectation(&c, &obs(json!([{"coeff": 1.0, "pauli": p}]))).unwrap();
            assert!((got - want).abs() < 1e-12, "{p}: {got}");
        }
    }

    #[test]
    fn empty_observable_is_zero() {
        let c = compile(BELL).unwrap();
        assert_eq!(Engine::default().expectation(&c, &Observable::default()).unwrap(), 0.0);
    }

    #[test]
    fn out_of_range_pauli_index() {
        let c = compile(BELL).unwrap();
        let err = Engine::default()
            .expectation(&c, &obs(json!([{"coeff": 1.0, "pauli": "Z2"}])))
            .unwrap_err();
        assert_eq!(err.kind(), "IndexError");
    }

    #[test]
    fn estimator_ignores_measurements() {
        let with = compile("qreg q[2]; creg c[2]; h q[0]; cx q[0], q[1]; measure q -> c;").unwrap();
        let without = compile(BELL).unwrap();
        let o = obs(json!([{"coeff": 1.0, "pauli": "X0 X1"}]));
        let e = Engine::default();
        assert_eq!(e.expectation(&with, &o).unwrap(), e.expectation(&without, &o).unwrap());
    }

    #[test]
    fn sampled_bell_zz_is_exact() {
        let c = compile(BELL).unwrap();
        let o = obs(json!([{"coeff": 1.0, "pauli": "Z0 Z1"}]));
        for seed in [1, 2, 3] {
            let r = Engine::default().expectation_sampled(&c, &o, 4096, Some(seed)).unwrap();
            assert_eq!(r.value, 1.0);
            assert_eq!(r.std_error, 0.0);
        }
    }

    #[test]
    fn sampled_single_shot_deterministic() {
        let c = Circuit::with_registers(1, 0);
        let o = obs(json!([{"coeff": 1.0, "pauli": "Z0"}]));
        let r = Engine::default().expectation_sampled(&c, &o, 1, None).unwrap();
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn sampled_y_basis_change() {
        // s h |0> ... prepare |+i> = S H |0>, an eigenstate of Y with +1.
        let c = compile("qreg q[1]; h q[0]; s q[0];").unwrap();
        let o = obs(json!([{"coeff": 2.0, "pauli": "Y0"}]));
        let r = Engine::default().expectation_sampled(&c, &o, 100, Some(5)).unwrap();
        assert_eq!(r.value, 2.0);
    }

    #[test]
    fn sampled_is_reproducible() {
        let c = compile("qreg q[2]; ry(0.7) q[0]; cx q[0], q[1]; rx(0.3) q[1];").unwrap();
        let o = obs(json!([{"coeff": 0.5, "pauli": "Z0"}, {"coeff": -1.0, "pauli": "X0 Y1"}]));
        let e = Engine::default();
        let a = e.expectation_sampled(&c, &o, 1000, Some(9)).unwrap();
        let b = e.expectation_sampled(&c, &o, 1000, Some(9)).unwrap();
        assert_eq!(a, b);
    }
}
