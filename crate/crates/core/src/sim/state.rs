use num_complex::Complex64;

use super::gates::GateMatrix;

/// Dense `2^n` amplitude vector. Basis index `b` has qubit `q` in state
/// `(b >> q) & 1`, so qubit 0 is the least significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        assert!(amps.len().is_power_of_two(), "length must be a power of two");
        Self {
            n_qubits: amps.len().trailing_zeros() as usize,
            amps,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Applies `matrix` to `qubits`; operand 0 maps to the matrix's most
    /// significant index bit.
    pub fn apply(&mut self, matrix: &GateMatrix, qubits: &[usize]) {
        debug_assert_eq!(matrix.dim(), 1 << qubits.len());
        match qubits {
            [q] => self.apply_1q(matrix, *q),
            _ => self.apply_kq(matrix, qubits),
        }
    }

    fn apply_1q(&mut self, m: &GateMatrix, q: usize) {
        let (m00, m01, m10, m11) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
        let stride = 1usize << q;
        for base in (0..self.amps.len()).step_by(stride << 1) {
            for i in base..base + stride {
                let a0 = self.amps[i];
                let a1 = self.amps[i + stride];
                self.amps[i] = m00 * a0 + m01 * a1;
                self.amps[i + stride] = m10 * a0 + m11 * a1;
            }
        }
    }

    fn apply_kq(&mut self, m: &GateMatrix, qubits: &[usize]) {
        let k = qubits.len();
        let dim = 1usize << k;
        let mut sorted = qubits.to_vec();
        sorted.sort_unstable();

        // Offset of each local basis state relative to a base index with all operand bits cleared.
        let offsets: Vec<usize> = (0..dim)
            .map(|j| {
                qubits
                    .iter()
                    .enumerate()
                    .filter(|(pos, _)| (j >> (k - 1 - pos)) & 1 == 1)
                    .map(|(_, &q)| 1usize << q)
                    .sum()
            })
            .collect();

        let mut local = vec![Complex64::new(0.0, 0.0); dim];
        for i in 0..(self.amps.len() >> k) {
            let base = insert_zero_bits(i, &sorted);
            for (slot, off) in local.iter_mut().zip(&offsets) {
                *slot = self.amps[base | off];
            }
            for (row, off) in offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (col, v) in local.iter().enumerate() {
                    acc += m.get(row, col) * v;
                }
                self.amps[base | off] = acc;
            }
        }
    }
}

/// Spreads the bits of `i` so that every position in `sorted_positions` is 0.
fn insert_zero_bits(mut i: usize, sorted_positions: &[usize]) -> usize {
    for &p in sorted_positions {
        let low = i & ((1usize << p) - 1);
        i = ((i >> p) << (p + 1)) | low;
    }
    i
}
