//! Dense unitaries for the primitive gate set.
//!
//! Matrix indices treat operand 0 as the most significant bit, so `cx` with
//! operands `(control, target)` is the familiar
//! `[[1,0,0,0],[0,1,0,0],[0,0,0,1],[0,0,1,0]]`. Rotations use the half-angle
//! convention `exp(-i θ P / 2)`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;

use crate::circuit::GateId;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Row-major square matrix of dimension 2, 4 or 8.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl GateMatrix {
    pub fn from_rows(dim: usize, entries: Vec<Complex64>) -> Self {
        assert_eq!(entries.len(), dim * dim);
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// `max |(U†U - I)_{ij}|`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut acc = ZERO;
                for k in 0..d {
                    acc += self.get(k, i).conj() * self.get(k, j);
                }
                if i == j {
                    acc -= ONE;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// Block-diagonal `diag(I, U)`: control is the new most significant operand.
    fn controlled(&self) -> GateMatrix {
        let d = self.dim;
        let n = 2 * d;
        let mut entries = vec![ZERO; n * n];
        for i in 0..d {
            entries[i * n + i] = ONE;
            for j in 0..d {
                entries[(d + i) * n + d + j] = self.get(i, j);
            }
        }
        GateMatrix { dim: n, entries }
    }
}

fn m2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> GateMatrix {
    GateMatrix::from_rows(2, vec![a, b, c, d])
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn phase(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

fn u3(theta: f64, phi: f64, lambda: f64) -> GateMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    m2(
        real(c),
        -phase(lambda) * s,
        phase(phi) * s,
        phase(phi + lambda) * c,
    )
}

/// Matrix of a primitive gate. `params` must have `gate.num_params()` entries
/// (the frontend guarantees it).
pub fn gate_matrix(gate: GateId, params: &[f64]) -> GateMatrix {
    let p = |i: usize| params[i];
    match gate {
        GateId::U3 => u3(p(0), p(1), p(2)),
        GateId::U2 => u3(FRAC_PI_2, p(0), p(1)),
        GateId::U1 => m2(ONE, ZERO, ZERO, phase(p(0))),
        GateId::Id => m2(ONE, ZERO, ZERO, ONE),
        GateId::X => m2(ZERO, ONE, ONE, ZERO),
        GateId::Y => m2(ZERO, -I, I, ZERO),
        GateId::Z => m2(ONE, ZERO, ZERO, -ONE),
        GateId::H => {
            let h = real(FRAC_1_SQRT_2);
            m2(h, h, h, -h)
        }
        GateId::S => m2(ONE, ZERO, ZERO, I),
        GateId::Sdg => m2(ONE, ZERO, ZERO, -I),
        GateId::T => m2(ONE, ZERO, ZERO, phase(FRAC_PI_4)),
        GateId::Tdg => m2(ONE, ZERO, ZERO, phase(-FRAC_PI_4)),
        GateId::RX => {
            let (s, c) = (p(0) / 2.0).sin_cos();
            m2(real(c), -I * s, -I * s, real(c))
        }
        GateId::RY => {
            let (s, c) = (p(0) / 2.0).sin_cos();
            m2(real(c), real(-s), real(s), real(c))
        }
        GateId::RZ => m2(phase(-p(0) / 2.0), ZERO, ZERO, phase(p(0) / 2.0)),
        GateId::CX => gate_matrix(GateId::X, &[]).controlled(),
        GateId::CY => gate_matrix(GateId::Y, &[]).controlled(),
        GateId::CZ => gate_matrix(GateId::Z, &[]).controlled(),
        GateId::CH => gate_matrix(GateId::H, &[]).controlled(),
        GateId::CRZ => gate_matrix(GateId::RZ, params).controlled(),
        GateId::CU1 => gate_matrix(GateId::U1, params).controlled(),
        GateId::CU3 => gate_matrix(GateId::U3, params).controlled(),
        GateId::CCX => gate_matrix(GateId::CX, &[]).controlled(),
    }
}
