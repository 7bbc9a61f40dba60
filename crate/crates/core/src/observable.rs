//! Real-weighted Pauli-sum observables and their `observable_terms` JSON form:
//!
//! ```json
//! [{"coeff": 1.5, "pauli": ""}, {"coeff": -0.5, "pauli": "Z0 Z1"}]
//! ```
//!
//! A `pauli` string is a list of factors, each an uppercase axis letter
//! (`I`, `X`, `Y`, `Z`) followed by a decimal qubit index. Factors are
//! normally whitespace separated; `Z0Z1` is read the same as `Z0 Z1`.
//! `I` factors are dropped, so `""` and `"I0 I1"` are both identity terms.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn letter(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObservableError {
    #[error("ObservableParseError: {0}")]
    Parse(String),
    #[error("IndexError: {0}")]
    Index(String),
}

impl ObservableError {
    pub fn kind(&self) -> &'static str {
        match self {
            ObservableError::Parse(_) => "ObservableParseError",
            ObservableError::Index(_) => "IndexError",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    factors: BTreeMap<usize, Axis>,
}

impl PauliTerm {
    pub fn identity(coeff: f64) -> Self {
        Self {
            coeff,
            factors: BTreeMap::new(),
        }
    }

    /// Builds a term, rejecting repeated qubit indices.
    pub fn new(
        coeff: f64,
        factors: impl IntoIterator<Item = (usize, Axis)>,
    ) -> Result<Self, ObservableError> {
        let mut map = BTreeMap::new();
        for (q, axis) in factors {
            if map.insert(q, axis).is_some() {
                return Err(ObservableError::Parse(format!(
                    "qubit index {q} appears more than once in a term"
                )));
            }
        }
        Ok(Self { coeff, factors: map })
    }

    pub fn factors(&self) -> &BTreeMap<usize, Axis> {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.factors.keys().next_back().copied()
    }

    /// Token form, e.g. `"Z0 Z1"`; empty for the identity.
    pub fn pauli_string(&self) -> String {
        self.factors
            .iter()
            .map(|(q, a)| format!("{}{q}", a.letter()))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// `(-1)^(sum of bits at the factor indices)` for a bitstring whose
    /// character `i` is the measured value of qubit `i`, once the basis change
    /// for each factor has already been applied.
    pub fn eigenvalue(&self, bitstring: &str) -> Result<i8, ObservableError> {
        let bits = bitstring.as_bytes();
        let mut parity = 0u8;
        for &q in self.factors.keys() {
            match bits.get(q) {
                Some(b'0') => {}
                Some(b'1') => parity ^= 1,
                Some(_) => {
                    return Err(ObservableError::Parse(format!(
                        "bitstring {bitstring:?} contains a non-binary character"
                    )))
                }
                None => {
                    return Err(ObservableError::Index(format!(
                        "qubit index {q} outside bitstring of length {}",
                        bits.len()
                    )))
                }
            }
        }
        Ok(if parity == 0 { 1 } else { -1 })
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            write!(f, "{} I", self.coeff)
        } else {
            write!(f, "{} {}", self.coeff, self.pauli_string())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Observable {
    pub terms: Vec<PauliTerm>,
    pub n_qubits_hint: Option<usize>,
}

impl Observable {
    pub fn new(terms: Vec<PauliTerm>) -> Self {
        Self {
            terms,
            n_qubits_hint: None,
        }
    }

    /// Smallest register size that covers every factor index.
    pub fn min_qubits(&self) -> usize {
        self.terms
            .iter()
            .filter_map(PauliTerm::max_index)
            .max()
            .map_or(0, |m| m + 1)
    }

    /// Concatenates term lists (no merging of equal Pauli strings).
    pub fn sum(&self, other: &Observable) -> Observable {
        Observable::new(self.terms.iter().chain(&other.terms).cloned().collect())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|t| json!({"coeff": t.coeff, "pauli": t.pauli_string()}))
                .collect(),
        )
    }
}

/// Parses the `observable_terms` JSON array.
pub fn parse_observable_terms(value: &Value) -> Result<Observable, ObservableError> {
    let items = value
        .as_array()
        .ok_or_else(|| ObservableError::Parse("observable_terms must be a JSON array".into()))?;
    let mut terms = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let obj = item
            .as_object()
            .ok_or_else(|| ObservableError::Parse(format!("term {i} is not an object")))?;
        let coeff = match obj.get("coeff") {
            Some(Value::Number(n)) => n.as_f64().filter(|c| c.is_finite()).ok_or_else(|| {
                ObservableError::Parse(format!("term {i}: coeff is not a finite real"))
            })?,
            Some(_) => {
                return Err(ObservableError::Parse(format!(
                    "term {i}: coeff must be a real number"
                )))
            }
            None => return Err(ObservableError::Parse(format!("term {i}: missing coeff"))),
        };
        let pauli = match obj.get("pauli") {
            Some(Value::String(s)) => s,
            Some(_) => {
                return Err(ObservableError::Parse(format!("term {i}: pauli must be a string")))
            }
            None => return Err(ObservableError::Parse(format!("term {i}: missing pauli"))),
        };
        let factors = parse_pauli(pauli).map_err(|e| ObservableError::Parse(format!("term {i}: {e}")))?;
        let term = PauliTerm::new(coeff, factors).map_err(|e| match e {
            ObservableError::Parse(msg) => ObservableError::Parse(format!("term {i}: {msg}")),
            other => other,
        })?;
        terms.push(term);
    }
    Ok(Observable::new(terms))
}

fn parse_pauli(text: &str) -> Result<Vec<(usize, Axis)>, String> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut chars = text.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let Some(letter) = chars.next() else { break };
        let axis = match letter {
            'I' => None,
            'X' => Some(Axis::X),
            'Y' => Some(Axis::Y),
            'Z' => Some(Axis::Z),
            other => return Err(format!("invalid Pauli letter {other:?} in {text:?}")),
        };
        let mut digits = String::new();
        while let Some(d) = chars.peek().copied().filter(char::is_ascii_digit) {
            digits.push(d);
            chars.next();
        }
        if digits.is_empty() {
            return Err(format!("Pauli letter {letter:?} has no qubit index in {text:?}"));
        }
        let index: usize = digits
            .parse()
            .map_err(|_| format!("qubit index {digits} out of range"))?;
        // I-factors still count towards duplicate detection.
        if !seen.insert(index) {
            return Err(format!("qubit index {index} appears more than once in a term"));
        }
        if let Some(axis) = axis {
            out.push((index, axis));
        }
    }
    Ok(out)
}
