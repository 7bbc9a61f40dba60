//! Core of the quantum execution server: an OpenQASM 2.0 frontend, a dense
//! state-vector engine and Pauli-sum observables.
//!
//! ```
//! use qex_core::{qasm, sim::Engine};
//!
//! let circuit = qasm::compile(
//!     "qreg q[2]; creg c[2]; h q[0]; cx q[0], q[1]; measure q -> c;",
//! ).unwrap();
//! let result = Engine::default().sample(&circuit, 100, Some(7)).unwrap();
//! assert_eq!(result.counts.total(), 100);
//! ```

pub mod circuit;
pub mod observable;
pub mod qasm;
pub mod sim;

pub use circuit::{Circuit, GateId, Op};
pub use observable::{parse_observable_terms, Axis, Observable, ObservableError, PauliTerm};
pub use sim::{Counts, Engine, SimError};
