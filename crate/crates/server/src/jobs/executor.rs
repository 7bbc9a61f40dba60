use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use qex_core::qasm::compile;
use qex_core::{parse_observable_terms, Engine};

use super::record::{JobError, JobRequest};

/// Upper bound on shots for a single request.
pub const MAX_SHOTS: i64 = 100_000_000;

/// Rounds to 6 significant digits.
pub fn round_sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

pub fn probabilities(counts: &BTreeMap<String, u64>, shots: u64) -> Map<String, Value> {
    counts
        .iter()
        .map(|(k, &n)| (k.clone(), json!(round_sig6(n as f64 / shots as f64))))
        .collect()
}

pub fn check_shots(shots: i64) -> Result<u64, JobError> {
    if shots < 1 {
        Err(JobError::new(
            "InvalidShotsError",
            format!("shots must be a positive integer, got {shots}"),
        ))
    } else if shots > MAX_SHOTS {
        Err(JobError::new(
            "InvalidShotsError",
            format!("shots must not exceed {MAX_SHOTS}, got {shots}"),
        ))
    } else {
        Ok(shots as u64)
    }
}

/// Runs a request on the local engine and renders the tool result document.
pub fn execute(engine: &Engine, request: &JobRequest) -> Result<Value, JobError> {
    match request {
        JobRequest::Sample {
            openqasm_code,
            shots,
            seed,
            ..
        } => {
            let shots = check_shots(*shots)?;
            let circuit = compile(openqasm_code)?;
            let sampled = engine.sample(&circuit, shots, Some(*seed))?;
            let probs = probabilities(&sampled.counts.counts, shots);
            Ok(json!({
                "openqasm_code": openqasm_code,
                "shots": shots,
                "counts": sampled.counts.counts,
                "probabilities": probs,
                "seed": sampled.seed,
            }))
        }
        JobRequest::Estimate {
            openqasm_code,
            observable_terms,
            shots,
            seed,
        } => {
            let shots = shots.map(check_shots).transpose()?;
            let circuit = compile(openqasm_code)?;
            let observable = parse_observable_terms(observable_terms)?;
            match shots {
                None => Ok(json!({ "expectation": engine.expectation(&circuit, &observable)? })),
                Some(shots) => {
                    let r = engine.expectation_sampled(&circuit, &observable, shots, *seed)?;
                    Ok(json!({
                        "expectation": r.value,
                        "shots": r.shots,
                        "std_error": r.std_error,
                        "seed": r.seed,
                    }))
                }
            }
        }
    }
}
