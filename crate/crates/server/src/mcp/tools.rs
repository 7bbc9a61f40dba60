use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use qex_core::sim::fresh_seed;

use crate::jobs::{Backend, Fetched, JobError, JobId, JobRequest, JobStatus, Orchestrator};
use crate::remote::api::DEFAULT_MACHINE;

pub const SAMPLER: &str = "sampler_qasm_sim";
pub const ESTIMATOR: &str = "estimator_qasm_sim";
pub const REMOTE_SAMPLER: &str = "sampler_qasm_remote";
pub const REMOTE_RESULT: &str = "get_remote_result";

/// Alternative names accepted by `tools/call`.
pub const ALIASES: [(&str, &str); 4] = [
    ("sampler_qasm_cudaq", SAMPLER),
    ("estimator_qasm_cudaq", ESTIMATOR),
    ("sampler_qasm_quantinuum", REMOTE_SAMPLER),
    ("get_quantinuum_result", REMOTE_RESULT),
];

pub fn canonical_name(name: &str) -> Option<&'static str> {
    [SAMPLER, ESTIMATOR, REMOTE_SAMPLER, REMOTE_RESULT]
        .into_iter()
        .find(|n| *n == name)
        .or_else(|| ALIASES.iter().find(|(a, _)| *a == name).map(|(_, n)| *n))
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolDescriptor {
    pub name: &'static str,
    pub description: &'static str,
    #[serde(rename = "inputSchema")]
    pub input_schema: Value,
    /// A payload the schema accepts, used in documentation and tests.
    #[serde(skip)]
    pub example: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TextContent {
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub text: String,
}

/// MCP `tools/call` result: a single text item holding a JSON document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolResult {
    pub content: Vec<TextContent>,
    #[serde(rename = "isError")]
    pub is_error: bool,
}

impl ToolResult {
    fn text(doc: &Value, is_error: bool) -> Self {
        Self {
            content: vec![TextContent {
                kind: "text",
                text: serde_json::to_string_pretty(doc).expect("values serialize"),
            }],
            is_error,
        }
    }

    pub fn success(doc: &Value) -> Self {
        Self::text(doc, false)
    }

    pub fn error(err: &JobError) -> Self {
        Self::text(&err.to_json(), true)
    }

    /// The embedded JSON document.
    pub fn document(&self) -> Value {
        self.content
            .first()
            .and_then(|c| serde_json::from_str(&c.text).ok())
            .unwrap_or(Value::Null)
    }
}

/// Protocol-level failures of `tools/call` (as opposed to in-band tool errors).
#[derive(Debug, Error, PartialEq)]
pub enum CallError {
    #[error("unknown tool {0:?}")]
    UnknownTool(String),
    #[error("invalid arguments for {tool}: {}", errors.join("; "))]
    InvalidArguments { tool: &'static str, errors: Vec<String> },
}

const SEED_SCHEMA_MAX: u64 = u64::MAX;

fn code_schema() -> Value {
    json!({
        "type": "string",
        "description": "OpenQASM 2.0 program text"
    })
}

fn seed_schema() -> Value {
    json!({
        "type": "integer",
        "minimum": 0,
        "maximum": SEED_SCHEMA_MAX,
        "description": "Sampler seed; chosen at random and echoed when omitted"
    })
}

fn backend_schema() -> Value {
    json!({
        "type": "string",
        "enum": ["inline", "queued-local"],
        "default": "inline",
        "description": "Run immediately, or through the simulated batch scheduler"
    })
}

const GHZ_EXAMPLE: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\ncreg c[3];\nh q[0];\ncx q[0],q[1];\ncx q[0],q[2];\nmeasure q -> c;\n";

pub fn descriptors() -> Vec<ToolDescriptor> {
    vec![
        ToolDescriptor {
            name: SAMPLER,
            description: "Sample measurement outcomes of an OpenQASM 2.0 circuit on the local state-vector engine. \
                Returns counts and probabilities keyed by classical bitstring (c[0] leftmost).",
            input_schema: json!({
                "type": "object",
                "properties": {
                    "openqasm_code": code_schema(),
                    "shots": {"type": "integer", "description": "Number of measurement shots"},
                    "seed": seed_schema(),
                    "backend": backend_schema()
                },
                "required": ["openqasm_code", "shots"],
                "additionalProperties": false
            }),
            example: json!({"openqasm_code": GHZ_EXAMPLE, "shots": 2000, "seed": 7}),
        },
        ToolDescriptor {
            name: ESTIMATOR,
            description: "Expectation value of a Pauli-sum observable for the state prepared by an OpenQASM 2.0 circuit. \
                With shots null or absent the value is exact; otherwise it is estimated from samples with a standard error.",
            input_schema: json!({
                "type": "object",
                "properties": {
                    "openqasm_code": code_schema(),
                    "observable_terms": {
                        "type": "array",
                        "description": "Terms such as {\"coeff\": -0.5, \"pauli\": \"Z0 Z1\"}; an empty pauli string is the identity",
                        "items": {
                            "type": "object",
                            "properties": {
                                "coeff": {"type": "number"},
                                "pauli": {"type": "string"}
                            },
                            "required": ["coeff", "pauli"]
                        }
                    },
                    "shots": {"type": ["integer", "null"], "description": "null for the exact value"},
                    "seed": seed_schema(),
                    "backend": backend_schema()
                },
                "required": ["openqasm_code", "observable_terms"],
                "additionalProperties": false
            }),
            example: json!({
                "openqasm_code": "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\nh q[0];\ncx q[0],q[1];\n",
                "observable_terms": [{"coeff": 1.5, "pauli": ""}, {"coeff": -0.5, "pauli": "Z0 Z1"}],
                "shots": null
            }),
        },
        ToolDescriptor {
            name: REMOTE_SAMPLER,
            description: "Submit a sampling job to the remote queue service. Returns a job id immediately; \
                retrieve the counts later with get_remote_result.",
            input_schema: json!({
                "type": "object",
                "properties": {
                    "openqasm_code": code_schema(),
                    "shots": {"type": "integer", "description": "Number of measurement shots"},
                    "machine": {"type": "string", "description": "Target machine label", "default": DEFAULT_MACHINE},
                    "seed": seed_schema()
                },
                "required": ["openqasm_code", "shots"],
                "additionalProperties": false
            }),
            example: json!({"openqasm_code": GHZ_EXAMPLE, "shots": 100, "machine": DEFAULT_MACHINE}),
        },
        ToolDescriptor {
            name: REMOTE_RESULT,
            description: "Fetch the outcome of a submitted job. Pending jobs report their status and should be retried.",
            input_schema: json!({
                "type": "object",
                "properties": {
                    "job_id": {"type": "string", "description": "Id returned at submission"}
                },
                "required": ["job_id"],
                "additionalProperties": false
            }),
            example: json!({"job_id": "0199e7a2-7c1e-7000-8000-000000000000"}),
        },
    ]
}

/// Reads an integer argument, accepting integral floats such as `2000.0`.
fn integer(v: &Value) -> Option<i64> {
    v.as_i64().or_else(|| {
        let f = v.as_f64()?;
        (f.fract() == 0.0).then(|| f.clamp(i64::MIN as f64, i64::MAX as f64) as i64)
    })
}

fn seed_arg(args: &Map<String, Value>) -> Result<Option<u64>, JobError> {
    match args.get("seed") {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .or_else(|| v.as_f64().filter(|f| f.fract() == 0.0 && *f >= 0.0 && *f < 1.8446744073709552e19).map(|f| f as u64))
            .map(Some)
            .ok_or_else(|| JobError::new("InvalidArgumentError", format!("seed {v} is not representable"))),
    }
}

fn str_arg<'a>(args: &'a Map<String, Value>, key: &str) -> &'a str {
    args.get(key).and_then(Value::as_str).unwrap_or_default()
}

fn shots_arg(args: &Map<String, Value>) -> Option<i64> {
    args.get("shots").and_then(integer)
}

fn backend_arg(args: &Map<String, Value>) -> Backend {
    match args.get("backend").and_then(Value::as_str) {
        Some("queued-local") => Backend::QueuedLocal,
        _ => Backend::Inline,
    }
}

/// Schema-checked dispatch of tool calls onto an [`Orchestrator`].
pub struct Toolbox {
    orchestrator: Orchestrator,
    descriptors: Vec<ToolDescriptor>,
    validators: Vec<jsonschema::Validator>,
    local_wait: Duration,
}

impl Toolbox {
    pub fn new(orchestrator: Orchestrator) -> Self {
        let descriptors = descriptors();
        let validators = descriptors
            .iter()
            .map(|d| jsonschema::validator_for(&d.input_schema).expect("tool schemas are valid"))
            .collect();
        Self {
            orchestrator,
            descriptors,
            validators,
            local_wait: Duration::from_secs(30),
        }
    }

    /// How long a queued-local call waits before answering with a pending status.
    pub fn with_local_wait(mut self, wait: Duration) -> Self {
        self.local_wait = wait;
        self
    }

    pub fn orchestrator(&self) -> &Orchestrator {
        &self.orchestrator
    }

    pub fn descriptors(&self) -> &[ToolDescriptor] {
        &self.descriptors
    }

    pub fn validate(&self, tool: &'static str, args: &Value) -> Result<(), CallError> {
        let i = self
            .descriptors
            .iter()
            .position(|d| d.name == tool)
            .expect("canonical tool names have descriptors");
        let errors: Vec<String> = self.validators[i]
            .iter_errors(args)
            .map(|e| {
                let path = e.instance_path().to_string();
                if path.is_empty() {
                    e.to_string()
                } else {
                    format!("{path}: {e}")
                }
            })
            .collect();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(CallError::InvalidArguments { tool, errors })
        }
    }

    pub fn call(&self, name: &str, args: &Value) -> Result<ToolResult, CallError> {
        let tool = canonical_name(name).ok_or_else(|| CallError::UnknownTool(name.to_string()))?;
        self.validate(tool, args)?;
        let args = args.as_object().expect("schema requires an object");
        let outcome = match tool {
            SAMPLER => self.sample(args),
            ESTIMATOR => self.estimate(args),
            REMOTE_SAMPLER => self.submit_remote(args),
            _ => self.remote_result(args),
        };
        Ok(match outcome {
            Ok(doc) => ToolResult::success(&doc),
            Err(e) => ToolResult::error(&e),
        })
    }

    fn run_local(&self, tool: &str, request: JobRequest, backend: Backend) -> Result<Value, JobError> {
        let id = self.orchestrator.submit(tool, request, backend)?;
        if backend != Backend::Inline {
            self.orchestrator.wait(&id, Some(self.local_wait))?;
        }
        match self.orchestrator.fetch_result(&id)? {
            Fetched::Completed(doc) => Ok(doc),
            Fetched::Failed(e) => Err(e),
            Fetched::Pending(status) => Ok(pending(&id, status)),
        }
    }

    fn sample(&self, args: &Map<String, Value>) -> Result<Value, JobError> {
        let request = JobRequest::Sample {
            openqasm_code: str_arg(args, "openqasm_code").to_string(),
            shots: shots_arg(args).unwrap_or(0),
            seed: seed_arg(args)?.unwrap_or_else(fresh_seed),
            machine: None,
        };
        self.run_local(SAMPLER, request, backend_arg(args))
    }

    fn estimate(&self, args: &Map<String, Value>) -> Result<Value, JobError> {
        let shots = shots_arg(args);
        let seed = seed_arg(args)?;
        let request = JobRequest::Estimate {
            openqasm_code: str_arg(args, "openqasm_code").to_string(),
            observable_terms: args.get("observable_terms").cloned().unwrap_or(json!([])),
            shots,
            seed: shots.map(|_| seed.unwrap_or_else(fresh_seed)),
        };
        self.run_local(ESTIMATOR, request, backend_arg(args))
    }

    fn submit_remote(&self, args: &Map<String, Value>) -> Result<Value, JobError> {
        let machine = args
            .get("machine")
            .and_then(Value::as_str)
            .unwrap_or(DEFAULT_MACHINE)
            .to_string();
        let request = JobRequest::Sample {
            openqasm_code: str_arg(args, "openqasm_code").to_string(),
            shots: shots_arg(args).unwrap_or(0),
            seed: seed_arg(args)?.unwrap_or_else(fresh_seed),
            machine: Some(machine.clone()),
        };
        let id = self.orchestrator.submit(REMOTE_SAMPLER, request, Backend::Remote)?;
        Ok(json!({"job_id": id, "status": JobStatus::Queued, "machine": machine}))
    }

    fn remote_result(&self, args: &Map<String, Value>) -> Result<Value, JobError> {
        let id = JobId(str_arg(args, "job_id").to_string());
        match self.orchestrator.fetch_result(&id)? {
            Fetched::Completed(doc) => {
                let mut out = Map::new();
                out.insert("job_id".into(), json!(id));
                out.insert("status".into(), json!(JobStatus::Completed));
                if let Value::Object(fields) = doc {
                    out.extend(fields);
                }
                Ok(Value::Object(out))
            }
            Fetched::Pending(status) => Ok(pending(&id, status)),
            Fetched::Failed(e) => Err(e),
        }
    }
}

fn pending(id: &JobId, status: JobStatus) -> Value {
    json!({"job_id": id, "status": status})
}
