use std::fmt;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use qex_core::qasm::QasmError;
use qex_core::{ObservableError, SimError};

/// Opaque, time-ordered job identifier (UUIDv7 text).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JobId(pub String);

impl JobId {
    pub fn generate() -> Self {
        JobId(uuid::Uuid::now_v7().to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Running,
    Completed,
    Failed,
}

impl JobStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            JobStatus::Queued => "queued",
            JobStatus::Running => "running",
            JobStatus::Completed => "completed",
            JobStatus::Failed => "failed",
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, JobStatus::Completed | JobStatus::Failed)
    }

    /// queued → running → {completed | failed}; nothing else.
    pub fn can_transition_to(self, next: JobStatus) -> bool {
        matches!(
            (self, next),
            (JobStatus::Queued, JobStatus::Running)
                | (JobStatus::Running, JobStatus::Completed)
                | (JobStatus::Running, JobStatus::Failed)
        )
    }
}

impl fmt::Display for JobStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Inline,
    QueuedLocal,
    Remote,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Inline => "inline",
            Backend::QueuedLocal => "queued-local",
            Backend::Remote => "remote",
        }
    }

    pub fn parse(s: &str) -> Option<Backend> {
        match s {
            "inline" => Some(Backend::Inline),
            "queued-local" => Some(Backend::QueuedLocal),
            "remote" => Some(Backend::Remote),
            _ => None,
        }
    }
}

/// Validated execution request. Seeds are resolved before the job is stored
/// so every record can be replayed exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JobRequest {
    Sample {
        openqasm_code: String,
        shots: i64,
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        machine: Option<String>,
    },
    Estimate {
        openqasm_code: String,
        observable_terms: Value,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shots: Option<i64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl JobRequest {
    pub fn openqasm_code(&self) -> &str {
        match self {
            JobRequest::Sample { openqasm_code, .. } | JobRequest::Estimate { openqasm_code, .. } => {
                openqasm_code
            }
        }
    }
}

/// Structured failure reported to tool callers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobError {
    pub kind: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Box<Value>>,
}

impl JobError {
    pub fn new(kind: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            kind: kind.into(),
            message: message.into(),
            line: None,
            column: None,
            details: None,
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = Some(Box::new(details));
        self
    }

    /// `{"error": {...}}`, the body of an is_error tool result.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("error".into(), serde_json::to_value(self).expect("serializable"));
        Value::Object(m)
    }
}

impl fmt::Display for JobError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<&QasmError> for JobError {
    fn from(e: &QasmError) -> Self {
        JobError {
            kind: e.kind.as_str().to_string(),
            message: e.message.clone(),
            line: Some(e.loc.line),
            column: Some(e.loc.column),
            details: None,
        }
    }
}

impl From<QasmError> for JobError {
    fn from(e: QasmError) -> Self {
        JobError::from(&e)
    }
}

impl From<SimError> for JobError {
    fn from(e: SimError) -> Self {
        JobError::new(e.kind(), e.to_string())
    }
}

impl From<ObservableError> for JobError {
    fn from(e: ObservableError) -> Self {
        let message = match &e {
            ObservableError::Parse(m) | ObservableError::Index(m) => m.clone(),
        };
        JobError::new(e.kind(), message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: JobId,
    pub tool: String,
    pub payload: JobRequest,
    pub backend: Backend,
    pub status: JobStatus,
    pub submitted_at: f64,
    pub started_at: Option<f64>,
    pub finished_at: Option<f64>,
    pub result: Option<Value>,
    pub error: Option<JobError>,
    pub remote_ref: Option<String>,
}

/// What `list_jobs` reports: lifecycle metadata only, never result payloads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSummary {
    pub id: JobId,
    pub tool: String,
    pub backend: Backend,
    pub status: JobStatus,
    pub submitted_at: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub started_at: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub remote_ref: Option<String>,
}

impl From<&JobRecord> for JobSummary {
    fn from(r: &JobRecord) -> Self {
        JobSummary {
            id: r.id.clone(),
            tool: r.tool.clone(),
            backend: r.backend,
            status: r.status,
            submitted_at: r.submitted_at,
            started_at: r.started_at,
            finished_at: r.finished_at,
            remote_ref: r.remote_ref.clone(),
        }
    }
}

pub fn now_secs() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transitions() {
        use JobStatus::*;
        let all = [Queued, Running, Completed, Failed];
        let allowed: Vec<_> = all
            .iter()
            .flat_map(|a| all.iter().map(move |b| (*a, *b)))
            .filter(|(a, b)| a.can_transition_to(*b))
            .collect();
        assert_eq!(
            allowed,
            vec![(Queued, Running), (Running, Completed), (Running, Failed)]
        );
    }

    #[test]
    fn ids_are_time_ordered() {
        let a = JobId::generate();
        std::thread::sleep(std::time::Duration::from_millis(2));
        let b = JobId::generate();
        assert!(a < b);
    }

    #[test]
    fn wire_names() {
        assert_eq!(serde_json::to_value(Backend::QueuedLocal).unwrap(), "queued-local");
        assert_eq!(serde_json::to_value(JobStatus::Running).unwrap(), "running");
    }
}
