use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;
use tracing::warn;

use super::record::{Backend, JobError, JobId, JobRecord, JobRequest, JobStatus};

/// One line of a job's event file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum JobEvent {
    Submitted {
        id: JobId,
        tool: String,
        payload: JobRequest,
        backend: Backend,
        at: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        remote_ref: Option<String>,
    },
    Running {
        at: f64,
    },
    Completed {
        at: f64,
        result: Value,
    },
    Failed {
        at: f64,
        error: JobError,
    },
}

impl JobEvent {
    pub fn status(&self) -> JobStatus {
        match self {
            JobEvent::Submitted { .. } => JobStatus::Queued,
            JobEvent::Running { .. } => JobStatus::Running,
            JobEvent::Completed { .. } => JobStatus::Completed,
            JobEvent::Failed { .. } => JobStatus::Failed,
        }
    }
}

/// A status change as observed by the store.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub id: JobId,
    pub from: Option<JobStatus>,
    pub to: JobStatus,
    pub at: f64,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("job {0} already exists")]
    Duplicate(JobId),
    #[error("unknown job {0}")]
    Unknown(JobId),
    #[error("job {id}: illegal transition {from} -> {to}")]
    IllegalTransition {
        id: JobId,
        from: JobStatus,
        to: JobStatus,
    },
    #[error("job {0}: the first event must be `submitted`")]
    NotSubmitted(JobId),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Job records folded from append-only event logs, optionally mirrored to
/// `<state_dir>/jobs/<job_id>.jsonl`.
#[derive(Debug, Default)]
pub struct JobStore {
    dir: Option<PathBuf>,
    records: BTreeMap<JobId, JobRecord>,
    history: Vec<Transition>,
}

impl JobStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (creating if needed) the store under `state_dir` and replays
    /// every event file found there.
    pub fn open(state_dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        let dir = state_dir.as_ref().join("jobs");
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let mut store = JobStore {
            dir: None,
            ..Default::default()
        };

        let mut files: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(io_err(&dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        files.sort();
        for path in files {
            let file = File::open(&path).map_err(io_err(&path))?;
            for (n, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(io_err(&path))?;
                if line.trim().is_empty() {
                    continue;
                }
                let event: JobEvent = match serde_json::from_str(&line) {
                    Ok(e) => e,
                    Err(e) => {
                        warn!("{}:{}: skipping unreadable event: {e}", path.display(), n + 1);
                        continue;
                    }
                };
                let id = match &event {
                    JobEvent::Submitted { id, .. } => id.clone(),
                    _ => JobId(
                        path.file_stem()
                            .map(|s| s.to_string_lossy().into_owned())
                            .unwrap_or_default(),
                    ),
                };
                if let Err(e) = store.apply(&id, event) {
                    warn!("{}:{}: {e}", path.display(), n + 1);
                }
            }
        }
        store.history.clear();
        store.dir = Some(dir);
        Ok(store)
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn get(&self, id: &JobId) -> Option<&JobRecord> {
        self.records.get(id)
    }

    pub fn records(&self) -> impl Iterator<Item = &JobRecord> {
        self.records.values()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Every transition applied since this store was opened.
    pub fn history(&self) -> &[Transition] {
        &self.history
    }

    /// Validates `event` against the job's current status, applies it, and
    /// appends it to the job's file when persistent.
    pub fn record(&mut self, id: &JobId, event: JobEvent) -> Result<(), StoreError> {
        self.check(id, &event)?;
        if let Some(dir) = &self.dir {
            let path = dir.join(format!("{id}.jsonl"));
            let mut line = serde_json::to_string(&event).expect("events serialize");
            line.push('\n');
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&path)
                .map_err(io_err(&path))?;
            file.write_all(line.as_bytes()).map_err(io_err(&path))?;
        }
        self.apply(id, event)
    }

    fn check(&self, id: &JobId, event: &JobEvent) -> Result<(), StoreError> {
        match (self.records.get(id), event) {
            (Some(_), JobEvent::Submitted { .. }) => Err(StoreError::Duplicate(id.clone())),
            (None, JobEvent::Submitted { .. }) => Ok(()),
            (None, _) => Err(StoreError::Unknown(id.clone())),
            (Some(r), e) if r.status.can_transition_to(e.status()) => Ok(()),
            (Some(r), e) => Err(StoreError::IllegalTransition {
                id: id.clone(),
                from: r.status,
                to: e.status(),
            }),
        }
    }

    fn apply(&mut self, id: &JobId, event: JobEvent) -> Result<(), StoreError> {
        self.check(id, &event)?;
        let from = self.records.get(id).map(|r| r.status);
        let to = event.status();
        let at = match event {
            JobEvent::Submitted {
                id: ref sid,
                tool,
                payload,
                backend,
                at,
                remote_ref,
            } => {
                if sid != id {
                    return Err(StoreError::NotSubmitted(id.clone()));
                }
                self.records.insert(
                    id.clone(),
                    JobRecord {
                        id: id.clone(),
                        tool,
                        payload,
                        backend,
                        status: JobStatus::Queued,
                        submitted_at: at,
                        started_at: None,
                        finished_at: None,
                        result: None,
                        error: None,
                        remote_ref,
                    },
                );
                at
            }
            JobEvent::Running { at } => {
                let r = self.records.get_mut(id).expect("checked");
                r.status = JobStatus::Running;
                r.started_at = Some(at);
                at
            }
            JobEvent::Completed { at, result } => {
                let r = self.records.get_mut(id).expect("checked");
                r.status = JobStatus::Completed;
                r.finished_at = Some(at);
                r.result = Some(result);
                at
            }
            JobEvent::Failed { at, error } => {
                let r = self.records.get_mut(id).expect("checked");
                r.status = JobStatus::Failed;
                r.finished_at = Some(at);
                r.error = Some(error);
                at
            }
        };
        self.history.push(Transition {
            id: id.clone(),
            from,
            to,
            at,
        });
        Ok(())
    }
}
