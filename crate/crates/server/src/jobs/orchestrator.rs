use std::collections::HashMap;
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::thread;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};
use tracing::{debug, warn};

use qex_core::Engine;

use super::config::{ConfigError, OrchestratorConfig, QueuedLocalConfig};
use super::executor::{execute, probabilities};
use super::record::{now_secs, Backend, JobError, JobId, JobRecord, JobRequest, JobStatus, JobSummary};
use super::store::{JobEvent, JobStore, StoreError, Transition};
use crate::remote::api::{SubmitRequest, DEFAULT_MACHINE};
use crate::remote::RemoteClient;

/// Hands a ready-to-run job to whatever stands in for the batch system.
///
/// The default [`DelayScheduler`] sleeps for the configured delay on a
/// worker thread; an adapter for a real batch queue would submit a script
/// that eventually calls `task`.
pub trait Scheduler: Send + Sync {
    fn dispatch(&self, id: &JobId, task: Box<dyn FnOnce() + Send + 'static>);
}

/// Simulated scheduler: `scheduler_delay ± jitter` seconds, then run.
pub struct DelayScheduler {
    delay: f64,
    jitter: f64,
    rng: Mutex<ChaCha20Rng>,
}

impl DelayScheduler {
    pub fn new(config: &QueuedLocalConfig) -> Self {
        let rng = match config.seed {
            Some(s) => ChaCha20Rng::seed_from_u64(s),
            None => ChaCha20Rng::from_os_rng(),
        };
        Self {
            delay: config.scheduler_delay,
            jitter: config.jitter,
            rng: Mutex::new(rng),
        }
    }

    fn draw(&self) -> Duration {
        let offset = if self.jitter > 0.0 {
            self.rng.lock().unwrap().random_range(-self.jitter..=self.jitter)
        } else {
            0.0
        };
        Duration::from_secs_f64((self.delay + offset).max(0.0))
    }
}

impl Scheduler for DelayScheduler {
    fn dispatch(&self, id: &JobId, task: Box<dyn FnOnce() + Send + 'static>) {
        let wait = self.draw();
        debug!(job = %id, ?wait, "scheduling queued-local job");
        thread::Builder::new()
            .name(format!("job-{id}"))
            .spawn(move || {
                if !wait.is_zero() {
                    thread::sleep(wait);
                }
                task();
            })
            .expect("spawn job thread");
    }
}

/// Outcome of [`Orchestrator::fetch_result`].
#[derive(Debug, Clone, PartialEq)]
pub enum Fetched {
    Completed(Value),
    Pending(JobStatus),
    Failed(JobError),
}

struct State {
    store: JobStore,
    last_polled: HashMap<JobId, Instant>,
}

struct Inner {
    engine: Engine,
    config: OrchestratorConfig,
    scheduler: Box<dyn Scheduler>,
    remote: Option<RemoteClient>,
    state: Mutex<State>,
    changed: Condvar,
}

/// Job lifecycle owner; cheap to clone and safe to share across threads.
#[derive(Clone)]
pub struct Orchestrator {
    inner: Arc<Inner>,
}

fn unknown(id: &JobId) -> JobError {
    JobError::new("UnknownJobError", format!("no job with id {:?}", id.as_str()))
}

fn store_error(e: StoreError) -> JobError {
    JobError::new("StoreError", e.to_string())
}

impl Orchestrator {
    pub fn new(config: OrchestratorConfig, store: JobStore) -> Result<Self, ConfigError> {
        let scheduler = Box::new(DelayScheduler::new(&config.backends.queued_local));
        Self::with_scheduler(config, store, scheduler)
    }

    pub fn with_scheduler(
        config: OrchestratorConfig,
        store: JobStore,
        scheduler: Box<dyn Scheduler>,
    ) -> Result<Self, ConfigError> {
        config.backends.validate()?;
        let remote = config.backends.remote.base_url.as_deref().and_then(|url| {
            RemoteClient::new(url, config.backends.remote.timeout())
                .map_err(|e| warn!("remote client disabled: {e}"))
                .ok()
        });
        Ok(Self {
            inner: Arc::new(Inner {
                engine: Engine::with_max_qubits(config.max_qubits),
                config,
                scheduler,
                remote,
                state: Mutex::new(State {
                    store,
                    last_polled: HashMap::new(),
                }),
                changed: Condvar::new(),
            }),
        })
    }

    pub fn in_memory() -> Self {
        Self::new(OrchestratorConfig::default(), JobStore::in_memory()).expect("default config is valid")
    }

    pub fn config(&self) -> &OrchestratorConfig {
        &self.inner.config
    }

    pub fn engine(&self) -> &Engine {
        &self.inner.engine
    }

    fn lock(&self) -> MutexGuard<'_, State> {
        self.inner.state.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn record(&self, id: &JobId, event: JobEvent) -> Result<(), JobError> {
        let mut state = self.lock();
        let r = state.store.record(id, event).map_err(store_error);
        drop(state);
        self.inner.changed.notify_all();
        r
    }

    /// Creates a job and dispatches it. Inline jobs are finished on return;
    /// remote submission errors are returned without creating a record.
    pub fn submit(&self, tool: &str, payload: JobRequest, backend: Backend) -> Result<JobId, JobError> {
        let id = JobId::generate();
        let remote_ref = match backend {
            Backend::Remote => Some(self.submit_remote(&payload)?),
            _ => None,
        };
        self.record(
            &id,
            JobEvent::Submitted {
                id: id.clone(),
                tool: tool.to_string(),
                payload: payload.clone(),
                backend,
                at: now_secs(),
                remote_ref,
            },
        )?;
        match backend {
            Backend::Inline => self.run_local(&id, &payload),
            Backend::QueuedLocal => {
                let this = self.clone();
                let task_id = id.clone();
                self.inner
                    .scheduler
                    .dispatch(&id, Box::new(move || this.run_local(&task_id, &payload)));
            }
            Backend::Remote => {
                self.lock().last_polled.insert(id.clone(), Instant::now());
            }
        }
        Ok(id)
    }

    fn remote(&self) -> Result<&RemoteClient, JobError> {
        self.inner.remote.as_ref().ok_or_else(|| {
            JobError::new(
                "BackendUnavailableError",
                "no remote service configured (set the remote base URL)",
            )
        })
    }

    fn submit_remote(&self, payload: &JobRequest) -> Result<String, JobError> {
        let JobRequest::Sample {
            openqasm_code,
            shots,
            seed,
            machine,
        } = payload
        else {
            return Err(JobError::new(
                "UnsupportedBackendError",
                "the remote backend only runs sampling jobs",
            ));
        };
        let request = SubmitRequest {
            qasm: openqasm_code.clone(),
            shots: *shots,
            machine: Some(machine.clone().unwrap_or_else(|| DEFAULT_MACHINE.to_string())),
            seed: Some(*seed),
        };
        Ok(self.remote()?.submit(&request)?.job_id)
    }

    fn run_local(&self, id: &JobId, payload: &JobRequest) {
        if let Err(e) = self.record(id, JobEvent::Running { at: now_secs() }) {
            warn!("job {id}: {e}");
            return;
        }
        let event = match execute(&self.inner.engine, payload) {
            Ok(result) => JobEvent::Completed {
                at: now_secs(),
                result,
            },
            Err(error) => JobEvent::Failed {
                at: now_secs(),
                error,
            },
        };
        if let Err(e) = self.record(id, event) {
            warn!("job {id}: {e}");
        }
    }

    pub fn get(&self, id: &JobId) -> Option<JobRecord> {
        self.lock().store.get(id).cloned()
    }

    /// Current status; remote jobs are refreshed from the service at most
    /// once per poll interval.
    pub fn poll(&self, id: &JobId) -> Result<JobStatus, JobError> {
        let (backend, status, remote_ref) = {
            let state = self.lock();
            let r = state.store.get(id).ok_or_else(|| unknown(id))?;
            (r.backend, r.status, r.remote_ref.clone())
        };
        match (backend, remote_ref) {
            (Backend::Remote, Some(remote_ref)) if !status.is_terminal() => {
                self.refresh_remote(id, &remote_ref);
                Ok(self.get(id).map(|r| r.status).unwrap_or(status))
            }
            _ => Ok(status),
        }
    }

    fn refresh_remote(&self, id: &JobId, remote_ref: &str) {
        let interval = self.inner.config.backends.remote.poll_interval();
        {
            let mut state = self.lock();
            if let Some(t) = state.last_polled.get(id) {
                if t.elapsed() < interval {
                    return;
                }
            }
            state.last_polled.insert(id.clone(), Instant::now());
        }
        let Ok(client) = self.remote() else {
            return;
        };
        let remote_status = match client.status(remote_ref) {
            Ok(s) => s,
            Err(e) => {
                warn!("job {id}: status refresh failed: {e}");
                return;
            }
        };
        let finished = match remote_status {
            JobStatus::Queued => return,
            JobStatus::Running => None,
            JobStatus::Completed => match client.result(remote_ref) {
                Ok(r) => Some(JobEvent::Completed {
                    at: now_secs(),
                    result: json!({
                        "shots": r.shots,
                        "counts": r.counts,
                        "probabilities": probabilities(&r.counts, r.shots),
                    }),
                }),
                Err(e) => {
                    warn!("job {id}: result retrieval failed: {e}");
                    None
                }
            },
            JobStatus::Failed => {
                let error = match client.result(remote_ref) {
                    Err(e) if e.kind != "BackendUnavailableError" => e,
                    _ => JobError::new("RemoteJobError", "the remote job failed"),
                };
                Some(JobEvent::Failed {
                    at: now_secs(),
                    error,
                })
            }
        };

        let mut state = self.lock();
        let Some(current) = state.store.get(id).map(|r| r.status) else {
            return;
        };
        if current == JobStatus::Queued {
            let _ = state.store.record(id, JobEvent::Running { at: now_secs() });
        }
        if let Some(event) = finished {
            if state.store.get(id).map(|r| r.status) == Some(JobStatus::Running) {
                if let Err(e) = state.store.record(id, event) {
                    warn!("job {id}: {e}");
                }
            }
        }
        drop(state);
        self.inner.changed.notify_all();
    }

    /// Result if completed, status if still pending, error if failed.
    pub fn fetch_result(&self, id: &JobId) -> Result<Fetched, JobError> {
        self.poll(id)?;
        let state = self.lock();
        let r = state.store.get(id).ok_or_else(|| unknown(id))?;
        Ok(match r.status {
            JobStatus::Completed => Fetched::Completed(r.result.clone().unwrap_or(Value::Null)),
            JobStatus::Failed => Fetched::Failed(
                r.error
                    .clone()
                    .unwrap_or_else(|| JobError::new("JobFailed", "job failed")),
            ),
            s => Fetched::Pending(s),
        })
    }

    /// Blocks until the job is terminal or `timeout` elapses; returns the
    /// status at that point.
    pub fn wait(&self, id: &JobId, timeout: Option<Duration>) -> Result<JobStatus, JobError> {
        let deadline = timeout.map(|t| Instant::now() + t);
        let remote = self.get(id).ok_or_else(|| unknown(id))?.backend == Backend::Remote;
        loop {
            let status = self.poll(id)?;
            if status.is_terminal() {
                return Ok(status);
            }
            let now = Instant::now();
            if deadline.is_some_and(|d| now >= d) {
                return Ok(status);
            }
            let mut step = if remote {
                self.inner.config.backends.remote.poll_interval().max(Duration::from_millis(10))
            } else {
                Duration::from_secs(3600)
            };
            if let Some(d) = deadline {
                step = step.min(d - now);
            }
            if remote {
                thread::sleep(step);
            } else {
                let state = self.lock();
                let (_state, _) = self
                    .inner
                    .changed
                    .wait_timeout_while(state, step, |s| {
                        s.store.get(id).is_some_and(|r| !r.status.is_terminal())
                    })
                    .unwrap_or_else(|p| p.into_inner());
            }
        }
    }

    /// Summaries ordered by submission time.
    pub fn list_jobs(&self) -> Vec<JobSummary> {
        let state = self.lock();
        let mut out: Vec<JobSummary> = state.store.records().map(JobSummary::from).collect();
        out.sort_by(|a, b| a.submitted_at.total_cmp(&b.submitted_at).then_with(|| a.id.cmp(&b.id)));
        out
    }

    /// Every status transition applied by this process.
    pub fn transitions(&self) -> Vec<Transition> {
        self.lock().store.history().to_vec()
    }
}
