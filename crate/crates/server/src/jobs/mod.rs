//! Job records, the persistent event store and the orchestrator that
//! dispatches work to the inline, queued-local and remote backends.

mod config;
mod executor;
mod orchestrator;
mod record;
mod store;

pub use config::{BackendConfig, ConfigError, OrchestratorConfig, QueuedLocalConfig, RemoteConfig};
pub use executor::{check_shots, execute, probabilities, round_sig6, MAX_SHOTS};
pub use orchestrator::{DelayScheduler, Fetched, Orchestrator, Scheduler};
pub use record::{now_secs, Backend, JobError, JobId, JobRecord, JobRequest, JobStatus, JobSummary};
pub use store::{JobEvent, JobStore, StoreError, Transition};
