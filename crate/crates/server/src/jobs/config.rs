use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use qex_core::sim::DEFAULT_MAX_QUBITS;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{0} must be a finite, non-negative number of seconds")]
    NegativeDelay(&'static str),
    #[error("remote timeout ({timeout}s) must exceed the poll interval ({poll_interval}s)")]
    TimeoutNotAbovePollInterval { timeout: f64, poll_interval: f64 },
}

/// Simulated batch scheduler in front of the local engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueuedLocalConfig {
    pub scheduler_delay: f64,
    pub jitter: f64,
    pub seed: Option<u64>,
}

impl Default for QueuedLocalConfig {
    fn default() -> Self {
        Self {
            scheduler_delay: 0.0,
            jitter: 0.0,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub base_url: Option<String>,
    pub poll_interval: f64,
    /// Per-request HTTP timeout.
    pub timeout: f64,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            base_url: None,
            poll_interval: 0.5,
            timeout: 10.0,
        }
    }
}

impl RemoteConfig {
    pub fn poll_interval(&self) -> Duration {
        Duration::from_secs_f64(self.poll_interval)
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub queued_local: QueuedLocalConfig,
    pub remote: RemoteConfig,
}

fn non_negative(v: f64, name: &'static str) -> Result<(), ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::NegativeDelay(name))
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        non_negative(self.queued_local.scheduler_delay, "scheduler_delay")?;
        non_negative(self.queued_local.jitter, "jitter")?;
        non_negative(self.remote.poll_interval, "poll_interval")?;
        non_negative(self.remote.timeout, "timeout")?;
        if self.remote.timeout <= self.remote.poll_interval {
            return Err(ConfigError::TimeoutNotAbovePollInterval {
                timeout: self.remote.timeout,
                poll_interval: self.remote.poll_interval,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrchestratorConfig {
    pub backends: BackendConfig,
    pub max_qubits: usize,
}

impl Default for OrchestratorConfig {
    fn default() -> Self {
        Self {
            backends: BackendConfig::default(),
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}
