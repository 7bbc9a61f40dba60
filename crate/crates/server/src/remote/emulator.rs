use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex, MutexGuard};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;
use tracing::{debug, info};

use qex_core::circuit::{Circuit, Op};
use qex_core::qasm::compile;
use qex_core::sim::DEFAULT_MAX_QUBITS;
use qex_core::Engine;

use super::api::{ErrorBody, ResultResponse, StatusResponse, SubmitResponse, DEFAULT_MACHINE};
use crate::jobs::{now_secs, JobError, JobStatus, MAX_SHOTS};

/// Independent per-bit readout flips applied to every measured bit of every shot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub readout_flip_prob: f64,
    pub seed: Option<u64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            readout_flip_prob: 0.0,
            seed: None,
        }
    }
}

/// Queue latency: `delay + U(-jitter, jitter)` seconds, floored at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyConfig {
    pub delay: f64,
    pub jitter: f64,
    pub seed: Option<u64>,
}

impl Default for LatencyConfig {
    fn default() -> Self {
        Self {
            delay: 2.0,
            jitter: 1.0,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmulatorConfig {
    pub latency: LatencyConfig,
    pub noise: NoiseConfig,
    /// Base for per-job sampler seeds when a submission carries none.
    pub sampler_seed: Option<u64>,
    /// Maximum number of unfinished jobs.
    pub queue_cap: usize,
    pub max_qubits: usize,
}

impl Default for EmulatorConfig {
    fn default() -> Self {
        Self {
            latency: LatencyConfig::default(),
            noise: NoiseConfig::default(),
            sampler_seed: None,
            queue_cap: 1024,
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EmulatorConfigError {
    #[error("readout flip probability must lie in [0, 1], got {0}")]
    FlipProbability(f64),
    #[error("latency {0} must be a finite, non-negative number of seconds")]
    Latency(&'static str),
    #[error("queue cap must be at least 1")]
    QueueCap,
}

impl EmulatorConfig {
    pub fn validate(&self) -> Result<(), EmulatorConfigError> {
        let p = self.noise.readout_flip_prob;
        if !(0.0..=1.0).contains(&p) {
            return Err(EmulatorConfigError::FlipProbability(p));
        }
        for (v, name) in [(self.latency.delay, "delay"), (self.latency.jitter, "jitter")] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(EmulatorConfigError::Latency(name));
            }
        }
        if self.queue_cap == 0 {
            return Err(EmulatorConfigError::QueueCap);
        }
        Ok(())
    }
}

/// HTTP status plus JSON body for a rejected request.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub status: u16,
    pub body: ErrorBody,
}

impl Rejection {
    fn new(status: u16, error: JobError) -> Self {
        Self {
            status,
            body: ErrorBody { error, status: None },
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self::new(422, JobError::new("ValidationError", message))
    }
}

#[derive(Debug, Clone)]
pub struct RemoteJob {
    pub remote_id: String,
    pub seq: u64,
    pub qasm: String,
    pub shots: u64,
    pub machine: String,
    pub seed: u64,
    pub enqueue_time: f64,
    /// Drawn queue latency in seconds.
    pub latency: f64,
    pub ready_time: f64,
    pub status: JobStatus,
    pub counts: Option<BTreeMap<String, u64>>,
    pub error: Option<JobError>,
}

struct Table {
    jobs: HashMap<String, RemoteJob>,
    next_seq: u64,
    latency_rng: ChaCha20Rng,
}

/// Job table and execution logic behind the HTTP routes.
pub struct Emulator {
    config: EmulatorConfig,
    engine: Engine,
    noise_seed: u64,
    sampler_seed: u64,
    table: Mutex<Table>,
}

fn stream_rng(base: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(base);
    rng.set_stream(stream);
    rng
}

/// Flips each measured clbit of every shot with probability `p`.
pub fn apply_readout_noise<R: Rng + ?Sized>(
    counts: &BTreeMap<String, u64>,
    measured_clbits: &[usize],
    p: f64,
    rng: &mut R,
) -> BTreeMap<String, u64> {
    if p <= 0.0 || measured_clbits.is_empty() {
        return counts.clone();
    }
    let mut noisy = BTreeMap::new();
    for (key, &n) in counts {
        let ideal = key.as_bytes();
        let mut bits = ideal.to_vec();
        for _ in 0..n {
            bits.copy_from_slice(ideal);
            for &c in measured_clbits {
                if rng.random_bool(p) {
                    bits[c] ^= b'0' ^ b'1';
                }
            }
            let k = String::from_utf8(bits.clone()).expect("ascii bitstring");
            *noisy.entry(k).or_insert(0) += 1;
        }
    }
    noisy
}

fn measured_clbits(circuit: &Circuit) -> Vec<usize> {
    circuit
        .ops
        .iter()
        .filter_map(|op| match op {
            Op::Measure { clbit, .. } => Some(*clbit),
            _ => None,
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

impl Emulator {
    pub fn new(config: EmulatorConfig) -> Result<Self, EmulatorConfigError> {
        config.validate()?;
        let mut os = rand::rng();
        let noise_seed = config.noise.seed.unwrap_or_else(|| os.random());
        let sampler_seed = config.sampler_seed.unwrap_or_else(|| os.random());
        let latency_rng = match config.latency.seed {
            Some(s) => ChaCha20Rng::seed_from_u64(s),
            None => ChaCha20Rng::from_os_rng(),
        };
        Ok(Self {
            engine: Engine::with_max_qubits(config.max_qubits),
            config,
            noise_seed,
            sampler_seed,
            table: Mutex::new(Table {
                jobs: HashMap::new(),
                next_seq: 0,
                latency_rng,
            }),
        })
    }

    pub fn config(&self) -> &EmulatorConfig {
        &self.config
    }

    fn lock(&self) -> MutexGuard<'_, Table> {
        self.table.lock().unwrap_or_else(|p| p.into_inner())
    }

    /// Validates and enqueues a `POST /v1/jobs` body.
    pub fn submit(&self, body: &[u8]) -> Result<SubmitResponse, Rejection> {
        let body: Value = serde_json::from_slice(body).map_err(|e| {
            Rejection::new(400, JobError::new("BadRequest", format!("body is not JSON: {e}")))
        })?;
        let obj = body
            .as_object()
            .ok_or_else(|| Rejection::invalid("body must be a JSON object"))?;
        let qasm = match obj.get("qasm") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(Rejection::invalid("field `qasm` must be a string")),
            None => return Err(Rejection::invalid("missing field `qasm`")),
        };
        let shots = match obj.get("shots") {
            Some(v) => v
                .as_i64()
                .ok_or_else(|| Rejection::invalid("field `shots` must be an integer"))?,
            None => return Err(Rejection::invalid("missing field `shots`")),
        };
        if !(1..=MAX_SHOTS).contains(&shots) {
            return Err(Rejection::invalid(format!(
                "shots must be between 1 and {MAX_SHOTS}, got {shots}"
            )));
        }
        let machine = match obj.get("machine") {
            None | Some(Value::Null) => DEFAULT_MACHINE.to_string(),
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(Rejection::invalid("field `machine` must be a string")),
        };
        let seed = match obj.get("seed") {
            None | Some(Value::Null) => None,
            Some(v) => Some(
                v.as_u64()
                    .ok_or_else(|| Rejection::invalid("field `seed` must be a non-negative integer"))?,
            ),
        };

        let circuit = compile(&qasm).map_err(|e| Rejection::new(400, JobError::from(e)))?;
        if circuit.n_qubits > self.config.max_qubits {
            return Err(Rejection::new(
                400,
                JobError::new(
                    "CapacityError",
                    format!(
                        "circuit needs {} qubits; this machine allows at most {}",
                        circuit.n_qubits, self.config.max_qubits
                    ),
                ),
            ));
        }
        if !circuit.has_measurements() {
            return Err(Rejection::new(
                400,
                JobError::new("NoMeasurementError", "circuit contains no measurement"),
            ));
        }

        let mut table = self.lock();
        let pending = table.jobs.values().filter(|j| !j.status.is_terminal()).count();
        if pending >= self.config.queue_cap {
            return Err(Rejection::new(
                503,
                JobError::new(
                    "QueueFullError",
                    format!("queue is full ({} unfinished jobs)", self.config.queue_cap),
                ),
            ));
        }
        let seq = table.next_seq;
        table.next_seq += 1;
        let LatencyConfig { delay, jitter, .. } = self.config.latency;
        let offset = if jitter > 0.0 {
            table.latency_rng.random_range(-jitter..=jitter)
        } else {
            0.0
        };
        let latency = (delay + offset).max(0.0);
        let enqueue_time = now_secs();
        let ready_time = enqueue_time + latency;
        let seed = seed.unwrap_or_else(|| stream_rng(self.sampler_seed, seq).next_u64());
        let remote_id = format!("job-{seq:06}");
        info!(%remote_id, shots, %machine, latency, "enqueued");
        table.jobs.insert(
            remote_id.clone(),
            RemoteJob {
                remote_id: remote_id.clone(),
                seq,
                qasm,
                shots: shots as u64,
                machine,
                seed,
                enqueue_time,
                latency,
                ready_time,
                status: JobStatus::Queued,
                counts: None,
                error: None,
            },
        );
        Ok(SubmitResponse {
            job_id: remote_id,
            status: JobStatus::Queued,
        })
    }

    pub fn job(&self, remote_id: &str) -> Option<RemoteJob> {
        self.lock().jobs.get(remote_id).cloned()
    }

    fn not_found(remote_id: &str) -> Rejection {
        Rejection::new(
            404,
            JobError::new("UnknownJobError", format!("no job with id {remote_id:?}")),
        )
    }

    /// Status at the current wall-clock time, executing the job if it has
    /// become ready.
    pub fn status(&self, remote_id: &str) -> Result<StatusResponse, Rejection> {
        let status = self.advance(remote_id)?;
        Ok(StatusResponse {
            job_id: remote_id.to_string(),
            status,
        })
    }

    pub fn result(&self, remote_id: &str) -> Result<ResultResponse, Rejection> {
        let status = self.advance(remote_id)?;
        let table = self.lock();
        let job = table.jobs.get(remote_id).ok_or_else(|| Self::not_found(remote_id))?;
        match (status, &job.counts) {
            (JobStatus::Completed, Some(counts)) => Ok(ResultResponse {
                job_id: job.remote_id.clone(),
                counts: counts.clone(),
                shots: job.shots,
                machine: job.machine.clone(),
                seed: job.seed,
            }),
            _ => Err(Rejection {
                status: 409,
                body: ErrorBody {
                    error: job.error.clone().unwrap_or_else(|| {
                        JobError::new("JobNotCompleteError", format!("job is {status}"))
                    }),
                    status: Some(status),
                },
            }),
        }
    }

    fn advance(&self, remote_id: &str) -> Result<JobStatus, Rejection> {
        let job = {
            let mut table = self.lock();
            let job = table
                .jobs
                .get_mut(remote_id)
                .ok_or_else(|| Self::not_found(remote_id))?;
            if job.status != JobStatus::Queued || now_secs() < job.ready_time {
                return Ok(job.status);
            }
            job.status = JobStatus::Running;
            job.clone()
        };

        debug!(remote_id, "executing");
        let outcome = self.execute(&job);
        let mut table = self.lock();
        let stored = table.jobs.get_mut(remote_id).expect("jobs are never removed");
        match outcome {
            Ok(counts) => {
                stored.counts = Some(counts);
                stored.status = JobStatus::Completed;
            }
            Err(e) => {
                stored.error = Some(e);
                stored.status = JobStatus::Failed;
            }
        }
        Ok(stored.status)
    }

    fn execute(&self, job: &RemoteJob) -> Result<BTreeMap<String, u64>, JobError> {
        let circuit = compile(&job.qasm)?;
        let ideal = self.engine.sample(&circuit, job.shots, Some(job.seed))?;
        let mut rng = stream_rng(self.noise_seed, job.seq);
        Ok(apply_readout_noise(
            &ideal.counts.counts,
            &measured_clbits(&circuit),
            self.config.noise.readout_flip_prob,
            &mut rng,
        ))
    }
}

pub type SharedEmulator = Arc<Emulator>;
