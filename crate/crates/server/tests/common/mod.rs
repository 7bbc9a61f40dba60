#![allow(dead_code)]

use qex_server::jobs::{BackendConfig, JobStore, Orchestrator, OrchestratorConfig, QueuedLocalConfig, RemoteConfig};
use qex_server::remote::{EmulatorConfig, EmulatorHandle, LatencyConfig, NoiseConfig};

pub const GHZ: &str = "OPENQASM 2.0;
include \"qelib1.inc\";
qreg q[3];
creg c[3];
h q[0];
cx q[0],q[1];
cx q[0],q[2];
measure q -> c;
";

pub const QAOA: &str = "OPENQASM 2.0;
include \"qelib1.inc\";
qreg q[3];
h q[0]; h q[1]; h q[2];
cx q[0],q[1]; rz(-1.4) q[1]; cx q[0],q[1];
cx q[1],q[2]; rz(-1.4) q[2]; cx q[1],q[2];
cx q[0],q[2]; rz(-1.4) q[2]; cx q[0],q[2];
rx(1.6) q[0]; rx(1.6) q[1]; rx(1.6) q[2];
";

pub fn maxcut_terms() -> serde_json::Value {
    serde_json::json!([
        {"coeff": 1.5, "pauli": ""},
        {"coeff": -0.5, "pauli": "Z0 Z1"},
        {"coeff": -0.5, "pauli": "Z1 Z2"},
        {"coeff": -0.5, "pauli": "Z0 Z2"}
    ])
}

pub fn emulator(delay: f64, jitter: f64, flip: f64, seed: u64) -> EmulatorHandle {
    EmulatorHandle::spawn(
        EmulatorConfig {
            latency: LatencyConfig {
                delay,
                jitter,
                seed: Some(seed),
            },
            noise: NoiseConfig {
                readout_flip_prob: flip,
                seed: Some(seed.wrapping_add(1)),
            },
            sampler_seed: Some(seed.wrapping_add(2)),
            ..Default::default()
        },
        "127.0.0.1:0",
    )
    .expect("emulator starts")
}

pub fn orchestrator(store: JobStore, remote_url: Option<String>, scheduler_delay: f64, jitter: f64) -> Orchestrator {
    Orchestrator::new(
        OrchestratorConfig {
            backends: BackendConfig {
                queued_local: QueuedLocalConfig {
                    scheduler_delay,
                    jitter,
                    seed: Some(3),
                },
                remote: RemoteConfig {
                    base_url: remote_url,
                    poll_interval: 0.01,
                    timeout: 5.0,
                },
            },
            ..Default::default()
        },
        store,
    )
    .expect("valid config")
}
