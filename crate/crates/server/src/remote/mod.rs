//! A local stand-in for a cloud quantum queue: asynchronous submission,
//! wall-clock queue latency, lazy execution and readout-flip noise.

pub mod api;
mod client;
mod emulator;
mod http;

pub use client::RemoteClient;
pub use emulator::{
    apply_readout_noise, Emulator, EmulatorConfig, EmulatorConfigError, LatencyConfig, NoiseConfig, Rejection,
    RemoteJob, SharedEmulator,
};
pub use http::{router, serve_blocking, EmulatorHandle};
