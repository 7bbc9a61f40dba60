//! Execution services on top of `qex-core`: the job orchestrator, a bundled
//! remote queue emulator and the MCP tool endpoint.

pub mod jobs;
pub mod mcp;
pub mod remote;
