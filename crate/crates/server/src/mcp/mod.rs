//! MCP tool server: tool descriptors, schema validation and the stdio
//! JSON-RPC session loop.

mod server;
mod tools;

pub use server::{
    McpServer, DEFAULT_PROTOCOL_VERSION, INVALID_PARAMS, INVALID_REQUEST, METHOD_NOT_FOUND, PARSE_ERROR, SERVER_NAME,
};
pub use tools::{
    canonical_name, descriptors, CallError, TextContent, ToolDescriptor, ToolResult, Toolbox, ALIASES, ESTIMATOR,
    REMOTE_RESULT, REMOTE_SAMPLER, SAMPLER,
};
