use std::io::{self, BufRead, Write};

use serde_json::{json, Map, Value};
use tracing::{debug, info};

use super::tools::{CallError, Toolbox};

pub const PARSE_ERROR: i64 = -32700;
pub const INVALID_REQUEST: i64 = -32600;
pub const METHOD_NOT_FOUND: i64 = -32601;
pub const INVALID_PARAMS: i64 = -32602;

/// Protocol revision answered when the client does not name one.
pub const DEFAULT_PROTOCOL_VERSION: &str = "2025-06-18";
pub const SERVER_NAME: &str = "qex";

fn response(id: Value, result: Value) -> Value {
    json!({"jsonrpc": "2.0", "id": id, "result": result})
}

fn error(id: Value, code: i64, message: impl Into<String>, data: Option<Value>) -> Value {
    let mut err = Map::new();
    err.insert("code".into(), json!(code));
    err.insert("message".into(), json!(message.into()));
    if let Some(d) = data {
        err.insert("data".into(), d);
    }
    json!({"jsonrpc": "2.0", "id": id, "error": err})
}

/// One MCP session over newline-delimited JSON-RPC 2.0.
pub struct McpServer {
    toolbox: Toolbox,
    initialized: bool,
}

impl McpServer {
    pub fn new(toolbox: Toolbox) -> Self {
        Self {
            toolbox,
            initialized: false,
        }
    }

    pub fn toolbox(&self) -> &Toolbox {
        &self.toolbox
    }

    /// Reads requests until EOF, writing one response line per request.
    pub fn serve<R: BufRead, W: Write>(&mut self, input: R, mut output: W) -> io::Result<()> {
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            if let Some(resp) = self.handle_line(&line) {
                let mut text = serde_json::to_string(&resp).expect("responses serialize");
                text.push('\n');
                output.write_all(text.as_bytes())?;
                output.flush()?;
            }
        }
        info!("input closed; session ends");
        Ok(())
    }

    /// Handles one raw message; `None` for notifications.
    pub fn handle_line(&mut self, line: &str) -> Option<Value> {
        match serde_json::from_str::<Value>(line) {
            Ok(msg) => self.handle(msg),
            Err(e) => Some(error(Value::Null, PARSE_ERROR, format!("parse error: {e}"), None)),
        }
    }

    pub fn handle(&mut self, msg: Value) -> Option<Value> {
        let Value::Object(obj) = msg else {
            let what = if msg.is_array() {
                "batch requests are not supported"
            } else {
                "request must be a JSON object"
            };
            return Some(error(Value::Null, INVALID_REQUEST, what, None));
        };
        let id = obj.get("id").cloned();
        let id_ok = matches!(&id, None | Some(Value::String(_) | Value::Number(_) | Value::Null));
        let method = obj.get("method").and_then(Value::as_str);
        if obj.get("jsonrpc").and_then(Value::as_str) != Some("2.0") || method.is_none() || !id_ok {
            let id = if id_ok { id.unwrap_or(Value::Null) } else { Value::Null };
            return Some(error(id, INVALID_REQUEST, "invalid JSON-RPC 2.0 request", None));
        }
        let method = method.expect("checked");
        let params = obj.get("params").cloned().unwrap_or(Value::Null);

        let Some(id) = id else {
            debug!(method, "notification");
            return None;
        };
        debug!(method, %id, "request");
        Some(match method {
            "initialize" if self.initialized => error(id, INVALID_REQUEST, "session already initialized", None),
            "initialize" => {
                self.initialized = true;
                let version = params
                    .get("protocolVersion")
                    .and_then(Value::as_str)
                    .unwrap_or(DEFAULT_PROTOCOL_VERSION);
                response(
                    id,
                    json!({
                        "protocolVersion": version,
                        "capabilities": {"tools": {"listChanged": false}},
                        "serverInfo": {"name": SERVER_NAME, "version": env!("CARGO_PKG_VERSION")}
                    }),
                )
            }
            "ping" => response(id, json!({})),
            _ if !self.initialized => error(id, INVALID_REQUEST, "session not initialized", None),
            "tools/list" => response(id, json!({"tools": self.toolbox.descriptors()})),
            "tools/call" => self.call(id, &params),
            other => error(id, METHOD_NOT_FOUND, format!("method not found: {other}"), None),
        })
    }

    fn call(&self, id: Value, params: &Value) -> Value {
        let Some(name) = params.get("name").and_then(Value::as_str) else {
            return error(id, INVALID_PARAMS, "tools/call requires a string `name`", None);
        };
        let args = match params.get("arguments") {
            None | Some(Value::Null) => Value::Object(Map::new()),
            Some(a) => a.clone(),
        };
        match self.toolbox.call(name, &args) {
            Ok(result) => response(id, serde_json::to_value(result).expect("results serialize")),
            Err(e @ CallError::UnknownTool(_)) => error(id, INVALID_PARAMS, e.to_string(), None),
            Err(CallError::InvalidArguments { tool, errors }) => error(
                id,
                INVALID_PARAMS,
                format!("invalid arguments for {tool}"),
                Some(json!({"errors": errors})),
            ),
        }
    }
}
