mod common;

use std::fs;
use std::path::PathBuf;

use common::{emulator, maxcut_terms, orchestrator, GHZ, QAOA};
use proptest::prelude::*;
use qex_server::jobs::{JobStore, Orchestrator};
use qex_server::mcp::{McpServer, Toolbox, INVALID_PARAMS, INVALID_REQUEST, METHOD_NOT_FOUND, PARSE_ERROR};
use serde_json::{json, Value};

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn session() -> McpServer {
    McpServer::new(Toolbox::new(Orchestrator::in_memory()))
}

fn initialized() -> McpServer {
    let mut s = session();
    s.handle(json!({"jsonrpc": "2.0", "id": 0, "method": "initialize", "params": {"protocolVersion": "2025-06-18"}}))
        .unwrap();
    s
}

fn run(server: &mut McpServer, input: &str) -> String {
    let mut out = Vec::new();
    server.serve(input.as_bytes(), &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

fn call(server: &mut McpServer, id: u64, name: &str, args: Value) -> Value {
    server
        .handle(json!({"jsonrpc": "2.0", "id": id, "method": "tools/call", "params": {"name": name, "arguments": args}}))
        .unwrap()
}

fn tool_doc(resp: &Value) -> (bool, Value) {
    let r = &resp["result"];
    (
        r["isError"].as_bool().unwrap(),
        serde_json::from_str(r["content"][0]["text"].as_str().unwrap()).unwrap(),
    )
}

fn code(resp: &Value) -> i64 {
    resp["error"]["code"].as_i64().unwrap()
}

/// Set `QEX_BLESS=1` to rewrite the expected transcript.
#[test]
fn golden_transcript_replays_bit_identically() {
    let requests = fs::read_to_string(golden("session.requests.jsonl")).unwrap();
    let got = run(&mut session(), &requests);
    let expected_path = golden("session.responses.jsonl");
    if std::env::var_os("QEX_BLESS").is_some() {
        fs::write(&expected_path, &got).unwrap();
    }
    let expected = fs::read_to_string(expected_path).unwrap();
    assert_eq!(got, expected);
    // A second, independent session gives the same bytes.
    assert_eq!(run(&mut session(), &requests), expected);
}

#[test]
fn handshake_rules() {
    let mut s = session();
    let r = s.handle(json!({"jsonrpc": "2.0", "id": 1, "method": "tools/list"})).unwrap();
    assert_eq!(code(&r), INVALID_REQUEST);
    assert!(s.handle(json!({"jsonrpc": "2.0", "method": "notifications/initialized"})).is_none());

    let r = s
        .handle(json!({"jsonrpc": "2.0", "id": 2, "method": "initialize", "params": {"protocolVersion": "2024-11-05"}}))
        .unwrap();
    assert_eq!(r["result"]["protocolVersion"], "2024-11-05");
    assert!(r["result"]["capabilities"]["tools"].is_object());
    assert_eq!(r["result"]["serverInfo"]["name"], "qex");

    let again = s.handle(json!({"jsonrpc": "2.0", "id": 3, "method": "initialize", "params": {}})).unwrap();
    assert_eq!(code(&again), INVALID_REQUEST);
    assert_eq!(again["id"], 3);

    let r = s.handle_line("{not json").unwrap();
    assert_eq!(code(&r), PARSE_ERROR);
    assert_eq!(r["id"], Value::Null);
    let r = s.handle(json!({"jsonrpc": "2.0", "id": 4, "method": "resources/list"})).unwrap();
    assert_eq!(code(&r), METHOD_NOT_FOUND);
    let r = s.handle(json!({"jsonrpc": "1.0", "id": 5, "method": "ping"})).unwrap();
    assert_eq!(code(&r), INVALID_REQUEST);
    assert_eq!(r["id"], 5);
    let r = s.handle(json!([{"jsonrpc": "2.0", "id": 6, "method": "ping"}])).unwrap();
    assert_eq!(code(&r), INVALID_REQUEST);
}

#[test]
fn tools_list_advertises_four_tools() {
    let mut s = initialized();
    let r = s.handle(json!({"jsonrpc": "2.0", "id": 1, "method": "tools/list"})).unwrap();
    let tools = r["result"]["tools"].as_array().unwrap();
    let names: Vec<&str> = tools.iter().map(|t| t["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["sampler_qasm_sim", "estimator_qasm_sim", "sampler_qasm_remote", "get_remote_result"]);
    for t in tools {
        assert_eq!(t["inputSchema"]["type"], "object");
        assert!(t["inputSchema"]["required"].is_array());
        assert!(t["description"].as_str().is_some_and(|d| !d.is_empty()));
    }
}

#[test]
fn aliases_reach_the_same_handlers() {
    let mut s = initialized();
    let args = json!({"openqasm_code": GHZ, "shots": 500, "seed": 3});
    let a = call(&mut s, 1, "sampler_qasm_sim", args.clone());
    let b = call(&mut s, 2, "sampler_qasm_cudaq", args);
    assert_eq!(a["result"], b["result"]);

    let args = json!({"openqasm_code": QAOA, "observable_terms": maxcut_terms()});
    let a = call(&mut s, 3, "estimator_qasm_sim", args.clone());
    let b = call(&mut s, 4, "estimator_qasm_cudaq", args);
    assert_eq!(a["result"], b["result"]);

    for (alias, args) in [
        ("sampler_qasm_quantinuum", json!({"openqasm_code": GHZ, "shots": 1})),
        ("get_quantinuum_result", json!({"job_id": "bogus"})),
    ] {
        let (is_error, doc) = tool_doc(&call(&mut s, 5, alias, args));
        assert!(is_error);
        assert!(doc["error"]["kind"].is_string());
    }
    let r = call(&mut s, 6, "sampler_qasm_nowhere", json!({}));
    assert_eq!(code(&r), INVALID_PARAMS);
}

#[test]
fn sampler_and_estimator_results() {
    let mut s = initialized();
    let (is_error, doc) = tool_doc(&call(&mut s, 1, "sampler_qasm_sim", json!({"openqasm_code": GHZ, "shots": 2000})));
    assert!(!is_error);
    let keys: Vec<&str> = doc.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["openqasm_code", "shots", "counts", "probabilities", "seed"]);
    assert_eq!(doc["openqasm_code"], GHZ);
    assert!(doc["seed"].is_u64());

    let r = call(&mut s, 2, "sampler_qasm_sim", json!({"openqasm_code": GHZ, "shots": "2000"}));
    assert_eq!(code(&r), INVALID_PARAMS);
    assert!(r["error"]["data"]["errors"].as_array().is_some_and(|e| !e.is_empty()));

    let r = call(&mut s, 3, "sampler_qasm_sim", json!({"openqasm_code": "qreg q[1]; h q[0];", "shots": 2000}));
    let (is_error, doc) = tool_doc(&r);
    assert!(is_error);
    assert_eq!(doc["error"]["kind"], "NoMeasurementError");

    let r = call(&mut s, 4, "estimator_qasm_sim", json!({"openqasm_code": QAOA, "observable_terms": []}));
    assert_eq!(tool_doc(&r), (false, json!({"expectation": 0.0})));

    let r = call(
        &mut s,
        5,
        "estimator_qasm_sim",
        json!({"openqasm_code": QAOA, "observable_terms": [{"coeff": 1.0, "pauli": "Q0"}]}),
    );
    let (is_error, doc) = tool_doc(&r);
    assert!(is_error);
    assert_eq!(doc["error"]["kind"], "ObservableParseError");

    let r = call(
        &mut s,
        6,
        "estimator_qasm_sim",
        json!({"openqasm_code": QAOA, "observable_terms": maxcut_terms(), "shots": 4000, "seed": 1}),
    );
    let (is_error, doc) = tool_doc(&r);
    assert!(!is_error);
    let keys: Vec<&str> = doc.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["expectation", "shots", "std_error", "seed"]);

    let r = call(&mut s, 7, "sampler_qasm_sim", json!({"openqasm_code": "qreg q[", "shots": 1}));
    let (_, doc) = tool_doc(&r);
    assert_eq!(doc["error"]["kind"], "ParseError");
    assert_eq!(doc["error"]["line"], 1);
}

#[test]
fn remote_round_trip_through_tools() {
    let remote = emulator(0.1, 0.0, 0.0, 8);
    let mut s = McpServer::new(Toolbox::new(orchestrator(JobStore::in_memory(), Some(remote.url()), 0.0, 0.0)));
    s.handle(json!({"jsonrpc": "2.0", "id": 0, "method": "initialize", "params": {}})).unwrap();

    let (is_error, sub) = tool_doc(&call(
        &mut s,
        1,
        "sampler_qasm_remote",
        json!({"openqasm_code": GHZ, "shots": 100, "machine": "H2-1E"}),
    ));
    assert!(!is_error);
    let keys: Vec<&str> = sub.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["job_id", "status", "machine"]);
    assert_eq!(sub["status"], "queued");
    let job_id = sub["job_id"].clone();

    let (is_error, pending) = tool_doc(&call(&mut s, 2, "get_remote_result", json!({"job_id": job_id})));
    assert!(!is_error);
    assert_eq!(pending, json!({"job_id": job_id, "status": "queued"}));

    std::thread::sleep(std::time::Duration::from_millis(200));
    let (is_error, done) = tool_doc(&call(&mut s, 3, "get_remote_result", json!({"job_id": job_id})));
    assert!(!is_error);
    let keys: Vec<&str> = done.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["job_id", "status", "shots", "counts", "probabilities"]);
    assert_eq!(done["status"], "completed");

    let (is_error, doc) = tool_doc(&call(&mut s, 4, "sampler_qasm_remote", json!({"openqasm_code": GHZ, "shots": 0})));
    assert!(is_error);
    assert_eq!(doc["error"]["details"]["http_status"], 422);
}

#[test]
fn queued_local_sampler_answers_when_done() {
    let mut s = McpServer::new(Toolbox::new(orchestrator(JobStore::in_memory(), None, 0.05, 0.0)));
    s.handle(json!({"jsonrpc": "2.0", "id": 0, "method": "initialize", "params": {}})).unwrap();
    let args = json!({"openqasm_code": GHZ, "shots": 100, "seed": 4});
    let mut queued = args.clone();
    queued["backend"] = json!("queued-local");
    let (_, inline) = tool_doc(&call(&mut s, 1, "sampler_qasm_sim", args));
    let (_, local) = tool_doc(&call(&mut s, 2, "sampler_qasm_sim", queued));
    assert_eq!(inline, local);
}

#[derive(Debug, Clone)]
enum Line {
    Request(Value),
    Notification(Value),
    Garbage(String),
}

fn line() -> impl Strategy<Value = Line> {
    prop_oneof![
        3 => proptest::sample::select(vec![
            json!({"method": "ping"}),
            json!({"method": "tools/list"}),
            json!({"method": "no/such"}),
            json!({"method": "tools/call", "params": {"name": "sampler_qasm_sim", "arguments": {"shots": 1}}}),
            json!({"method": "tools/call", "params": {"name": "get_remote_result", "arguments": {"job_id": "x"}}}),
            json!({"method": "tools/call", "params": {"name": "estimator_qasm_sim",
                "arguments": {"openqasm_code": "qreg q[1]; x q[0];", "observable_terms": [{"coeff": 2.0, "pauli": "Z0"}]}}}),
        ]).prop_map(Line::Request),
        1 => proptest::sample::select(vec![
            json!({"jsonrpc": "2.0", "method": "notifications/initialized"}),
            json!({"jsonrpc": "2.0", "method": "notifications/cancelled", "params": {"requestId": 1}}),
        ]).prop_map(Line::Notification),
        1 => "[{}\\[\\]a-z\":,0-9 ]{1,20}"
            .prop_filter("must not parse", |s| serde_json::from_str::<Value>(s).is_err() && !s.trim().is_empty())
            .prop_map(Line::Garbage),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn one_response_per_request_in_order(lines in proptest::collection::vec(line(), 0..30)) {
        let mut input = String::from("{\"jsonrpc\":\"2.0\",\"id\":\"init\",\"method\":\"initialize\",\"params\":{}}\n");
        let mut expected_ids = vec![json!("init")];
        for (i, l) in lines.iter().enumerate() {
            let text = match l {
                Line::Request(v) => {
                    let mut v = v.clone();
                    v["jsonrpc"] = json!("2.0");
                    v["id"] = json!(i);
                    expected_ids.push(json!(i));
                    v.to_string()
                }
                Line::Notification(v) => v.to_string(),
                Line::Garbage(s) => {
                    expected_ids.push(Value::Null);
                    s.clone()
                }
            };
            input.push_str(&text);
            input.push('\n');
        }
        let out = run(&mut session(), &input);
        let responses: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        prop_assert_eq!(responses.len(), expected_ids.len());
        for (resp, id) in responses.iter().zip(&expected_ids) {
            prop_assert_eq!(&resp["jsonrpc"], "2.0");
            prop_assert_eq!(&resp["id"], id);
            prop_assert!(resp.get("result").is_some() != resp.get("error").is_some());
        }
    }
}
