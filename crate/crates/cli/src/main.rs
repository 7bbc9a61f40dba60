use std::fs;
use std::io::{self, IsTerminal, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use tracing_subscriber::EnvFilter;

use qex_server::jobs::{BackendConfig, JobStore, Orchestrator, OrchestratorConfig, QueuedLocalConfig, RemoteConfig};
use qex_server::mcp::{self, McpServer, ToolResult, Toolbox};
use qex_server::remote::{self, EmulatorConfig, LatencyConfig, NoiseConfig};

#[derive(Parser, Debug)]
#[command(name = "qex", version, about = "Quantum circuit execution tools: local engine, job queue, MCP server")]
struct Cli {
    /// Directory holding the persistent job store.
    #[arg(long, global = true, env = "QEX_STATE_DIR", default_value = ".qex")]
    state_dir: PathBuf,

    /// Base URL of the remote queue service.
    #[arg(long, global = true, env = "QEX_REMOTE_URL")]
    remote_url: Option<String>,

    #[arg(long, global = true, value_enum, default_value_t = Output::Pretty)]
    output: Output,

    /// Log filter for stderr (e.g. `info`, `qex_server=debug`).
    #[arg(long, global = true, env = "QEX_LOG", default_value = "warn")]
    log_level: String,

    #[command(flatten)]
    scheduler: SchedulerArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct SchedulerArgs {
    /// Simulated batch-scheduler delay for queued-local jobs, in seconds.
    #[arg(long, global = true, default_value_t = 0.0)]
    scheduler_delay: f64,

    /// Uniform jitter added to the scheduler delay, in seconds.
    #[arg(long, global = true, default_value_t = 0.0)]
    scheduler_jitter: f64,

    /// Minimum time between status requests for one remote job, in seconds.
    #[arg(long, global = true, default_value_t = 0.5)]
    poll_interval: f64,

    /// HTTP timeout for remote requests, in seconds.
    #[arg(long, global = true, default_value_t = 10.0)]
    remote_timeout: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Pretty,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum LocalBackend {
    Inline,
    QueuedLocal,
}

impl LocalBackend {
    fn as_str(self) -> &'static str {
        match self {
            LocalBackend::Inline => "inline",
            LocalBackend::QueuedLocal => "queued-local",
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the MCP tool server on stdin/stdout until EOF.
    Serve,
    /// Run the remote queue emulator over HTTP.
    RemoteServe(RemoteServeArgs),
    /// Sample measurement counts from a circuit.
    Sample {
        /// OpenQASM 2.0 file (`-` for stdin).
        #[arg(long)]
        qasm: PathBuf,
        #[arg(long)]
        shots: i64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = LocalBackend::Inline)]
        backend: LocalBackend,
    },
    /// Expectation value of a Pauli-sum observable.
    Estimate {
        #[arg(long)]
        qasm: PathBuf,
        /// JSON file with the `observable_terms` array.
        #[arg(long, conflicts_with = "observable_json", required_unless_present = "observable_json")]
        observable: Option<PathBuf>,
        /// The `observable_terms` array as inline JSON.
        #[arg(long)]
        observable_json: Option<String>,
        /// Sample this many shots instead of computing the exact value.
        #[arg(long)]
        shots: Option<i64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = LocalBackend::Inline)]
        backend: LocalBackend,
    },
    /// Submit a sampling job to the remote service.
    RemoteSubmit {
        #[arg(long)]
        qasm: PathBuf,
        #[arg(long)]
        shots: i64,
        #[arg(long)]
        machine: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fetch the result of a submitted job.
    RemoteResult {
        #[arg(long)]
        job_id: String,
        /// Keep polling until the job finishes or the timeout passes.
        #[arg(long)]
        wait: bool,
        /// Give up waiting after this many seconds.
        #[arg(long, default_value_t = 60.0, requires = "wait")]
        timeout: f64,
        /// Seconds between polls while waiting.
        #[arg(long, default_value_t = 0.5)]
        interval: f64,
    },
    /// List stored jobs.
    Jobs,
}

#[derive(Args, Debug)]
struct RemoteServeArgs {
    #[arg(long, env = "QEX_REMOTE_BIND", default_value = "127.0.0.1:8765")]
    bind: String,
    /// Per-bit readout flip probability.
    #[arg(long, default_value_t = 0.0)]
    flip_prob: f64,
    /// Mean queue latency in seconds.
    #[arg(long, default_value_t = 2.0)]
    delay: f64,
    /// Uniform latency jitter (±) in seconds.
    #[arg(long, default_value_t = 1.0)]
    jitter: f64,
    #[arg(long)]
    latency_seed: Option<u64>,
    #[arg(long)]
    noise_seed: Option<u64>,
    /// Base seed for jobs submitted without one.
    #[arg(long)]
    sampler_seed: Option<u64>,
    /// Maximum number of unfinished jobs.
    #[arg(long, default_value_t = 1024)]
    queue_cap: usize,
    #[arg(long, default_value_t = qex_core::sim::DEFAULT_MAX_QUBITS)]
    max_qubits: usize,
}

/// Failure before any tool ran: bad flags, unreadable files, bad config.
struct UsageError(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.into())
    }
}

type CmdResult = Result<ExitCode, UsageError>;

fn read_source(path: &Path) -> anyhow::Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading stdin")?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn print(output: Output, doc: &Value) {
    let text = match output {
        Output::Json => serde_json::to_string(doc),
        Output::Pretty => serde_json::to_string_pretty(doc),
    }
    .expect("values serialize");
    println!("{text}");
}

impl Cli {
    fn orchestrator(&self) -> anyhow::Result<Orchestrator> {
        let config = OrchestratorConfig {
            backends: BackendConfig {
                queued_local: QueuedLocalConfig {
                    scheduler_delay: self.scheduler.scheduler_delay,
                    jitter: self.scheduler.scheduler_jitter,
                    seed: None,
                },
                remote: RemoteConfig {
                    base_url: self.remote_url.clone(),
                    poll_interval: self.scheduler.poll_interval,
                    timeout: self.scheduler.remote_timeout,
                },
            },
            ..Default::default()
        };
        let store = JobStore::open(&self.state_dir)?;
        Ok(Orchestrator::new(config, store)?)
    }

    fn toolbox(&self, local_wait: Duration) -> anyhow::Result<Toolbox> {
        Ok(Toolbox::new(self.orchestrator()?).with_local_wait(local_wait))
    }

    /// Runs one tool and prints its JSON document.
    fn tool(&self, name: &str, args: Value) -> CmdResult {
        let toolbox = self.toolbox(Duration::from_secs(u32::MAX as u64))?;
        let result = toolbox.call(name, &args).map_err(|e| anyhow!("{e}"))?;
        Ok(self.emit(&result))
    }

    fn emit(&self, result: &ToolResult) -> ExitCode {
        print(self.output, &result.document());
        if result.is_error {
            ExitCode::from(1)
        } else {
            ExitCode::SUCCESS
        }
    }

    fn run(&self) -> CmdResult {
        match &self.command {
            Command::Serve => {
                let toolbox = self.toolbox(Duration::from_secs(30))?;
                let stdin = io::stdin();
                McpServer::new(toolbox).serve(stdin.lock(), io::stdout().lock())?;
                Ok(ExitCode::SUCCESS)
            }
            Command::RemoteServe(a) => {
                let config = EmulatorConfig {
                    latency: LatencyConfig {
                        delay: a.delay,
                        jitter: a.jitter,
                        seed: a.latency_seed,
                    },
                    noise: NoiseConfig {
                        readout_flip_prob: a.flip_prob,
                        seed: a.noise_seed,
                    },
                    sampler_seed: a.sampler_seed,
                    queue_cap: a.queue_cap,
                    max_qubits: a.max_qubits,
                };
                config.validate()?;
                remote::serve_blocking(config, &a.bind, |addr| {
                    eprintln!("remote emulator listening on http://{addr}");
                })?;
                Ok(ExitCode::SUCCESS)
            }
            Command::Sample {
                qasm,
                shots,
                seed,
                backend,
            } => {
                let mut args = json!({
                    "openqasm_code": read_source(qasm)?,
                    "shots": shots,
                    "backend": backend.as_str(),
                });
                if let Some(s) = seed {
                    args["seed"] = json!(s);
                }
                self.tool(mcp::SAMPLER, args)
            }
            Command::Estimate {
                qasm,
                observable,
                observable_json,
                shots,
                seed,
                backend,
            } => {
                let text = match (observable, observable_json) {
                    (Some(path), _) => fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
                    (None, Some(text)) => text.clone(),
                    (None, None) => unreachable!("clap requires one of them"),
                };
                let terms: Value = serde_json::from_str(&text).context("observable is not valid JSON")?;
                let mut args = json!({
                    "openqasm_code": read_source(qasm)?,
                    "observable_terms": terms,
                    "shots": shots,
                    "backend": backend.as_str(),
                });
                if let Some(s) = seed {
                    args["seed"] = json!(s);
                }
                self.tool(mcp::ESTIMATOR, args)
            }
            Command::RemoteSubmit {
                qasm,
                shots,
                machine,
                seed,
            } => {
                let mut args = Map::new();
                args.insert("openqasm_code".into(), json!(read_source(qasm)?));
                args.insert("shots".into(), json!(shots));
                if let Some(m) = machine {
                    args.insert("machine".into(), json!(m));
                }
                if let Some(s) = seed {
                    args.insert("seed".into(), json!(s));
                }
                self.tool(mcp::REMOTE_SAMPLER, Value::Object(args))
            }
            Command::RemoteResult {
                job_id,
                wait,
                timeout,
                interval,
            } => self.remote_result(job_id, *wait, *timeout, *interval),
            Command::Jobs => {
                let jobs = self.orchestrator()?.list_jobs();
                print(self.output, &serde_json::to_value(jobs)?);
                Ok(ExitCode::SUCCESS)
            }
        }
    }

    fn remote_result(&self, job_id: &str, wait: bool, timeout: f64, interval: f64) -> CmdResult {
        if !(interval.is_finite() && interval > 0.0 && timeout.is_finite() && timeout >= 0.0) {
            return Err(anyhow!("--interval must be positive and --timeout non-negative").into());
        }
        let toolbox = self.toolbox(Duration::ZERO)?;
        let deadline = Instant::now() + Duration::from_secs_f64(timeout);
        loop {
            let result = toolbox
                .call(mcp::REMOTE_RESULT, &json!({ "job_id": job_id }))
                .map_err(|e| anyhow!("{e}"))?;
            let doc = result.document();
            let pending = !result.is_error && matches!(doc["status"].as_str(), Some("queued" | "running"));
            if !(wait && pending) {
                return Ok(self.emit(&result));
            }
            if Instant::now() >= deadline {
                let err = json!({"error": {
                    "kind": "TimeoutError",
                    "message": format!("job still {} after {timeout}s", doc["status"].as_str().unwrap_or("pending")),
                    "details": doc,
                }});
                print(self.output, &err);
                return Ok(ExitCode::from(1));
            }
            thread::sleep(Duration::from_secs_f64(interval).min(deadline - Instant::now()));
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let filter = EnvFilter::try_new(&cli.log_level).unwrap_or_else(|_| EnvFilter::new("warn"));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(io::stderr)
        .with_ansi(io::stderr().is_terminal())
        .init();
    match cli.run() {
        Ok(code) => code,
        Err(UsageError(e)) => {
            eprintln!("qex: {e:#}");
            ExitCode::from(2)
        }
    }
}
