use std::io;
use std::net::{SocketAddr, TcpListener};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use tokio::sync::oneshot;

use super::emulator::{Emulator, EmulatorConfig, Rejection, SharedEmulator};

fn reply<T: Serialize>(ok: StatusCode, r: Result<T, Rejection>) -> Response {
    match r {
        Ok(body) => (ok, Json(body)).into_response(),
        Err(rej) => {
            let code = StatusCode::from_u16(rej.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
            (code, Json(rej.body)).into_response()
        }
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    tokio::task::spawn_blocking(f).await.expect("handler panicked")
}

async fn submit(State(em): State<SharedEmulator>, body: Bytes) -> Response {
    reply(StatusCode::CREATED, blocking(move || em.submit(&body)).await)
}

async fn status(State(em): State<SharedEmulator>, Path(id): Path<String>) -> Response {
    reply(StatusCode::OK, blocking(move || em.status(&id)).await)
}

async fn result(State(em): State<SharedEmulator>, Path(id): Path<String>) -> Response {
    reply(StatusCode::OK, blocking(move || em.result(&id)).await)
}

pub fn router(emulator: SharedEmulator) -> Router {
    Router::new()
        .route("/v1/jobs", post(submit))
        .route("/v1/jobs/{id}", get(status))
        .route("/v1/jobs/{id}/result", get(result))
        .with_state(emulator)
}

fn bind(addr: &str) -> io::Result<TcpListener> {
    let listener = TcpListener::bind(addr)?;
    listener.set_nonblocking(true)?;
    Ok(listener)
}

fn new_emulator(config: EmulatorConfig) -> io::Result<SharedEmulator> {
    Emulator::new(config)
        .map(Arc::new)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))
}

/// Serves on the current thread until the process exits.
pub fn serve_blocking(config: EmulatorConfig, addr: &str, on_bound: impl FnOnce(SocketAddr)) -> io::Result<()> {
    let emulator = new_emulator(config)?;
    let listener = bind(addr)?;
    on_bound(listener.local_addr()?);
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::from_std(listener)?;
        axum::serve(listener, router(emulator)).await
    })
}

/// A running emulator on a background thread; stops when dropped.
pub struct EmulatorHandle {
    addr: SocketAddr,
    emulator: SharedEmulator,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<io::Result<()>>>,
}

impl EmulatorHandle {
    pub fn spawn(config: EmulatorConfig, addr: &str) -> io::Result<Self> {
        let emulator = new_emulator(config)?;
        let listener = bind(addr)?;
        let local = listener.local_addr()?;
        let (tx, rx) = oneshot::channel();
        let app = router(emulator.clone());
        let thread = thread::Builder::new()
            .name("remote-emulator".into())
            .spawn(move || {
                let rt = tokio::runtime::Builder::new_multi_thread()
                    .worker_threads(2)
                    .enable_all()
                    .build()?;
                rt.block_on(async move {
                    let listener = tokio::net::TcpListener::from_std(listener)?;
                    axum::serve(listener, app)
                        .with_graceful_shutdown(async {
                            let _ = rx.await;
                        })
                        .await
                })
            })?;
        Ok(Self {
            addr: local,
            emulator,
            shutdown: Some(tx),
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn emulator(&self) -> &Emulator {
        &self.emulator
    }

    pub fn stop(mut self) -> io::Result<()> {
        self.stop_inner()
    }

    fn stop_inner(&mut self) -> io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        match self.thread.take() {
            Some(t) => t.join().unwrap_or(Ok(())),
            None => Ok(()),
        }
    }
}

impl Drop for EmulatorHandle {
    fn drop(&mut self) {
        let _ = self.stop_inner();
    }
}
