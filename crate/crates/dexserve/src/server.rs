use std::io;
use std::net::SocketAddr;
use std::sync::mpsc;
use std::sync::Arc;
use std::thread;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::{json, Value};
use tokio::sync::oneshot;

use crate::backend::PolicyBackend;
use crate::error::ServeError;
use crate::request::validate_act_request;

/// Shared per-server context handed to the route handlers.
#[derive(Clone)]
struct AppState {
    backend: Arc<dyn PolicyBackend>,
    started: Instant,
}

/// A running gateway. Dropping the handle shuts the server down
/// gracefully: the listener stops accepting and in-flight requests are
/// allowed to finish before the thread exits.
#[derive(Debug)]
pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<thread::JoinHandle<()>>,
}

impl ServerHandle {
    /// The address actually bound (useful with port 0).
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Base URL of the gateway, without a trailing slash.
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Stop accepting, drain in-flight requests and join the thread.
    pub fn shutdown(self) {
        drop(self);
    }

    /// Block until the server exits on its own (e.g. on Ctrl-C).
    pub fn wait(mut self) {
        // Keep the shutdown sender alive while parked in join, otherwise
        // dropping it would itself stop the server.
        let shutdown = self.shutdown.take();
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
        drop(shutdown);
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}

/// Start the gateway on `addr` with the given backend. Binds before
/// returning, so a `Ok` handle is already serving `/v1/act` and
/// `/v1/health`. An occupied port is reported as [`ServeError::PortInUse`].
///
/// The server runs on its own thread with its own runtime and stops on
/// Ctrl-C or when the handle is dropped.
pub fn serve(addr: SocketAddr, backend: Arc<dyn PolicyBackend>) -> Result<ServerHandle, ServeError> {
    let (ready_tx, ready_rx) = mpsc::channel::<Result<SocketAddr, ServeError>>();
    let (shutdown_tx, shutdown_rx) = oneshot::channel::<()>();

    let thread = thread::Builder::new()
        .name("dexserve".to_owned())
        .spawn(move || run_server(addr, backend, ready_tx, shutdown_rx))?;

    match ready_rx.recv() {
        Ok(Ok(bound)) => Ok(ServerHandle {
            addr: bound,
            shutdown: Some(shutdown_tx),
            thread: Some(thread),
        }),
        Ok(Err(e)) => {
            let _ = thread.join();
            Err(e)
        }
        Err(_) => {
            let _ = thread.join();
            Err(ServeError::Startup(
                "server thread exited before binding".to_owned(),
            ))
        }
    }
}

fn run_server(
    addr: SocketAddr,
    backend: Arc<dyn PolicyBackend>,
    ready_tx: mpsc::Sender<Result<SocketAddr, ServeError>>,
    shutdown_rx: oneshot::Receiver<()>,
) {
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            let _ = ready_tx.send(Err(ServeError::Io(e)));
            return;
        }
    };
    runtime.block_on(async move {
        let listener = match tokio::net::TcpListener::bind(addr).await {
            Ok(l) => l,
            Err(e) if e.kind() == io::ErrorKind::AddrInUse => {
                let _ = ready_tx.send(Err(ServeError::PortInUse(addr)));
                return;
            }
            Err(e) => {
                let _ = ready_tx.send(Err(ServeError::Io(e)));
                return;
            }
        };
        let bound = match listener.local_addr() {
            Ok(a) => a,
            Err(e) => {
                let _ = ready_tx.send(Err(ServeError::Io(e)));
                return;
            }
        };

        let state = AppState {
            backend,
            started: Instant::now(),
        };
        let app = Router::new()
            .route("/v1/act", post(handle_act))
            .route("/v1/health", get(handle_health))
            .with_state(state);

        let _ = ready_tx.send(Ok(bound));

        let shutdown = async move {
            tokio::select! {
                _ = shutdown_rx => {}
                _ = tokio::signal::ctrl_c() => {}
            }
        };
        if let Err(e) = axum::serve(listener, app)
            .with_graceful_shutdown(shutdown)
            .await
        {
            eprintln!("dexserve: server error: {e}");
        }
    });
}

/// Build a client-fault response (HTTP 400).
fn bad_request(code: &str, message: String) -> (StatusCode, Json<Value>) {
    (
        StatusCode::BAD_REQUEST,
        Json(json!({ "code": code, "message": message })),
    )
}

/// Build a backend-fault response (HTTP 500), naming the backend.
fn backend_fault(code: &str, backend: &str, message: String) -> (StatusCode, Json<Value>) {
    (
        StatusCode::INTERNAL_SERVER_ERROR,
        Json(json!({ "backend": backend, "code": code, "message": message })),
    )
}

async fn handle_act(State(state): State<AppState>, body: Bytes) -> (StatusCode, Json<Value>) {
    let parsed: Value = match serde_json::from_slice(&body) {
        Ok(v) => v,
        Err(e) => return bad_request("BAD_JSON", format!("request body is not valid JSON: {e}")),
    };
    let inputs = match validate_act_request(&parsed) {
        Ok(inputs) => inputs,
        Err(e) => return bad_request(e.code, e.message),
    };

    let backend = state.backend.as_ref();
    let name = backend.name();
    let dof = backend.dof();

    let clock = Instant::now();
    let actions = match backend.act(&inputs) {
        Ok(actions) => actions,
        Err(e) => return backend_fault("BACKEND_ERROR", name, e.0),
    };
    let latency_ms = clock.elapsed().as_secs_f64() * 1e3;

    // The gateway, not the backend, owns the response contract: the
    // matrix must be chunk_size x dof and entirely finite.
    if actions.len() != inputs.chunk_size || actions.iter().any(|row| row.len() != dof) {
        return backend_fault(
            "BAD_BACKEND_SHAPE",
            name,
            format!(
                "backend produced a {}x{} matrix, request needs {}x{dof}",
                actions.len(),
                actions.first().map_or(0, Vec::len),
                inputs.chunk_size,
            ),
        );
    }
    if let Some((t, d)) = actions
        .iter()
        .enumerate()
        .flat_map(|(t, row)| row.iter().enumerate().map(move |(d, v)| (t, d, v)))
        .find_map(|(t, d, v)| (!v.is_finite()).then_some((t, d)))
    {
        return backend_fault(
            "NON_FINITE_ACTION",
            name,
            format!("action[{t}][{d}] is not finite"),
        );
    }

    (
        StatusCode::OK,
        Json(json!({
            "actions": actions,
            "backend": name,
            "dof": dof,
            "latency_ms": latency_ms,
        })),
    )
}

async fn handle_health(State(state): State<AppState>) -> Json<Value> {
    Json(json!({
        "backend": state.backend.name(),
        "dof": state.backend.dof(),
        "status": "ok",
        "uptime_s": state.started.elapsed().as_secs_f64(),
    }))
}
