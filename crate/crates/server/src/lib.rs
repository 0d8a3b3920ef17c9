//! HTTP/JSON front end for the scheduling engine.
//!
//! Stateless endpoints take a whole instance per request. The
//! `/v1/dispatchers` resource keeps a live online dispatcher that sessions
//! are streamed into one batch at a time.

mod error;
mod routes;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::AtomicU64;
use std::sync::{Arc, Mutex};

use axum::extract::DefaultBodyLimit;
use axum::routing::{delete, get, post};
use axum::Router;
use fleetcharge_core::dispatcher::DispatcherState;
use fleetcharge_core::domain::Session;
use fleetcharge_core::SystemModel;
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

pub use error::ApiError;

/// Requests carry whole instances and report sets.
pub const BODY_LIMIT: usize = 256 * 1024 * 1024;

struct LiveDispatcher {
    model: SystemModel,
    state: DispatcherState,
    sessions: Vec<Session>,
}

#[derive(Default)]
pub struct AppState {
    dispatchers: Mutex<HashMap<u64, Arc<Mutex<LiveDispatcher>>>>,
    next_id: AtomicU64,
}

pub fn router() -> Router {
    let state = Arc::new(AppState::default());
    Router::new()
        .route("/health", get(routes::health))
        .route("/v1/scenarios/generate", post(routes::generate))
        .route("/v1/scenarios/validate", post(routes::validate))
        .route("/v1/traces/ingest", post(routes::ingest))
        .route("/v1/runs/online", post(routes::run_online))
        .route("/v1/runs/baseline", post(routes::run_baseline))
        .route("/v1/offline/upper-bound", post(routes::upper_bound))
        .route("/v1/offline/exact", post(routes::exact))
        .route("/v1/verify", post(routes::verify))
        .route("/v1/compare", post(routes::compare))
        .route("/v1/experiments", post(routes::experiment))
        .route("/v1/dispatchers", post(routes::create_dispatcher))
        .route("/v1/dispatchers/{id}/sessions", post(routes::dispatch_sessions))
        .route("/v1/dispatchers/{id}/report", get(routes::dispatcher_report))
        .route("/v1/dispatchers/{id}", delete(routes::delete_dispatcher))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: TcpListener) -> std::io::Result<()> {
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router()).await
}

/// A server running on a background task.
pub struct RunningServer {
    pub addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    task: JoinHandle<std::io::Result<()>>,
}

impl RunningServer {
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Stops accepting connections and waits for in-flight requests.
    pub async fn stop(mut self) -> std::io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        match (&mut self.task).await {
            Ok(result) => result,
            Err(e) => Err(std::io::Error::other(e)),
        }
    }
}

/// Binds `addr` (port 0 picks a free one) and serves in the background.
pub async fn spawn(addr: SocketAddr) -> std::io::Result<RunningServer> {
    let listener = TcpListener::bind(addr).await?;
    let addr = listener.local_addr()?;
    let (tx, rx) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        axum::serve(listener, router())
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });
    Ok(RunningServer {
        addr,
        shutdown: Some(tx),
        task,
    })
}

/// [`spawn`] on an ephemeral loopback port.
pub async fn spawn_local() -> std::io::Result<RunningServer> {
    spawn(SocketAddr::from(([127, 0, 0, 1], 0))).await
}
