use std::sync::atomic::Ordering;
use std::sync::{Arc, Mutex};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::Json;
use fleetcharge_core::api::{
    self, BaselineRequest, CompareRequest, CompareResponse, DispatcherCreated, ExperimentSummary, GenerateRequest,
    GenerateResponse, IngestRequest, Instance, OfflineResponse, SessionBatch, ValidateResponse, VerifyRequest,
};
use fleetcharge_core::dispatcher::{self, finish_report, DispatcherState};
use fleetcharge_core::domain::{DispatchDecision, RunReport, ScenarioConfig};
use fleetcharge_core::harness::{self, ExperimentSpec, VerifyReport};
use fleetcharge_core::{baselines, SystemModel};
use serde_json::{json, Value};

use crate::{ApiError, AppState, LiveDispatcher};

type Shared = State<Arc<AppState>>;
type Body<T> = Result<Json<T>, JsonRejection>;
type Reply<T> = Result<Json<T>, ApiError>;

/// Runs CPU-bound engine work off the async workers.
async fn blocking<T, F>(work: F) -> Reply<T>
where
    T: Send + 'static,
    F: FnOnce() -> fleetcharge_core::error::Result<T> + Send + 'static,
{
    Ok(Json(tokio::task::spawn_blocking(work).await??))
}

pub async fn health() -> Json<Value> {
    Json(json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION") }))
}

pub async fn generate(body: Body<GenerateRequest>) -> Reply<GenerateResponse> {
    let Json(req) = body?;
    blocking(move || {
        let (config, sessions) = harness::generate_scenario(req.seed, &req.params)?;
        let model = SystemModel::new(config.clone())?;
        Ok(GenerateResponse {
            instance_hash: harness::instance_hash(&config, &sessions),
            config,
            sessions,
            summary: model.summary(),
        })
    })
    .await
}

pub async fn validate(body: Body<Instance>) -> Reply<ValidateResponse> {
    let Json(instance) = body?;
    blocking(move || Ok(api::validate_instance(&instance))).await
}

pub async fn ingest(body: Body<IngestRequest>) -> Reply<ScenarioConfig> {
    let Json(req) = body?;
    blocking(move || harness::ingest_traces(req.price_csv.as_deref(), req.solar_csv.as_deref(), &req.config)).await
}

pub async fn run_online(body: Body<Instance>) -> Reply<RunReport> {
    let Json(instance) = body?;
    blocking(move || {
        let model = SystemModel::new(instance.config)?;
        dispatcher::run_online(&instance.sessions, &model)
    })
    .await
}

pub async fn run_baseline(body: Body<BaselineRequest>) -> Reply<RunReport> {
    let Json(req) = body?;
    blocking(move || {
        let model = SystemModel::new(req.instance.config)?;
        baselines::run_baseline(&req.instance.sessions, &model, req.threshold)
    })
    .await
}

pub async fn upper_bound(body: Body<Instance>) -> Reply<OfflineResponse> {
    let Json(instance) = body?;
    blocking(move || api::offline_upper_bound(&instance)).await
}

pub async fn exact(body: Body<Instance>) -> Reply<OfflineResponse> {
    let Json(instance) = body?;
    blocking(move || api::offline_exact(&instance)).await
}

pub async fn verify(body: Body<VerifyRequest>) -> Reply<VerifyReport> {
    let Json(req) = body?;
    blocking(move || {
        let model = SystemModel::new(req.instance.config)?;
        harness::verify_instance(&req.instance.sessions, &model, &req.options)
    })
    .await
}

pub async fn compare(body: Body<CompareRequest>) -> Reply<CompareResponse> {
    let Json(req) = body?;
    blocking(move || api::compare_reports(&req)).await
}

pub async fn experiment(body: Body<ExperimentSpec>) -> Reply<ExperimentSummary> {
    let Json(spec) = body?;
    blocking(move || ExperimentSummary::from_result(&harness::run_experiment(&spec)?)).await
}

pub async fn create_dispatcher(
    State(app): Shared,
    body: Body<ScenarioConfig>,
) -> Result<(StatusCode, Json<DispatcherCreated>), ApiError> {
    let Json(config) = body?;
    let Json(live) = blocking(move || {
        let model = SystemModel::new(config)?;
        let state = DispatcherState::new(&model)?;
        Ok(LiveDispatcher {
            model,
            state,
            sessions: Vec::new(),
        })
    })
    .await?;
    let id = app.next_id.fetch_add(1, Ordering::Relaxed) + 1;
    let summary = live.model.summary();
    app.dispatchers
        .lock()
        .expect("dispatcher map lock")
        .insert(id, Arc::new(Mutex::new(live)));
    tracing::debug!(id, "dispatcher created");
    Ok((StatusCode::CREATED, Json(DispatcherCreated { id, summary })))
}

fn lookup(app: &AppState, id: u64) -> Result<Arc<Mutex<LiveDispatcher>>, ApiError> {
    app.dispatchers
        .lock()
        .expect("dispatcher map lock")
        .get(&id)
        .cloned()
        .ok_or(ApiError::NoDispatcher(id))
}

/// Dispatches a batch in order. Sessions before a rejected one stay
/// committed.
pub async fn dispatch_sessions(
    State(app): Shared,
    Path(id): Path<u64>,
    body: Body<SessionBatch>,
) -> Reply<Vec<DispatchDecision>> {
    let Json(batch) = body?;
    let live = lookup(&app, id)?;
    blocking(move || {
        let mut guard = live.lock().expect("dispatcher lock");
        let live = &mut *guard;
        let policy = live.model.config.policy.clone();
        let mut out = Vec::with_capacity(batch.sessions.len());
        for session in batch.sessions {
            out.push(dispatcher::dispatch(&session, &live.model, &mut live.state, &policy)?);
            live.sessions.push(session);
        }
        Ok(out)
    })
    .await
}

pub async fn dispatcher_report(State(app): Shared, Path(id): Path<u64>) -> Reply<RunReport> {
    let live = lookup(&app, id)?;
    blocking(move || {
        let live = live.lock().expect("dispatcher lock");
        let hash = harness::instance_hash(&live.model.config, &live.sessions);
        Ok(finish_report(live.state.clone(), &live.model, "online", hash))
    })
    .await
}

pub async fn delete_dispatcher(State(app): Shared, Path(id): Path<u64>) -> Result<StatusCode, ApiError> {
    match app.dispatchers.lock().expect("dispatcher map lock").remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::NoDispatcher(id)),
    }
}
