//! Typed HTTP client for the fleetcharge service.

use fleetcharge_core::api::{
    BaselineRequest, CompareRequest, CompareResponse, DispatcherCreated, ErrorBody, ExperimentSummary, GenerateRequest,
    GenerateResponse, IngestRequest, Instance, OfflineResponse, SessionBatch, ValidateResponse, VerifyRequest,
};
use fleetcharge_core::domain::{DispatchDecision, RunReport, ScenarioConfig, Session};
use fleetcharge_core::harness::{ExperimentSpec, ScenarioParams, VerifyOptions, VerifyReport};
use reqwest::{Method, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("request to {url} failed: {source}")]
    Transport {
        url: String,
        #[source]
        source: reqwest::Error,
    },
    #[error("server returned {status} ({kind}): {message}")]
    Api {
        status: StatusCode,
        kind: String,
        message: String,
    },
    #[error("could not decode response from {url}: {source}")]
    Decode {
        url: String,
        #[source]
        source: serde_json::Error,
    },
}

impl ClientError {
    /// The server's error kind, for API errors.
    pub fn kind(&self) -> Option<&str> {
        match self {
            ClientError::Api { kind, .. } => Some(kind),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct Client {
    http: reqwest::Client,
    base: String,
}

impl Client {
    /// `base` is the server root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        Self {
            http: reqwest::Client::new(),
            base: base.into().trim_end_matches('/').to_string(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    async fn call<B: Serialize + ?Sized>(&self, method: Method, path: &str, body: Option<&B>) -> Result<Vec<u8>> {
        let url = format!("{}{path}", self.base);
        let transport = |source| ClientError::Transport {
            url: url.clone(),
            source,
        };
        let mut request = self.http.request(method, &url);
        if let Some(body) = body {
            request = request.json(body);
        }
        let response = request.send().await.map_err(transport)?;
        let status = response.status();
        let bytes = response.bytes().await.map_err(transport)?;
        if status.is_success() {
            return Ok(bytes.to_vec());
        }
        let (kind, message) = match serde_json::from_slice::<ErrorBody>(&bytes) {
            Ok(e) => (e.kind, e.message),
            Err(_) => ("unknown".to_string(), String::from_utf8_lossy(&bytes).into_owned()),
        };
        Err(ClientError::Api { status, kind, message })
    }

    async fn json<B: Serialize + ?Sized, T: DeserializeOwned>(
        &self,
        method: Method,
        path: &str,
        body: Option<&B>,
    ) -> Result<T> {
        let bytes = self.call(method, path, body).await?;
        serde_json::from_slice(&bytes).map_err(|source| ClientError::Decode {
            url: format!("{}{path}", self.base),
            source,
        })
    }

    async fn post<B: Serialize + ?Sized, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        self.json(Method::POST, path, Some(body)).await
    }

    pub async fn health(&self) -> Result<serde_json::Value> {
        self.json::<(), _>(Method::GET, "/health", None).await
    }

    pub async fn generate(&self, seed: u64, params: &ScenarioParams) -> Result<GenerateResponse> {
        let body = GenerateRequest {
            seed,
            params: params.clone(),
        };
        self.post("/v1/scenarios/generate", &body).await
    }

    pub async fn validate(&self, instance: &Instance) -> Result<ValidateResponse> {
        self.post("/v1/scenarios/validate", instance).await
    }

    pub async fn ingest_traces(
        &self,
        config: &ScenarioConfig,
        price_csv: Option<String>,
        solar_csv: Option<String>,
    ) -> Result<ScenarioConfig> {
        let body = IngestRequest {
            config: config.clone(),
            price_csv,
            solar_csv,
        };
        self.post("/v1/traces/ingest", &body).await
    }

    pub async fn run_online(&self, instance: &Instance) -> Result<RunReport> {
        self.post("/v1/runs/online", instance).await
    }

    pub async fn run_baseline(&self, instance: &Instance, threshold: f64) -> Result<RunReport> {
        let body = BaselineRequest {
            instance: instance.clone(),
            threshold,
        };
        self.post("/v1/runs/baseline", &body).await
    }

    pub async fn upper_bound(&self, instance: &Instance) -> Result<OfflineResponse> {
        self.post("/v1/offline/upper-bound", instance).await
    }

    pub async fn exact(&self, instance: &Instance) -> Result<OfflineResponse> {
        self.post("/v1/offline/exact", instance).await
    }

    pub async fn verify(&self, instance: &Instance, options: &VerifyOptions) -> Result<VerifyReport> {
        let body = VerifyRequest {
            instance: instance.clone(),
            options: options.clone(),
        };
        self.post("/v1/verify", &body).await
    }

    pub async fn compare(&self, request: &CompareRequest) -> Result<CompareResponse> {
        self.post("/v1/compare", request).await
    }

    pub async fn experiment(&self, spec: &ExperimentSpec) -> Result<ExperimentSummary> {
        self.post("/v1/experiments", spec).await
    }

    pub async fn create_dispatcher(&self, config: &ScenarioConfig) -> Result<DispatcherCreated> {
        self.post("/v1/dispatchers", config).await
    }

    pub async fn dispatch(&self, id: u64, sessions: &[Session]) -> Result<Vec<DispatchDecision>> {
        let body = SessionBatch {
            sessions: sessions.to_vec(),
        };
        self.post(&format!("/v1/dispatchers/{id}/sessions"), &body).await
    }

    pub async fn dispatcher_report(&self, id: u64) -> Result<RunReport> {
        self.json::<(), _>(Method::GET, &format!("/v1/dispatchers/{id}/report"), None)
            .await
    }

    pub async fn delete_dispatcher(&self, id: u64) -> Result<()> {
        self.call::<()>(Method::DELETE, &format!("/v1/dispatchers/{id}"), None)
            .await?;
        Ok(())
    }
}
