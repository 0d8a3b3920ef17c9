use fleetcharge_core::api::{ErrorBody, GenerateRequest, GenerateResponse, Instance};
use fleetcharge_core::dispatcher::run_online;
use fleetcharge_core::domain::RunReport;
use fleetcharge_core::harness::ScenarioParams;
use fleetcharge_core::SystemModel;
use fleetcharge_server::{spawn_local, RunningServer};
use reqwest::StatusCode;
use serde_json::{json, Value};

async fn post(server: &RunningServer, path: &str, body: &Value) -> (StatusCode, Value) {
    let response = reqwest::Client::new()
        .post(format!("{}{path}", server.url()))
        .json(body)
        .send()
        .await
        .unwrap();
    let status = response.status();
    let text = response.text().await.unwrap();
    (status, serde_json::from_str(&text).unwrap_or(Value::Null))
}

async fn tiny(server: &RunningServer, seed: u64) -> GenerateResponse {
    let body = serde_json::to_value(GenerateRequest {
        seed,
        params: ScenarioParams::tiny(),
    })
    .unwrap();
    let (status, value) = post(server, "/v1/scenarios/generate", &body).await;
    assert_eq!(status, StatusCode::OK, "{value}");
    serde_json::from_value(value).unwrap()
}

fn instance(generated: &GenerateResponse) -> Value {
    serde_json::to_value(Instance {
        config: generated.config.clone(),
        sessions: generated.sessions.clone(),
    })
    .unwrap()
}

fn kind(body: &Value) -> String {
    serde_json::from_value::<ErrorBody>(body.clone()).unwrap().kind
}

#[tokio::test]
async fn health_reports_ok() {
    let server = spawn_local().await.unwrap();
    let body: Value = reqwest::get(format!("{}/health", server.url()))
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    assert_eq!(body["status"], "ok");
    server.stop().await.unwrap();
}

#[tokio::test]
async fn online_run_matches_the_library() {
    let server = spawn_local().await.unwrap();
    let generated = tiny(&server, 4).await;
    let (status, body) = post(&server, "/v1/runs/online", &instance(&generated)).await;
    assert_eq!(status, StatusCode::OK);
    let remote: RunReport = serde_json::from_value(body).unwrap();
    let model = SystemModel::new(generated.config.clone()).unwrap();
    let local = run_online(&generated.sessions, &model).unwrap();
    assert_eq!(remote, local);
    assert_eq!(remote.instance_hash, generated.instance_hash);
}

#[tokio::test]
async fn malformed_json_is_a_client_error() {
    let server = spawn_local().await.unwrap();
    let response = reqwest::Client::new()
        .post(format!("{}/v1/runs/online", server.url()))
        .header("content-type", "application/json")
        .body("{not json")
        .send()
        .await
        .unwrap();
    assert_eq!(response.status(), StatusCode::BAD_REQUEST);
    let body: Value = response.json().await.unwrap();
    assert_eq!(kind(&body), "bad_json");

    let (status, body) = post(&server, "/v1/runs/online", &json!({ "sessions": [] })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(kind(&body), "bad_json");
}

#[tokio::test]
async fn invalid_config_is_rejected_with_its_violations() {
    let server = spawn_local().await.unwrap();
    let mut generated = tiny(&server, 1).await;
    generated.config.horizon = 0;
    let (status, body) = post(&server, "/v1/runs/online", &instance(&generated)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(kind(&body), "invalid_config");
    assert!(body["message"].as_str().unwrap().contains("horizon"));

    let (status, body) = post(&server, "/v1/scenarios/validate", &instance(&generated)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["valid"], false);
}

#[tokio::test]
async fn exact_refuses_desk_instances() {
    let server = spawn_local().await.unwrap();
    let body = json!({ "seed": 1 });
    let (_, generated) = post(&server, "/v1/scenarios/generate", &body).await;
    let generated: GenerateResponse = serde_json::from_value(generated).unwrap();
    let (status, body) = post(&server, "/v1/offline/exact", &instance(&generated)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(kind(&body), "too_large");
}

#[tokio::test]
async fn compare_refuses_mixed_instances() {
    let server = spawn_local().await.unwrap();
    let a = tiny(&server, 1).await;
    let b = tiny(&server, 2).await;
    let (_, ra) = post(&server, "/v1/runs/online", &instance(&a)).await;
    let (_, rb) = post(&server, "/v1/runs/online", &instance(&b)).await;
    let (status, body) = post(
        &server,
        "/v1/compare",
        &json!({ "reports": [ra, rb], "upper_bound": 1e6 }),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(kind(&body), "instance_mismatch");
}

#[tokio::test]
async fn streamed_dispatcher_matches_a_batch_run() {
    let server = spawn_local().await.unwrap();
    let generated = tiny(&server, 9).await;
    let config = serde_json::to_value(&generated.config).unwrap();
    let (status, created) = post(&server, "/v1/dispatchers", &config).await;
    assert_eq!(status, StatusCode::CREATED);
    let id = created["id"].as_u64().unwrap();

    let (head, tail) = generated.sessions.split_at(generated.sessions.len() / 2);
    for part in [head, tail] {
        let path = format!("/v1/dispatchers/{id}/sessions");
        let (status, decisions) = post(&server, &path, &json!({ "sessions": part })).await;
        assert_eq!(status, StatusCode::OK, "{decisions}");
        assert_eq!(decisions.as_array().unwrap().len(), part.len());
    }
    let streamed: RunReport = reqwest::get(format!("{}/v1/dispatchers/{id}/report", server.url()))
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    let (_, batch) = post(&server, "/v1/runs/online", &instance(&generated)).await;
    assert_eq!(streamed, serde_json::from_value::<RunReport>(batch).unwrap());

    // Going back in time is refused.
    let mut early = generated.sessions[0];
    early.id = 1000;
    early.start_slot = 0;
    let last = generated.sessions.last().unwrap().start_slot;
    if last > 0 {
        let (status, body) = post(
            &server,
            &format!("/v1/dispatchers/{id}/sessions"),
            &json!({ "sessions": [early] }),
        )
        .await;
        assert_eq!(status, StatusCode::BAD_REQUEST);
        assert_eq!(kind(&body), "out_of_order");
    }

    let http = reqwest::Client::new();
    let url = format!("{}/v1/dispatchers/{id}", server.url());
    assert_eq!(http.delete(&url).send().await.unwrap().status(), StatusCode::NO_CONTENT);
    assert_eq!(http.delete(&url).send().await.unwrap().status(), StatusCode::NOT_FOUND);
}
