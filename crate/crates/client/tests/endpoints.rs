use fleetcharge_client::{Client, ClientError};
use fleetcharge_core::api::{CompareRequest, Instance};
use fleetcharge_core::domain::ResourceFamily;
use fleetcharge_core::harness::{Algorithm, ExperimentSpec, ScenarioParams, Suite, VerifyOptions};
use fleetcharge_server::{spawn_local, RunningServer};

async fn setup() -> (RunningServer, Client, Instance) {
    let server = spawn_local().await.unwrap();
    let client = Client::new(server.url());
    let generated = client.generate(11, &ScenarioParams::tiny()).await.unwrap();
    let instance = Instance {
        config: generated.config,
        sessions: generated.sessions,
    };
    (server, client, instance)
}

#[tokio::test]
async fn runs_bounds_and_comparison_agree() {
    let (server, client, instance) = setup().await;
    assert_eq!(client.health().await.unwrap()["status"], "ok");
    assert!(client.validate(&instance).await.unwrap().valid);

    let online = client.run_online(&instance).await.unwrap();
    let baseline = client.run_baseline(&instance, 0.5).await.unwrap();
    assert_eq!(baseline.algorithm, "baseline-50");
    let ub = client.upper_bound(&instance).await.unwrap();
    let exact = client.exact(&instance).await.unwrap();
    assert!(ub.welfare + 1e-9 >= exact.welfare);
    assert!(exact.welfare + 1e-9 >= online.welfare);

    let out = client
        .compare(&CompareRequest {
            reports: vec![online.clone(), baseline],
            upper_bound: ub.welfare,
            optimum: Some(exact.welfare),
            alpha: None,
        })
        .await
        .unwrap();
    assert_eq!(out.comparison.rows.len(), 2);
    assert_eq!(out.comparison.competitive_ok, Some(true));
    assert_eq!(out.comparison.instance_hash, online.instance_hash);
    server.stop().await.unwrap();
}

#[tokio::test]
async fn verify_and_experiment() {
    let (server, client, instance) = setup().await;
    let options = VerifyOptions {
        suite: Suite::Dapr,
        grid_points: 200,
        family: Some(ResourceFamily::Energy),
        alpha: None,
    };
    let report = client.verify(&instance, &options).await.unwrap();
    assert!(report.passed);
    assert_eq!(report.dapr.len(), 1);

    let mut spec = ExperimentSpec::new(3, ScenarioParams::tiny(), 2);
    spec.algorithms.push(Algorithm::OfflineExact);
    let summary = client.experiment(&spec).await.unwrap();
    assert_eq!(summary.comparisons.len(), 2);
    assert!(summary.csv.starts_with("instance_hash,algorithm,"), "{}", summary.csv);
    server.stop().await.unwrap();
}

#[tokio::test]
async fn trace_ingestion_replaces_prices() {
    let (server, client, instance) = setup().await;
    let horizon = instance.config.horizon;
    let mut csv = String::from("slot,facility,value\n");
    for t in 0..horizon {
        csv.push_str(&format!("{t},0,0.31\n"));
    }
    let config = client.ingest_traces(&instance.config, Some(csv), None).await.unwrap();
    assert!((0..horizon).all(|t| config.facilities[0].grid_price.at(t) == 0.31));

    let short = "slot,facility,value\n0,0,0.3\n".to_string();
    let err = client
        .ingest_traces(&instance.config, Some(short), None)
        .await
        .unwrap_err();
    assert_eq!(err.kind(), Some("trace"), "{err}");
    server.stop().await.unwrap();
}

#[tokio::test]
async fn live_dispatcher_lifecycle() {
    let (server, client, instance) = setup().await;
    let created = client.create_dispatcher(&instance.config).await.unwrap();
    let decisions = client.dispatch(created.id, &instance.sessions).await.unwrap();
    assert_eq!(decisions.len(), instance.sessions.len());
    let report = client.dispatcher_report(created.id).await.unwrap();
    assert_eq!(report, client.run_online(&instance).await.unwrap());
    client.delete_dispatcher(created.id).await.unwrap();
    let err = client.dispatcher_report(created.id).await.unwrap_err();
    assert!(matches!(err, ClientError::Api { status, .. } if status.as_u16() == 404));
    server.stop().await.unwrap();
}

#[tokio::test]
async fn unreachable_server_is_a_transport_error() {
    let client = Client::new("http://127.0.0.1:1");
    assert!(matches!(client.health().await, Err(ClientError::Transport { .. })));
}
