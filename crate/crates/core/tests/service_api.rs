use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use fl_core::examples::RUNNING_EXAMPLE;
use fl_core::expert::{Answer, Label};
use fl_core::fpi::Fpi;
use fl_core::heuristics::HeuristicId;
use fl_core::search::SearchConfig;
use fl_core::service::{router, AppState, ServiceConfig};
use fl_core::session::{Session, SessionConfig};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    router(AppState::new(ServiceConfig::default()))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn create(app: &Router, body: Value) -> (StatusCode, Value) {
    call(app, "POST", "/sessions", Some(body)).await
}

fn query_ids(res: &Value) -> Vec<u64> {
    res["currentQuery"]["axioms"].as_array().unwrap().iter().map(|a| a["axiomId"].as_u64().unwrap()).collect()
}

#[tokio::test]
async fn singleton_session_on_running_example() {
    let app = app();
    let (status, res) =
        create(&app, json!({"kbId": "running-example", "mode": "singleton", "heuristic": "ENT", "seed": 1})).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(res["status"], "running");
    assert_eq!(res["currentQuery"]["axioms"].as_array().unwrap().len(), 1);
    assert_eq!(res["remainingDiagnosesCount"], 3);
    let sizes = res["qpartitionSizes"].as_array().unwrap();
    assert_eq!(sizes.len(), 2);
    let rendered = res["currentQuery"]["axioms"][0]["rendering"].as_str().unwrap();
    assert!(rendered.contains("->"));
    assert_eq!(res["diagnoses"][0]["rendering"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn malformed_and_violation_free_kbs() {
    let app = app();
    let (status, res) =
        create(&app, json!({"kbText": "o: a ->\n", "mode": "normal", "heuristic": "ENT", "seed": 0})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(res["line"], 1);
    let (status, _) =
        create(&app, json!({"kbText": "o: a -> b\nb: a\n", "mode": "normal", "heuristic": "ENT", "seed": 0})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) =
        create(&app, json!({"kbId": "running-example", "mode": "normal", "heuristic": "XYZ", "seed": 0})).await;
    assert!(status.is_client_error());
    let (status, _) = create(
        &app,
        json!({"kbId": "running-example", "mode": "normal", "heuristic": "ENT", "expertType": "pragmatist"}),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) =
        create(&app, json!({"kbId": "running-example", "kbText": RUNNING_EXAMPLE, "mode": "normal", "heuristic": "ENT"}))
            .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn answers_progress_and_stale_steps_conflict() {
    let app = app();
    let (_, res) = create(&app, json!({"kbId": "running-example", "mode": "singleton", "heuristic": "ENT", "seed": 1})).await;
    let id = res["id"].as_str().unwrap().to_string();
    let step = res["currentQuery"]["step"].as_u64().unwrap();
    let before = res["remainingDiagnosesCount"].as_u64().unwrap();
    let ax = query_ids(&res)[0];
    let uri = format!("/sessions/{id}/answer");

    let (status, _) = call(&app, "POST", &uri, Some(json!({"step": step, "perAxiom": []}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", &uri, Some(json!({"step": step}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let body = json!({"step": step, "perAxiom": [{"axiomId": ax, "label": "n"}]});
    let (status, next) = call(&app, "POST", &uri, Some(body.clone())).await;
    assert_eq!(status, StatusCode::OK);
    let after = next["remainingDiagnosesCount"].as_u64().unwrap();
    assert!(after < before || next["history"].as_array().unwrap().len() == 1);
    let (status, _) = call(&app, "POST", &uri, Some(body)).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let (status, _) = call(&app, "GET", "/sessions/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "POST", "/sessions/nope/answer", Some(json!({"step": 1, "wholeQuery": "y"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

/// Answers each query with `y` for every axiom outside `faulty`.
async fn drive(app: &Router, id: &str, mut res: Value, faulty: &[u64]) -> Value {
    while res["status"] == "running" {
        let step = res["currentQuery"]["step"].clone();
        let labels: Vec<Value> = query_ids(&res)
            .into_iter()
            .map(|a| json!({"axiomId": a, "label": if faulty.contains(&a) { "n" } else { "y" }}))
            .collect();
        let (status, next) =
            call(app, "POST", &format!("/sessions/{id}/answer"), Some(json!({"step": step, "perAxiom": labels}))).await;
        assert_eq!(status, StatusCode::OK, "{next}");
        res = next;
    }
    res
}

#[tokio::test]
async fn session_runs_to_done_and_get_reports_final_diagnosis() {
    let app = app();
    let (_, res) = create(&app, json!({"kbId": "running-example", "mode": "normal", "heuristic": "ENT", "seed": 4})).await;
    let id = res["id"].as_str().unwrap().to_string();
    assert!(res["currentQuery"].is_object());
    let done = drive(&app, &id, res, &[3]).await;
    assert_eq!(done["status"], "done");
    assert!(done["currentQuery"].is_null());
    let (status, got) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(got["status"], "done");
    assert_eq!(got["finalDiagnosis"]["axiomIds"], json!([3]));
    assert_eq!(got["finalDiagnosis"]["rendering"], json!(["au -> e & p"]));
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/answer"), Some(json!({"step": 9, "wholeQuery": "y"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn whole_query_yes_makes_every_axiom_positive() {
    let app = app();
    let kb = fl_core::examples::find("layered-a20-f2").unwrap().text;
    for seed in 0..20 {
        let (_, res) = create(&app, json!({"kbText": kb, "mode": "normal", "heuristic": "ENT", "seed": seed})).await;
        let q = query_ids(&res);
        if q.len() < 2 {
            continue;
        }
        let id = res["id"].as_str().unwrap();
        let step = res["currentQuery"]["step"].clone();
        let (status, next) =
            call(&app, "POST", &format!("/sessions/{id}/answer"), Some(json!({"step": step, "wholeQuery": "y"}))).await;
        assert_eq!(status, StatusCode::OK);
        let rec = &next["history"][0];
        assert_eq!(rec["label"], "y");
        assert_eq!(rec["positives"], json!(q));
        return;
    }
    panic!("no seed produced a query with two or more axioms");
}

#[tokio::test]
async fn kb_catalog() {
    let (status, res) = call(&app(), "GET", "/kbs", None).await;
    assert_eq!(status, StatusCode::OK);
    let kbs = res.as_array().unwrap();
    assert!(kbs.iter().any(|kb| kb["id"] == "running-example" && kb["kbText"] == RUNNING_EXAMPLE));
}

fn strip_timing(mut v: Value) -> Value {
    if let Some(o) = v.as_object_mut() {
        o.remove("timePerQueryMs");
    }
    v
}

#[tokio::test]
async fn api_and_library_logs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(AppState::new(ServiceConfig { persist_dir: Some(dir.path().into()), ..ServiceConfig::default() }));
    let kb = fl_core::examples::find("layered-a20-f1").unwrap().text;
    let truth: Vec<u64> = vec![5];
    for (mode, heuristic) in [("normal", "ENT"), ("singleton", "SPL"), ("normal", "RIO")] {
        let (_, res) = create(&app, json!({"kbText": kb, "mode": mode, "heuristic": heuristic, "seed": 11})).await;
        let id = res["id"].as_str().unwrap().to_string();
        let done = drive(&app, &id, res, &truth).await;
        assert_eq!(done["status"], "done");

        let h: HeuristicId = heuristic.parse().unwrap();
        let config = SessionConfig::new(SearchConfig::new(h, mode == "singleton", 11), None, 11);
        let mut lib = Session::start(Fpi::parse(kb).unwrap(), config).unwrap();
        while let Some(p) = lib.pending() {
            let labels: Vec<_> = p
                .query
                .iter()
                .map(|a| (*a, if truth.contains(&(a.0 as u64)) { Label::N } else { Label::Y }))
                .collect();
            let ans = Answer::from_labels(&p.query.clone(), &labels).unwrap();
            lib.submit(ans).unwrap();
        }
        let mut buf = Vec::new();
        lib.write_log(&mut buf).unwrap();
        let persisted = std::fs::read_to_string(dir.path().join(format!("{id}.jsonl"))).unwrap();
        let parse = |s: &str| -> Vec<Value> { s.lines().map(|l| strip_timing(serde_json::from_str(l).unwrap())).collect() };
        assert_eq!(parse(&persisted), parse(std::str::from_utf8(&buf).unwrap()), "{mode} {heuristic}");
    }
}

#[tokio::test]
async fn idle_sessions_are_evicted() {
    let state = AppState::new(ServiceConfig { idle_timeout: Duration::ZERO, persist_dir: None });
    let app = router(state.clone());
    let (status, _) = create(&app, json!({"kbId": "running-example", "mode": "normal", "heuristic": "ENT"})).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(state.len(), 1);
    assert_eq!(state.evict_idle(), 1);
    assert!(state.is_empty());
}
