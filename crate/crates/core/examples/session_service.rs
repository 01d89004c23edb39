//! Plays a short interactive session through the HTTP router in process,
//! the way the browser client does.
//!
//! `cargo run --example session_service`

use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use goalsetting::io::default_farm;
use goalsetting::service::{router, AppState};
use goalsetting::smw::GoalSpec;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &axum::Router, method: &str, uri: &str, body: Value) -> Value {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(if body.is_null() {
            Body::empty()
        } else {
            Body::from(body.to_string())
        })
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    serde_json::from_slice(&bytes).unwrap()
}

#[tokio::main]
async fn main() {
    let dir = tempfile::tempdir().unwrap();
    let subgoal = GoalSpec::from_tolerances(vec![0, 1], vec![0.0, 4.0], &[2.03, 6.45], 1.0).unwrap();
    let app = router(Arc::new(AppState::new(dir.path()).with_env(
        "farm",
        default_farm(),
        vec![subgoal],
    )));

    let created = call(
        &app,
        "POST",
        "/sessions",
        json!({"env_id": "farm", "condition": "subgoal"}),
    )
    .await;
    let id = created["session_id"].as_str().unwrap().to_string();
    println!("session {id}");
    println!("showing: {}", created["view"]["active_goal"]);

    for action in [[0.0, 0.0, 0.0], [0.0, 16.0, 512.5], [0.0, 4.0, 0.0]] {
        let step = call(
            &app,
            "POST",
            &format!("/sessions/{id}/step"),
            json!({ "action": action }),
        )
        .await;
        println!(
            "round {}: state {}  subgoal reached {}  now showing {} goal  bonus {}",
            step["round"], step["state"], step["subgoal_achieved"], step["active_goal"]["kind"], step["bonus"]
        );
    }

    let finished = call(&app, "POST", &format!("/sessions/{id}/finish"), Value::Null).await;
    println!("final scores: {finished}");
}
