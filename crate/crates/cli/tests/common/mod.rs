//! In-process HTTP client for the service router, and helpers for running
//! the built binary.
#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use simplipy::service::{router, Config};
use tower::ServiceExt;

pub struct Client {
    app: Router,
}

impl Client {
    pub fn new() -> Self {
        Client::with_config(Config::default())
    }

    pub fn with_config(config: Config) -> Self {
        Client { app: router(config) }
    }

    pub async fn raw(&self, method: Method, uri: &str, body: Option<Vec<u8>>) -> (StatusCode, Vec<u8>) {
        let mut req = Request::builder().method(method).uri(uri);
        if body.is_some() {
            req = req.header("content-type", "application/json");
        }
        let req = req.body(body.map(Body::from).unwrap_or_else(Body::empty)).unwrap();
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        (status, bytes.to_vec())
    }

    pub async fn call(&self, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let (status, bytes) = self.raw(method, uri, body.map(|b| b.to_string().into_bytes())).await;
        let v = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap_or_else(|e| panic!("non-JSON response: {e}"))
        };
        (status, v)
    }

    pub async fn create(&self, source: &str) -> (StatusCode, Value) {
        self.call(Method::POST, "/api/sessions", Some(json!({ "source": source })))
            .await
    }

    pub async fn step(&self, id: &str) -> (StatusCode, Value) {
        self.call(Method::POST, &format!("/api/sessions/{id}/step"), None).await
    }

    pub async fn back(&self, id: &str) -> (StatusCode, Value) {
        self.call(Method::POST, &format!("/api/sessions/{id}/back"), None).await
    }
}

/// The fields of a service view that correspond to one trace entry.
pub fn entry_of(view: &Value) -> Value {
    json!({
        "state": view["state"],
        "label": view["label"],
        "preLoc": view["preLoc"],
        "category": view["category"],
    })
}

pub fn is_terminal(view: &Value) -> bool {
    view["state"]["status"]["kind"] != "running"
}

pub fn simplipy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simplipy"))
        .args(args)
        .output()
        .expect("run simplipy binary")
}

pub fn write_temp(dir: &Path, name: &str, src: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, src).unwrap();
    p.to_string_lossy().into_owned()
}

/// Steps a fresh session until its state is terminal or `limit` views were
/// collected, returning every view from creation on.
pub async fn walk(client: &Client, source: &str, limit: usize) -> Vec<Value> {
    let (status, created) = client.create(source).await;
    assert_eq!(status, StatusCode::CREATED, "{created}");
    let id = created["sessionId"].as_str().unwrap().to_string();
    let mut views = vec![created];
    while !is_terminal(views.last().unwrap()) && views.len() < limit {
        let (status, v) = client.step(&id).await;
        assert_eq!(status, StatusCode::OK);
        if v["cursor"] == views.last().unwrap()["cursor"] {
            break;
        }
        views.push(v);
    }
    views
}
