//! HTTP service driving the debugger UI.
//!
//! Sessions live in memory and expire after an idle period. Each session
//! has its own lock, so requests to one session are serialized while
//! distinct sessions proceed independently.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value as JsonValue};
use simplipy_core::{simplify, History, Machine};
use tower_http::cors::CorsLayer;
use tower_http::services::{ServeDir, ServeFile};

use crate::commands::{diagnostics_json, DEFAULT_MAX_STEPS};

pub const DEFAULT_TTL: Duration = Duration::from_secs(60 * 60);

#[derive(Debug, Clone)]
pub struct Config {
    /// Upper bound on recorded entries per session.
    pub max_steps: usize,
    pub static_dir: Option<PathBuf>,
    pub ttl: Duration,
    /// Allow cross-origin requests from a separately served UI.
    pub dev: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_steps: DEFAULT_MAX_STEPS,
            static_dir: None,
            ttl: DEFAULT_TTL,
            dev: false,
        }
    }
}

struct Session {
    history: History,
    last_used: Instant,
}

type SessionRef = Arc<Mutex<Session>>;

struct AppState {
    config: Config,
    sessions: Mutex<HashMap<String, SessionRef>>,
}

impl AppState {
    fn get(&self, id: &str) -> Option<SessionRef> {
        let mut sessions = self.sessions.lock().expect("session table lock");
        let now = Instant::now();
        let ttl = self.config.ttl;
        sessions.retain(|_, s| match s.try_lock() {
            Ok(s) => now.duration_since(s.last_used) < ttl,
            // In use right now, so not idle.
            Err(_) => true,
        });
        sessions.get(id).cloned()
    }
}

#[derive(Deserialize)]
struct SourceBody {
    source: String,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn parse_body(body: &Bytes) -> Result<SourceBody, Box<Response>> {
    serde_json::from_slice(body)
        .map_err(|e| Box::new(error(StatusCode::BAD_REQUEST, format!("malformed request body: {e}"))))
}

/// The current entry of a session, as returned by every stepping endpoint.
pub fn entry_view(h: &History) -> JsonValue {
    let e = h.current();
    json!({
        "state": e.state,
        "label": e.label,
        "preLoc": e.pre_loc,
        "category": e.category,
        "cursor": h.cursor(),
        "total": h.total(),
    })
}

pub fn router(config: Config) -> Router {
    let dev = config.dev;
    let static_dir = config.static_dir.clone();
    let state = Arc::new(AppState {
        config,
        sessions: Mutex::new(HashMap::new()),
    });
    let api = Router::new()
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(show_session).delete(delete_session))
        .route("/api/sessions/{id}/step", post(step_session))
        .route("/api/sessions/{id}/back", post(back_session))
        .route("/api/sessions/{id}/reset", post(reset_session))
        .route("/api/simplify", post(simplify_handler))
        .with_state(state);
    let app = match static_dir {
        Some(dir) => {
            let index = dir.join("index.html");
            api.fallback_service(ServeDir::new(dir).fallback(ServeFile::new(index)))
        }
        None => api.route("/", get(placeholder_index)),
    };
    if dev {
        app.layer(CorsLayer::permissive())
    } else {
        app
    }
}

async fn placeholder_index() -> Html<&'static str> {
    Html(
        "<!doctype html><html><head><title>SimpliPy</title></head><body>\
         <p>No UI assets configured. Start the service with <code>--static-dir</code>.</p>\
         </body></html>",
    )
}

async fn create_session(State(app): State<Arc<AppState>>, body: Bytes) -> Response {
    let body = match parse_body(&body) {
        Ok(b) => b,
        Err(r) => return *r,
    };
    let machine = match Machine::from_source(&body.source) {
        Ok(m) => m,
        Err(d) => return (StatusCode::UNPROCESSABLE_ENTITY, Json(diagnostics_json(&d))).into_response(),
    };
    let analysis = machine.analysis();
    let mut view = json!({
        "cfg": analysis.cfg,
        "scopes": analysis.scopes,
        "abstraction": analysis.abstraction,
        "ctf": analysis.control,
        "program": machine.program().source_lines(),
    });
    let history = History::new(machine);
    let entry = entry_view(&history);
    let obj = view.as_object_mut().expect("object");
    for (k, v) in entry.as_object().expect("object") {
        obj.insert(k.clone(), v.clone());
    }
    let id = uuid::Uuid::new_v4().to_string();
    obj.insert("sessionId".into(), JsonValue::String(id.clone()));
    let session = Session {
        history,
        last_used: Instant::now(),
    };
    app.sessions
        .lock()
        .expect("session table lock")
        .insert(id, Arc::new(Mutex::new(session)));
    (StatusCode::CREATED, Json(view)).into_response()
}

fn with_session(app: &AppState, id: &str, f: impl FnOnce(&mut History, usize)) -> Response {
    let Some(session) = app.get(id) else {
        return error(StatusCode::NOT_FOUND, format!("unknown session {id}"));
    };
    let mut s = session.lock().expect("session lock");
    s.last_used = Instant::now();
    f(&mut s.history, app.config.max_steps);
    Json(entry_view(&s.history)).into_response()
}

async fn show_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    with_session(&app, &id, |_, _| {})
}

async fn step_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    with_session(&app, &id, |h, max| {
        // Past the cap only recorded entries are replayed.
        if h.cursor() + 1 < h.total() || h.total() < max {
            h.advance();
        }
    })
}

async fn back_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    with_session(&app, &id, |h, _| {
        h.step_back();
    })
}

async fn reset_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    with_session(&app, &id, |h, _| h.reset())
}

async fn delete_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let removed = app.sessions.lock().expect("session table lock").remove(&id);
    match removed {
        Some(_) => StatusCode::NO_CONTENT.into_response(),
        None => error(StatusCode::NOT_FOUND, format!("unknown session {id}")),
    }
}

async fn simplify_handler(body: Bytes) -> Response {
    let body = match parse_body(&body) {
        Ok(b) => b,
        Err(r) => return *r,
    };
    Json(simplify(&body.source)).into_response()
}
