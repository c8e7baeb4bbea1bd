//! WebSocket bridge to the engine: one session per connection, the server
//! scores every frame and the client only renders.

pub mod protocol;
pub mod session;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use adaptsel_core::config::AdapterConfig;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Query, State};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde_json::json;
use tower_http::services::ServeDir;

pub use protocol::*;
pub use session::{SceneCatalog, Session};

pub const BUILD: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

pub struct ServiceOptions {
    pub catalog: SceneCatalog,
    pub default_scene: String,
    pub config: AdapterConfig,
    /// Sandbox bundle served at `/`.
    pub static_dir: PathBuf,
    /// Where to write each session's trace when it closes.
    pub trace_dir: Option<PathBuf>,
}

struct AppState {
    options: ServiceOptions,
    next_id: AtomicU64,
}

pub fn router(options: ServiceOptions) -> Router {
    let static_dir = options.static_dir.clone();
    let state = Arc::new(AppState {
        options,
        next_id: AtomicU64::new(1),
    });
    Router::new()
        .route("/health", get(health))
        .route("/scenes", get(scenes))
        .route("/ws", get(ws))
        .fallback_service(ServeDir::new(static_dir))
        .with_state(state)
}

/// Serves until ctrl-c.
pub async fn serve(
    listener: tokio::net::TcpListener,
    options: ServiceOptions,
) -> std::io::Result<()> {
    axum::serve(listener, router(options))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn health(State(state): State<Arc<AppState>>) -> Json<serde_json::Value> {
    let config = &state.options.config;
    Json(json!({
        "v": PROTOCOL_VERSION,
        "status": "ok",
        "build": BUILD,
        "preset": config.preset,
        "config_hash": config.hash(),
    }))
}

async fn scenes(State(state): State<Arc<AppState>>) -> Json<serde_json::Value> {
    let list: Vec<_> = state
        .options
        .catalog
        .names()
        .map(|(name, n)| json!({"name": name, "targets": n}))
        .collect();
    Json(json!({
        "v": PROTOCOL_VERSION,
        "default": state.options.default_scene,
        "scenes": list,
    }))
}

async fn ws(
    State(state): State<Arc<AppState>>,
    Query(query): Query<HashMap<String, String>>,
    upgrade: WebSocketUpgrade,
) -> Response {
    let opts = &state.options;
    let scene_name = query.get("scene").unwrap_or(&opts.default_scene).clone();
    let Some(scene) = opts.catalog.get(&scene_name) else {
        return (
            axum::http::StatusCode::NOT_FOUND,
            format!("no bundled scene `{scene_name}`"),
        )
            .into_response();
    };
    let config = match query.get("preset") {
        Some(p) => match AdapterConfig::preset(p) {
            Ok(c) => c,
            Err(e) => return (axum::http::StatusCode::BAD_REQUEST, e.to_string()).into_response(),
        },
        None => opts.config.clone(),
    };
    let id = state.next_id.fetch_add(1, Ordering::Relaxed);
    let session = Session::new(id, &scene_name, scene, config, opts.trace_dir.is_some());
    upgrade.on_upgrade(move |socket| run_session(socket, session, state))
}

async fn send(socket: &mut WebSocket, message: &ServerMessage) -> bool {
    let text = serde_json::to_string(message).expect("messages serialize");
    socket.send(Message::Text(text.into())).await.is_ok()
}

async fn run_session(mut socket: WebSocket, mut session: Session, state: Arc<AppState>) {
    if !send(&mut socket, &ServerBody::Session(session.info()).into()).await {
        return;
    }
    while let Some(Ok(message)) = socket.recv().await {
        let reply = match message {
            Message::Text(text) => session.handle_text(text.as_str(), &state.options.catalog),
            Message::Binary(_) => ServerBody::Error {
                message: "binary frames are not supported".into(),
            }
            .into(),
            Message::Close(_) => break,
            _ => continue,
        };
        if !send(&mut socket, &reply).await {
            break;
        }
    }
    if let (Some(dir), Some(trace)) = (&state.options.trace_dir, session.trace()) {
        let path = dir.join(format!("session-{}.jsonl", session.id));
        if let Err(e) = trace.save(&path) {
            eprintln!("could not write {}: {e}", path.display());
        }
    }
}
