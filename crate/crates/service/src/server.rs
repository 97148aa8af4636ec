//! HTTP endpoints and the bidirectional `/updates` stream.
//!
//! | route                   | body / reply                                  |
//! |-------------------------|-----------------------------------------------|
//! | `GET /scene`            | current scene document                        |
//! | `POST /snapshot`        | snapshot document -> diff, or `null` if staged |
//! | `POST /filter`          | filter document -> diff                       |
//! | `POST /refresh`         | diff (empty when nothing was staged)          |
//! | `GET /screenshot/{hash}`| PNG bytes                                     |
//! | `GET /updates`          | websocket, see [`stream_updates`]             |

use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use domcity_core::query::FilterSpec;
use domcity_core::scene::SceneDiff;
use serde_json::Value;
use tokio::sync::broadcast::error::{RecvError, TryRecvError};

use crate::engine::Engine;
use crate::session::SessionError;
use crate::wire;

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/scene", get(get_scene))
        .route("/snapshot", post(post_snapshot))
        .route("/filter", post(post_filter))
        .route("/refresh", post(post_refresh))
        .route("/screenshot/{hash}", get(get_screenshot))
        .route("/updates", get(updates))
        .with_state(engine)
}

pub async fn serve(engine: Arc<Engine>, listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(engine)).await
}

fn json(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error_body(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

fn bad_request(message: impl std::fmt::Display) -> Response {
    json(StatusCode::BAD_REQUEST, error_body(&message.to_string()))
}

fn diff_response(result: Result<SceneDiff, SessionError>) -> Response {
    match result {
        Ok(diff) => json(StatusCode::OK, wire::diff_to_json(&diff)),
        Err(e) => bad_request(e),
    }
}

async fn get_scene(State(engine): State<Arc<Engine>>) -> Response {
    json(StatusCode::OK, wire::scene_to_json(&engine.scene()))
}

async fn post_snapshot(State(engine): State<Arc<Engine>>, body: String) -> Response {
    let snapshot = match wire::snapshot_from_json(&body) {
        Ok(s) => s,
        Err(e) => return bad_request(e),
    };
    match engine.handle_snapshot(snapshot) {
        Ok(Some(diff)) => json(StatusCode::OK, wire::diff_to_json(&diff)),
        Ok(None) => json(StatusCode::ACCEPTED, "null".to_string()),
        Err(e) => bad_request(e),
    }
}

async fn post_filter(State(engine): State<Arc<Engine>>, body: String) -> Response {
    match serde_json::from_str::<FilterSpec>(&body) {
        Ok(filter) => diff_response(engine.set_filter(filter)),
        Err(e) => bad_request(e),
    }
}

async fn post_refresh(State(engine): State<Arc<Engine>>) -> Response {
    diff_response(engine.refresh())
}

async fn get_screenshot(State(engine): State<Arc<Engine>>, Path(hash): Path<String>) -> Response {
    match engine.screenshot(&hash) {
        Some(png) => (
            StatusCode::OK,
            [(header::CONTENT_TYPE, "image/png")],
            png.as_ref().clone(),
        )
            .into_response(),
        None => json(StatusCode::NOT_FOUND, error_body("no such screenshot")),
    }
}

async fn updates(ws: WebSocketUpgrade, State(engine): State<Arc<Engine>>) -> Response {
    ws.on_upgrade(move |socket| stream_updates(engine, socket))
}

fn scene_frame(engine: &Engine) -> String {
    format!(
        r#"{{"type":"scene","scene":{}}}"#,
        wire::scene_to_compact_json(&engine.scene())
    )
}

/// Sends `{"type":"scene"}` with the current scene, then one
/// `{"type":"diff"}` frame per published revision. Accepts
/// `{"type":"snapshot","snapshot":..}`, `{"type":"filter","filter":..}` and
/// `{"type":"refresh"}` frames, answering each with an `ack` or `error`.
/// A subscriber that falls behind receives a fresh scene frame.
pub async fn stream_updates(engine: Arc<Engine>, mut socket: WebSocket) {
    let (scene, mut updates) = engine.subscribe();
    let first = format!(
        r#"{{"type":"scene","scene":{}}}"#,
        wire::scene_to_compact_json(&scene)
    );
    if socket.send(Message::Text(first.into())).await.is_err() {
        return;
    }
    loop {
        let outgoing = tokio::select! {
            update = updates.recv() => match update {
                Ok(diff) => vec![diff_frame(&diff)],
                Err(RecvError::Lagged(skipped)) => {
                    log::warn!("update subscriber lagged by {skipped} frames; resending scene");
                    vec![scene_frame(&engine)]
                }
                Err(RecvError::Closed) => break,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(text))) => {
                    let reply = handle_frame(&engine, text.as_str());
                    // Diffs caused by the command go out before its ack.
                    let mut frames = Vec::new();
                    loop {
                        match updates.try_recv() {
                            Ok(diff) => frames.push(diff_frame(&diff)),
                            Err(TryRecvError::Lagged(_)) => {
                                frames.clear();
                                frames.push(scene_frame(&engine));
                            }
                            Err(_) => break,
                        }
                    }
                    frames.push(reply);
                    frames
                }
                Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                Some(Ok(_)) => continue,
            },
        };
        for frame in outgoing {
            if socket.send(Message::Text(frame.into())).await.is_err() {
                return;
            }
        }
    }
}

fn diff_frame(diff: &SceneDiff) -> String {
    format!(r#"{{"type":"diff","diff":{}}}"#, wire::diff_to_json(diff))
}

fn handle_frame(engine: &Engine, text: &str) -> String {
    let error = |message: String| serde_json::json!({ "type": "error", "message": message }).to_string();
    let ack = |revision: Option<u64>| serde_json::json!({ "type": "ack", "revision": revision }).to_string();

    let mut frame: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => return error(format!("invalid frame: {e}")),
    };
    match frame.get("type").and_then(Value::as_str) {
        Some("snapshot") => {
            match wire::snapshot_from_value(frame["snapshot"].take()) {
                Ok(snapshot) => match engine.handle_snapshot(snapshot) {
                    Ok(diff) => ack(diff.map(|d| d.target_revision)),
                    Err(e) => error(e.to_string()),
                },
                Err(e) => error(e.to_string()),
            }
        }
        Some("filter") => match serde_json::from_value::<FilterSpec>(frame["filter"].take()) {
            Ok(filter) => match engine.set_filter(filter) {
                Ok(diff) => ack(Some(diff.target_revision)),
                Err(e) => error(e.to_string()),
            },
            Err(e) => error(format!("invalid filter: {e}")),
        },
        Some("refresh") => match engine.refresh() {
            Ok(diff) => ack(Some(diff.target_revision)),
            Err(e) => error(e.to_string()),
        },
        other => error(format!("unknown frame type {other:?}")),
    }
}
