//! Lobby routes, the live socket and static files.

use std::net::SocketAddr;
use std::path::{Component, Path as FsPath};
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use serde::Deserialize;
use serde_json::json;
use tokio::sync::mpsc;

use super::{Lobby, SeatSpec, ServerMsg, ServiceError};

const INDEX: &str = include_str!("index.html");

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::UnknownRuleset(_) | ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::NoTable(_) => StatusCode::NOT_FOUND,
            ServiceError::TableFull | ServiceError::SeatTaken(_) => StatusCode::CONFLICT,
            ServiceError::UnknownToken => StatusCode::UNAUTHORIZED,
            ServiceError::Rejected { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Stopped => StatusCode::SERVICE_UNAVAILABLE,
        };
        let legal = match &self {
            ServiceError::Rejected { legal, .. } => legal.clone(),
            _ => vec![],
        };
        (status, Json(json!({ "error": self.to_string(), "legal": legal }))).into_response()
    }
}

#[derive(Debug, Deserialize)]
struct CreateTable {
    ruleset: String,
    /// Four entries, each `human` or an agent spec.
    #[serde(default)]
    seats: Option<Vec<String>>,
    #[serde(default)]
    humans: Option<usize>,
    #[serde(default)]
    bot: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
struct JoinTable {
    #[serde(default)]
    seat: Option<usize>,
    #[serde(default)]
    token: Option<String>,
}

#[derive(Debug, Deserialize)]
struct SocketQuery {
    token: String,
}

pub fn router(lobby: Arc<Lobby>) -> Router {
    Router::new()
        .route("/tables", post(create_table).get(list_tables))
        .route("/tables/{id}", get(get_table))
        .route("/tables/{id}/join", post(join_table))
        .route("/tables/{id}/ws", get(socket))
        .route("/replays/{match_id}", get(replay))
        .fallback(get(static_file))
        .with_state(lobby)
}

/// Binds `addr` and serves until the process ends.
pub async fn serve(addr: SocketAddr, lobby: Arc<Lobby>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(lobby)).await
}

async fn create_table(State(lobby): State<Arc<Lobby>>, Json(req): Json<CreateTable>) -> Result<impl IntoResponse, ServiceError> {
    let specs: Vec<String> = match req.seats {
        Some(s) => s,
        None => {
            let humans = req.humans.unwrap_or(1);
            if humans > 4 {
                return Err(ServiceError::BadRequest(format!("{humans} humans")));
            }
            let bot = req.bot.unwrap_or_else(|| "greedy".into());
            (0..4).map(|i| if i < humans { "human".into() } else { bot.clone() }).collect()
        }
    };
    let seats = specs.iter().map(|s| SeatSpec::parse(s)).collect::<Result<Vec<_>, _>>().map_err(ServiceError::BadRequest)?;
    let id = lobby.create_table(&req.ruleset, seats)?;
    Ok((StatusCode::CREATED, Json(json!({ "table_id": id, "table": lobby.table(&id)? }))))
}

async fn list_tables(State(lobby): State<Arc<Lobby>>) -> impl IntoResponse {
    Json(lobby.tables())
}

async fn get_table(State(lobby): State<Arc<Lobby>>, Path(id): Path<String>) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(lobby.table(&id)?))
}

async fn join_table(
    State(lobby): State<Arc<Lobby>>,
    Path(id): Path<String>,
    body: Option<Json<JoinTable>>,
) -> Result<impl IntoResponse, ServiceError> {
    let req = body.map(|b| b.0).unwrap_or_default();
    let joined = lobby.join(&id, req.seat, req.token).await?;
    Ok(Json(json!({ "table_id": id, "token": joined.token, "seat": joined.seat })))
}

async fn replay(State(lobby): State<Arc<Lobby>>, Path(match_id): Path<String>) -> Response {
    match lobby.store().get_raw(&match_id) {
        Ok(Some(line)) => ([(header::CONTENT_TYPE, "application/json")], line).into_response(),
        Ok(None) => (StatusCode::NOT_FOUND, Json(json!({ "error": format!("no match `{match_id}`") }))).into_response(),
        Err(e) => (StatusCode::SERVICE_UNAVAILABLE, Json(json!({ "error": e.to_string() }))).into_response(),
    }
}

async fn socket(
    State(lobby): State<Arc<Lobby>>,
    Path(id): Path<String>,
    Query(q): Query<SocketQuery>,
    ws: WebSocketUpgrade,
) -> Response {
    ws.on_upgrade(move |socket| play(socket, lobby, id, q.token))
}

fn text(msg: &ServerMsg) -> Message {
    Message::Text(serde_json::to_string(msg).expect("messages serialize").into())
}

/// Relays one client's lines to its table and the table's messages back.
async fn play(socket: WebSocket, lobby: Arc<Lobby>, id: String, token: String) {
    let (mut sink, mut stream) = socket.split();
    let (tx, mut rx) = mpsc::unbounded_channel();
    let conn = lobby.next_conn();
    if let Err(e) = lobby.attach(&id, &token, conn, tx).await {
        let _ = sink.send(text(&ServerMsg::Error { message: e.to_string() })).await;
        let _ = sink.close().await;
        return;
    }
    loop {
        tokio::select! {
            out = rx.recv() => {
                let Some(msg) = out else { break };
                if sink.send(text(&msg)).await.is_err() {
                    break;
                }
            }
            incoming = stream.next() => {
                let line = match incoming {
                    Some(Ok(Message::Text(t))) => t.to_string(),
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                let reply = match lobby.submit(&id, &token, line.trim()).await {
                    Ok(()) => None,
                    Err(ServiceError::Rejected { reason, legal }) => Some(ServerMsg::Rejected { reason, legal }),
                    Err(e) => Some(ServerMsg::Error { message: e.to_string() }),
                };
                if let Some(r) = reply {
                    if sink.send(text(&r)).await.is_err() {
                        break;
                    }
                }
            }
        }
    }
    lobby.detach(&id, &token, conn).await;
}

fn content_type(path: &FsPath) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js" | "mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        Some("wasm") => "application/wasm",
        _ => "application/octet-stream",
    }
}

async fn static_file(State(lobby): State<Arc<Lobby>>, uri: Uri) -> Response {
    let rel = uri.path().trim_start_matches('/');
    let rel = if rel.is_empty() { "index.html" } else { rel };
    let rel_path = FsPath::new(rel);
    if rel_path.components().any(|c| !matches!(c, Component::Normal(_))) {
        return StatusCode::BAD_REQUEST.into_response();
    }
    if let Some(dir) = &lobby.config().static_dir {
        let path = dir.join(rel_path);
        if let Ok(bytes) = tokio::fs::read(&path).await {
            return ([(header::CONTENT_TYPE, content_type(&path))], bytes).into_response();
        }
    }
    if rel == "index.html" {
        return ([(header::CONTENT_TYPE, "text/html; charset=utf-8")], INDEX).into_response();
    }
    StatusCode::NOT_FOUND.into_response()
}
