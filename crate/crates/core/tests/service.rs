use std::collections::HashSet;
use std::sync::Arc;
use std::time::Duration;

use futures::{SinkExt, StreamExt};
use mcr_balance::agents::Scripted;
use mcr_balance::engine::{run_match, Action, GameState, MatchConfig, MatchRecord, RequestKind};
use mcr_balance::ruleset::{CompensationVector, RuleSet};
use mcr_balance::service::{router, Lobby, MemoryStore, ServerMsg, ServiceConfig};
use mcr_balance::tiles::Wall;
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;

async fn start(config: ServiceConfig) -> (String, Arc<Lobby>) {
    let lobby = Lobby::new(config, Arc::new(MemoryStore::default()));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let app = router(lobby.clone());
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    (format!("127.0.0.1:{}", addr.port()), lobby)
}

fn fast() -> ServiceConfig {
    ServiceConfig { act_timeout_ms: 5_000, claim_timeout_ms: 5_000, takeover_grace_ms: 5_000, seed: 5, static_dir: None }
}

async fn post(base: &str, path: &str, body: Value) -> (u16, Value) {
    let r = reqwest::Client::new().post(format!("http://{base}{path}")).json(&body).send().await.unwrap();
    let status = r.status().as_u16();
    (status, r.json().await.unwrap_or(Value::Null))
}

async fn get_text(base: &str, path: &str) -> (u16, String) {
    let r = reqwest::get(format!("http://{base}{path}")).await.unwrap();
    (r.status().as_u16(), r.text().await.unwrap())
}

type Socket = tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

async fn connect(base: &str, table: &str, token: &str) -> Socket {
    let (ws, _) = tokio_tungstenite::connect_async(format!("ws://{base}/tables/{table}/ws?token={token}")).await.unwrap();
    ws
}

async fn next_msg(ws: &mut Socket) -> Option<(String, ServerMsg)> {
    loop {
        let m = tokio::time::timeout(Duration::from_secs(60), ws.next()).await.expect("server went quiet")?;
        if let Message::Text(t) = m.ok()? {
            let raw = t.to_string();
            let msg = serde_json::from_str(&raw).unwrap();
            return Some((raw, msg));
        }
    }
}

/// A simple client: wins when it can, passes on claims, otherwise
/// discards its rightmost tile.
fn answer(obs: &mcr_balance::engine::Observation) -> String {
    let legal = &obs.legal_actions;
    if legal.iter().any(|a| a.is_win()) {
        return "HU".into();
    }
    match obs.request_kind {
        RequestKind::ClaimOrPass => "PASS".into(),
        RequestKind::ActNow => format!("PLAY {}", obs.hand.last().unwrap().kind),
    }
}

/// Plays until the match ends; returns every raw message.
async fn play(ws: &mut Socket, respond: bool) -> Vec<(String, ServerMsg)> {
    let mut seen = Vec::new();
    while let Some((raw, msg)) = next_msg(ws).await {
        let done = matches!(msg, ServerMsg::Finished { .. });
        if let ServerMsg::Update { observation, request: Some(_), .. } = &msg {
            if respond {
                ws.send(Message::Text(answer(observation).into())).await.unwrap();
            }
        }
        seen.push((raw, msg));
        if done {
            break;
        }
    }
    seen
}

/// Replays the first `n` recorded events onto a fresh state.
fn state_after(record: &MatchRecord, n: usize) -> GameState {
    let ruleset = Arc::new(RuleSet::by_id(&record.ruleset_id).unwrap());
    let mut state = GameState::new(ruleset, Wall::from_tiles(record.wall.clone())).unwrap();
    // deal and replacement draws are logged by the engine itself
    let mut cursor = state.redacted_history(0).len();
    while state.redacted_history(0).len() < n {
        let e = &record.events[cursor];
        if state.legal_actions(e.seat).contains(&e.action) {
            state.step(e.seat, e.action).unwrap();
        }
        cursor += 1;
    }
    state
}

/// No message may name a physical tile concealed in another seat's hand.
fn audit(record: &MatchRecord, seat: usize, messages: &[(String, ServerMsg)]) {
    let mut sent = 0;
    for (raw, msg) in messages {
        assert!(!raw.contains("\"wall\""), "wall leaked");
        if let ServerMsg::Update { events, observation, .. } = msg {
            assert_eq!(observation.seat, seat);
            sent += events.len();
            let state = state_after(record, sent);
            let hidden: HashSet<String> = (0..4)
                .filter(|&s| s != seat)
                .flat_map(|s| state.hands[s].concealed.iter().map(|t| format!("\"{t}\"")))
                .collect();
            for h in &hidden {
                assert!(!raw.contains(h.as_str()), "tile {h} of another seat sent to seat {seat}");
            }
        }
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn human_plays_a_full_match_against_three_bots() {
    let (base, _lobby) = start(fast()).await;
    let (status, created) = post(&base, "/tables", json!({"ruleset": "revised", "humans": 1, "bot": "greedy"})).await;
    assert_eq!(status, 201);
    let table = created["table_id"].as_str().unwrap().to_string();
    assert_eq!(created["table"]["status"], "waiting");

    let (status, joined) = post(&base, &format!("/tables/{table}/join"), json!({})).await;
    assert_eq!(status, 200);
    let token = joined["token"].as_str().unwrap().to_string();
    assert_eq!(joined["seat"], 0);
    let (status, _) = post(&base, &format!("/tables/{table}/join"), json!({})).await;
    assert_eq!(status, 409);
    let (status, again) = post(&base, &format!("/tables/{table}/join"), json!({"token": token})).await;
    assert_eq!((status, again["seat"].as_u64()), (200, Some(0)));

    let mut ws = connect(&base, &table, &token).await;
    let messages = play(&mut ws, true).await;
    assert!(matches!(messages[0].1, ServerMsg::Joined { seat: 0, .. }));
    let Some((_, ServerMsg::Finished { match_id, result })) = messages.last().cloned() else { panic!("no result") };

    let (status, raw) = get_text(&base, &format!("/replays/{match_id}")).await;
    assert_eq!(status, 200);
    let record: MatchRecord = serde_json::from_str(&raw).unwrap();
    assert_eq!(record.to_json_line(), raw);
    assert_eq!(record.result, result);
    assert_eq!(result.scores.iter().sum::<i32>(), 0);
    assert_eq!(result.compensated_scores, Some(CompensationVector::PAPER.apply(&result.scores)));
    assert_ne!(result.forfeit, Some(0));
    audit(&record, 0, &messages);

    let config = MatchConfig::new(match_id.clone(), record.seed, Arc::new(RuleSet::revised()));
    let mut scripted = Scripted::from_record(&record);
    let again = run_match(&config, Wall::from_tiles(record.wall.clone()), &mut scripted).unwrap();
    assert_eq!(again.result.scores, record.result.scores);

    let (status, list) = get_text(&base, "/tables").await;
    assert_eq!(status, 200);
    let list: Value = serde_json::from_str(&list).unwrap();
    assert_eq!(list[0]["status"], "finished");
    assert_eq!(get_text(&base, "/replays/nope").await.0, 404);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn lobby_rejects_bad_requests() {
    let (base, _lobby) = start(fast()).await;
    assert_eq!(post(&base, "/tables", json!({"ruleset": "nope"})).await.0, 400);
    assert_eq!(post(&base, "/tables", json!({"ruleset": "classic", "seats": ["human", "alpha", "greedy", "greedy"]})).await.0, 400);
    assert_eq!(post(&base, "/tables/t99/join", json!({})).await.0, 404);
    let (_, created) = post(&base, "/tables", json!({"ruleset": "classic", "seats": ["greedy", "human", "human", "random"]})).await;
    let table = created["table_id"].as_str().unwrap();
    assert_eq!(post(&base, &format!("/tables/{table}/join"), json!({"seat": 0})).await.0, 409);
    assert_eq!(post(&base, &format!("/tables/{table}/join"), json!({"seat": 2})).await.1["seat"], 2);
    assert_eq!(post(&base, &format!("/tables/{table}/join"), json!({"seat": 2})).await.0, 409);
    assert_eq!(post(&base, &format!("/tables/{table}/join"), json!({"token": "forged"})).await.0, 401);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn bot_only_table_finishes_and_is_stored() {
    let (base, lobby) = start(fast()).await;
    let (_, created) = post(&base, "/tables", json!({"ruleset": "classic", "humans": 0})).await;
    let table = created["table_id"].as_str().unwrap().to_string();
    let mut stored = None;
    for _ in 0..200 {
        if lobby.table(&table).unwrap().status == mcr_balance::service::TableStatus::Finished {
            stored = lobby.store().get(&format!("{table}-1")).unwrap();
            break;
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    let record = stored.expect("finished");
    assert!(record.result.compensated_scores.is_none());
    assert_eq!(record.result.scores.iter().sum::<i32>(), 0);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn illegal_and_out_of_turn_lines_are_rejected() {
    let (base, _lobby) = start(fast()).await;
    let (_, created) = post(&base, "/tables", json!({"ruleset": "revised", "seats": ["greedy", "human", "greedy", "greedy"]})).await;
    let table = created["table_id"].as_str().unwrap().to_string();
    let token = post(&base, &format!("/tables/{table}/join"), json!({})).await.1["token"].as_str().unwrap().to_string();
    let mut ws = connect(&base, &table, &token).await;
    let mut rejected = 0;
    let mut tried_bad = false;
    while let Some((_, msg)) = next_msg(&mut ws).await {
        match msg {
            ServerMsg::Update { observation, request: Some(_), .. } => {
                if !tried_bad && observation.request_kind == RequestKind::ActNow {
                    tried_bad = true;
                    ws.send(Message::Text("PLAY X9".into())).await.unwrap();
                    ws.send(Message::Text("PENG W1".into())).await.unwrap();
                }
                ws.send(Message::Text(answer(&observation).into())).await.unwrap();
            }
            ServerMsg::Update { request: None, .. } if rejected == 0 => {
                ws.send(Message::Text("PASS".into())).await.unwrap();
            }
            ServerMsg::Rejected { legal, .. } => {
                rejected += 1;
                assert!(legal.iter().all(|l| !l.starts_with("DRAW")));
            }
            ServerMsg::Finished { result, .. } => {
                assert_ne!(result.forfeit, Some(1), "humans are never forfeited");
                break;
            }
            _ => {}
        }
    }
    assert!(rejected >= 2, "{rejected}");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn silent_human_is_played_by_timeouts() {
    let config = ServiceConfig { act_timeout_ms: 20, claim_timeout_ms: 10, ..fast() };
    let (base, _lobby) = start(config).await;
    let (_, created) = post(&base, "/tables", json!({"ruleset": "revised", "humans": 2, "bot": "random"})).await;
    let table = created["table_id"].as_str().unwrap().to_string();
    let a = post(&base, &format!("/tables/{table}/join"), json!({})).await.1["token"].as_str().unwrap().to_string();
    let b = post(&base, &format!("/tables/{table}/join"), json!({})).await.1["token"].as_str().unwrap().to_string();
    let mut wa = connect(&base, &table, &a).await;
    let _wb = connect(&base, &table, &b).await;
    let messages = play(&mut wa, false).await;
    let Some((_, ServerMsg::Finished { result, .. })) = messages.last() else { panic!() };
    assert_eq!(result.scores.iter().sum::<i32>(), 0);
    assert_eq!(result.forfeit, None);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn departed_human_is_replaced_by_a_bot() {
    let config = ServiceConfig { takeover_grace_ms: 50, ..fast() };
    let (base, lobby) = start(config).await;
    let (_, created) = post(&base, "/tables", json!({"ruleset": "revised", "humans": 1})).await;
    let table = created["table_id"].as_str().unwrap().to_string();
    let token = post(&base, &format!("/tables/{table}/join"), json!({})).await.1["token"].as_str().unwrap().to_string();
    let mut ws = connect(&base, &table, &token).await;
    next_msg(&mut ws).await.unwrap();
    ws.close(None).await.unwrap();
    drop(ws);
    let mut record = None;
    for _ in 0..300 {
        if let Some(r) = lobby.store().get(&format!("{table}-1")).unwrap() {
            record = Some(r);
            break;
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    let record = record.expect("takeover finished the match");
    assert_eq!(record.result.scores.iter().sum::<i32>(), 0);
    assert_eq!(lobby.store().matches_of(&token), vec![record.match_id.clone()]);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn reconnect_restores_seat_and_history() {
    let (base, _lobby) = start(fast()).await;
    let (_, created) = post(&base, "/tables", json!({"ruleset": "classic", "seats": ["greedy", "greedy", "human", "greedy"]})).await;
    let table = created["table_id"].as_str().unwrap().to_string();
    let token = post(&base, &format!("/tables/{table}/join"), json!({})).await.1["token"].as_str().unwrap().to_string();
    let mut ws = connect(&base, &table, &token).await;
    let mut answered = 0;
    while answered < 3 {
        let (_, msg) = next_msg(&mut ws).await.unwrap();
        if let ServerMsg::Update { observation, request: Some(_), .. } = msg {
            ws.send(Message::Text(answer(&observation).into())).await.unwrap();
            answered += 1;
        }
    }
    drop(ws);
    let (status, again) = post(&base, &format!("/tables/{table}/join"), json!({"token": token})).await;
    assert_eq!((status, again["seat"].as_u64()), (200, Some(2)));
    let mut ws = connect(&base, &table, &token).await;
    assert!(matches!(next_msg(&mut ws).await.unwrap().1, ServerMsg::Joined { seat: 2, .. }));
    let (_, first) = next_msg(&mut ws).await.unwrap();
    let ServerMsg::Update { events, .. } = first else { panic!("expected history") };
    assert!(events.iter().filter(|e| e.seat == 2 && e.action != Some(Action::Draw)).count() >= 3);
    assert_eq!(events[0].timestamp_index, 0);
    let rest = play(&mut ws, true).await;
    assert!(matches!(rest.last().unwrap().1, ServerMsg::Finished { .. }));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn static_assets_are_served_from_the_configured_directory() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("app.js"), "console.log(1)").unwrap();
    let (base, _lobby) = start(ServiceConfig { static_dir: Some(dir.path().into()), ..fast() }).await;
    let (status, body) = get_text(&base, "/app.js").await;
    assert_eq!((status, body.as_str()), (200, "console.log(1)"));
    let (status, body) = get_text(&base, "/").await;
    assert_eq!(status, 200);
    assert!(body.contains("/tables"));
    assert_eq!(get_text(&base, "/missing.css").await.0, 404);
}
