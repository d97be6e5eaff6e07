//! One table: a single task owning the referee state, its bots and the
//! channels to its human players.

use std::sync::{Arc, Mutex};
use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};
use tokio::sync::{mpsc, oneshot};
use tokio::time::{sleep_until, Instant};

use super::store::RecordStore;
use super::{ServiceConfig, ServiceError};
use crate::agents::protocol::parse_response;
use crate::agents::{Agent, AgentHandle, AgentPolicy};
use crate::engine::{
    Action, GameState, MatchConfig, MatchRecord, MatchResult, ObservedEvent, Observation, Phase, RequestKind,
};
use crate::rng::split;
use crate::ruleset::RuleSet;

/// Who sits in a seat when the table is created.
#[derive(Debug, Clone, PartialEq)]
pub enum SeatSpec {
    Human,
    Bot(AgentHandle),
}

impl SeatSpec {
    /// `human` or an agent policy spec.
    pub fn parse(spec: &str) -> Result<SeatSpec, String> {
        if spec == "human" {
            return Ok(SeatSpec::Human);
        }
        let policy = AgentPolicy::parse(spec)?;
        Ok(SeatSpec::Bot(AgentHandle::new(spec, policy)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableStatus {
    Waiting,
    Playing,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeatInfo {
    pub seat: usize,
    /// `human` or the bot's policy spec.
    pub occupant: String,
    pub taken: bool,
    pub connected: bool,
}

/// Public summary shown in the lobby.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableInfo {
    pub table_id: String,
    pub ruleset_id: String,
    pub status: TableStatus,
    pub match_id: String,
    pub seats: Vec<SeatInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestInfo {
    pub request_kind: RequestKind,
    pub timeout_ms: u64,
}

/// Messages from the server to one human client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMsg {
    Joined {
        table_id: String,
        match_id: String,
        seat: usize,
    },
    /// New events since the last update and the seat's current view.
    Update {
        events: Vec<ObservedEvent>,
        observation: Observation,
        request: Option<RequestInfo>,
    },
    Rejected {
        reason: String,
        legal: Vec<String>,
    },
    Finished {
        match_id: String,
        result: MatchResult,
    },
    Error {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Joined {
    pub token: String,
    pub seat: usize,
}

pub(crate) enum Command {
    Join { seat: Option<usize>, token: Option<String>, reply: oneshot::Sender<Result<Joined, ServiceError>> },
    Attach { token: String, conn: u64, tx: mpsc::UnboundedSender<ServerMsg>, reply: oneshot::Sender<Result<usize, ServiceError>> },
    Detach { token: String, conn: u64 },
    Submit { token: String, line: String, reply: oneshot::Sender<Result<(), ServiceError>> },
}

struct Human {
    token: String,
    conn: Option<(u64, mpsc::UnboundedSender<ServerMsg>)>,
    /// Events already delivered on the current connection.
    sent: usize,
    /// Since when nobody is connected.
    away_since: Option<Instant>,
}

enum Occupant {
    Open,
    Human(Human),
    Bot(Box<dyn Agent>),
}

/// A decision a human owes, keyed by the event count it was requested at.
#[derive(Clone, Copy)]
struct Prompt {
    key: usize,
    deadline: Instant,
}

pub(crate) struct Table {
    id: String,
    config: MatchConfig,
    service: ServiceConfig,
    specs: Vec<SeatSpec>,
    seats: Vec<Occupant>,
    prompts: [Option<Prompt>; 4],
    /// Tokens ever bound to a seat, kept after a bot takes over.
    tokens: [Option<String>; 4],
    state: Option<GameState>,
    stored: bool,
    store: Arc<dyn RecordStore>,
    info: Arc<Mutex<TableInfo>>,
}

fn new_token() -> String {
    format!("{:032x}", rand::rng().random::<u128>())
}

impl Table {
    pub(crate) fn new(
        id: String,
        seed: u64,
        ruleset: Arc<RuleSet>,
        specs: Vec<SeatSpec>,
        service: ServiceConfig,
        store: Arc<dyn RecordStore>,
    ) -> (Table, Arc<Mutex<TableInfo>>) {
        let match_id = format!("{id}-1");
        let config = MatchConfig::new(match_id.clone(), seed, ruleset.clone());
        let seats = specs
            .iter()
            .enumerate()
            .map(|(s, spec)| match spec {
                SeatSpec::Human => Occupant::Open,
                SeatSpec::Bot(h) => Occupant::Bot(h.build(split(seed, 1 + s as u64), &ruleset)),
            })
            .collect();
        let info = Arc::new(Mutex::new(TableInfo {
            table_id: id.clone(),
            ruleset_id: ruleset.ruleset_id.clone(),
            status: TableStatus::Waiting,
            match_id,
            seats: vec![],
        }));
        let table = Table {
            id,
            config,
            service,
            specs,
            seats,
            prompts: [None; 4],
            tokens: Default::default(),
            state: None,
            stored: false,
            store,
            info: info.clone(),
        };
        table.publish();
        (table, info)
    }

    fn publish(&self) {
        let seats = self
            .seats
            .iter()
            .enumerate()
            .map(|(seat, o)| SeatInfo {
                seat,
                occupant: match &self.specs[seat] {
                    SeatSpec::Human => "human".into(),
                    SeatSpec::Bot(h) => h.id.clone(),
                },
                taken: !matches!(o, Occupant::Open),
                connected: match o {
                    Occupant::Human(h) => h.conn.is_some(),
                    _ => false,
                },
            })
            .collect();
        let status = match &self.state {
            None => TableStatus::Waiting,
            Some(s) if s.is_finished() && self.stored => TableStatus::Finished,
            Some(_) => TableStatus::Playing,
        };
        let mut info = self.info.lock().expect("info lock");
        info.seats = seats;
        info.status = status;
    }

    pub(crate) async fn run(mut self, mut rx: mpsc::Receiver<Command>) {
        self.advance().await;
        loop {
            let deadline = self.next_deadline();
            tokio::select! {
                cmd = rx.recv() => match cmd {
                    Some(cmd) => self.handle(cmd),
                    None => break,
                },
                _ = sleep_until(deadline.unwrap_or_else(Instant::now)), if deadline.is_some() => self.on_timer(),
            }
            self.advance().await;
        }
    }

    fn seat_of(&self, token: &str) -> Option<usize> {
        self.seats.iter().position(|o| matches!(o, Occupant::Human(h) if h.token == token))
    }

    fn handle(&mut self, cmd: Command) {
        match cmd {
            Command::Join { seat, token, reply } => {
                let _ = reply.send(self.join(seat, token));
            }
            Command::Attach { token, conn, tx, reply } => {
                let Some(seat) = self.seat_of(&token) else {
                    let _ = reply.send(Err(ServiceError::UnknownToken));
                    return;
                };
                let _ = tx.send(ServerMsg::Joined { table_id: self.id.clone(), match_id: self.config.match_id.clone(), seat });
                if let Occupant::Human(h) = &mut self.seats[seat] {
                    h.conn = Some((conn, tx));
                    h.sent = 0;
                    h.away_since = None;
                }
                // A fresh connection gets the current prompt again.
                self.prompts[seat] = self.prompts[seat].map(|p| Prompt { key: usize::MAX, ..p });
                let _ = reply.send(Ok(seat));
            }
            Command::Detach { token, conn } => {
                if let Some(seat) = self.seat_of(&token) {
                    if let Occupant::Human(h) = &mut self.seats[seat] {
                        if h.conn.as_ref().is_some_and(|(c, _)| *c == conn) {
                            h.conn = None;
                            h.away_since = Some(Instant::now());
                        }
                    }
                }
            }
            Command::Submit { token, line, reply } => {
                let _ = reply.send(self.submit(&token, &line));
            }
        }
        self.publish();
    }

    fn join(&mut self, seat: Option<usize>, token: Option<String>) -> Result<Joined, ServiceError> {
        if let Some(t) = token {
            return match self.seat_of(&t) {
                Some(seat) => Ok(Joined { token: t, seat }),
                None => Err(ServiceError::UnknownToken),
            };
        }
        let seat = match seat {
            Some(s) if s >= 4 => return Err(ServiceError::BadRequest(format!("seat {s} out of range"))),
            Some(s) if matches!(self.seats[s], Occupant::Open) => s,
            Some(s) => return Err(ServiceError::SeatTaken(s)),
            None => self.seats.iter().position(|o| matches!(o, Occupant::Open)).ok_or(ServiceError::TableFull)?,
        };
        let token = new_token();
        self.seats[seat] = Occupant::Human(Human { token: token.clone(), conn: None, sent: 0, away_since: Some(Instant::now()) });
        self.tokens[seat] = Some(token.clone());
        Ok(Joined { token, seat })
    }

    fn submit(&mut self, token: &str, line: &str) -> Result<(), ServiceError> {
        let seat = self.seat_of(token).ok_or(ServiceError::UnknownToken)?;
        let Some(state) = self.state.as_mut() else {
            return Err(ServiceError::Rejected { reason: "match has not started".into(), legal: vec![] });
        };
        let legal = state.legal_actions(seat);
        let shown = || legal.iter().filter(|a| **a != Action::Draw).map(Action::to_protocol).collect::<Vec<_>>();
        if legal.is_empty() || state.phase == Phase::AwaitDraw {
            return Err(ServiceError::Rejected { reason: "not your turn".into(), legal: vec![] });
        }
        let action = parse_response(line, &legal).map_err(|e| ServiceError::Rejected { reason: e.to_string(), legal: shown() })?;
        state
            .step(seat, action)
            .map_err(|e| ServiceError::Rejected { reason: e.to_string(), legal: shown() })?;
        self.prompts[seat] = None;
        Ok(())
    }

    fn next_deadline(&self) -> Option<Instant> {
        let prompts = self.prompts.iter().flatten().map(|p| p.deadline);
        let grace = Duration::from_millis(self.service.takeover_grace_ms);
        let takeovers = self.seats.iter().filter_map(|o| match o {
            Occupant::Human(h) if self.state.is_some() => h.away_since.map(|t| t + grace),
            _ => None,
        });
        let finished = self.state.as_ref().is_some_and(|s| s.is_finished());
        if finished {
            return None;
        }
        prompts.chain(takeovers).min()
    }

    fn on_timer(&mut self) {
        let now = Instant::now();
        let grace = Duration::from_millis(self.service.takeover_grace_ms);
        for seat in 0..4 {
            let away = matches!(&self.seats[seat], Occupant::Human(h) if h.away_since.is_some_and(|t| t + grace <= now));
            if away && self.state.is_some() {
                let bot = AgentHandle::greedy("takeover").build(split(self.config.seed, 11 + seat as u64), &self.config.ruleset);
                self.seats[seat] = Occupant::Bot(bot);
                self.prompts[seat] = None;
                continue;
            }
            if self.prompts[seat].is_some_and(|p| p.deadline <= now) {
                self.prompts[seat] = None;
                let Some(state) = self.state.as_mut() else { continue };
                let obs = state.observation_for(seat, false);
                if let Some(action) = default_action(&obs) {
                    let _ = state.step(seat, action);
                }
            }
        }
        self.publish();
    }

    async fn advance(&mut self) {
        if self.state.is_none() {
            if self.seats.iter().any(|o| matches!(o, Occupant::Open)) {
                return;
            }
            let wall = crate::tiles::build_wall(self.config.seed, false);
            let state = match GameState::new(self.config.ruleset.clone(), wall) {
                Ok(s) => s,
                Err(e) => {
                    self.broadcast(ServerMsg::Error { message: e.to_string() });
                    return;
                }
            };
            let now = Instant::now();
            for (seat, o) in self.seats.iter_mut().enumerate() {
                match o {
                    Occupant::Bot(b) => b.begin_match(&self.config.match_id, seat),
                    Occupant::Human(h) => h.away_since = h.away_since.map(|_| now),
                    Occupant::Open => {}
                }
            }
            self.state = Some(state);
        }
        self.run_bots();
        self.send_updates();
        if self.state.as_ref().is_some_and(|s| s.is_finished()) && !self.stored {
            self.settle_and_store().await;
        }
        self.publish();
    }

    /// Steps the state until it waits on a human or the match ends.
    fn run_bots(&mut self) {
        let state = self.state.as_mut().expect("started");
        let penalty = self.config.forfeit_penalty;
        while !state.is_finished() {
            if state.phase == Phase::AwaitDraw {
                let seat = state.current_seat;
                state.step(seat, Action::Draw).expect("draw is legal");
                continue;
            }
            let bot = state.seats_to_act().into_iter().find(|&s| matches!(self.seats[s], Occupant::Bot(_)));
            let Some(seat) = bot else { break };
            let Occupant::Bot(agent) = &mut self.seats[seat] else { unreachable!() };
            let obs = state.observation_for(seat, agent.wants_history());
            let ok = agent.act(&obs).is_ok_and(|a| state.step(seat, a).is_ok());
            if !ok {
                state.forfeit(seat, penalty);
            }
        }
    }

    fn send_updates(&mut self) {
        let Some(state) = self.state.as_ref() else { return };
        let owing = state.seats_to_act();
        let key = state.events.len();
        let now = Instant::now();
        for seat in 0..4 {
            let Occupant::Human(h) = &mut self.seats[seat] else {
                self.prompts[seat] = None;
                continue;
            };
            let owes = !state.is_finished() && owing.contains(&seat);
            let fresh = match self.prompts[seat] {
                _ if !owes => {
                    self.prompts[seat] = None;
                    false
                }
                Some(p) if p.key == key => false,
                Some(p) if p.key == usize::MAX => {
                    self.prompts[seat] = Some(Prompt { key, ..p });
                    true
                }
                _ => {
                    let ms = match state.request_kind() {
                        RequestKind::ActNow => self.service.act_timeout_ms,
                        RequestKind::ClaimOrPass => self.service.claim_timeout_ms,
                    };
                    self.prompts[seat] = Some(Prompt { key, deadline: now + Duration::from_millis(ms) });
                    true
                }
            };
            let Some((_, tx)) = &h.conn else { continue };
            if h.sent == key && !fresh {
                continue;
            }
            let events = state.events[h.sent..].iter().map(|e| crate::engine::redact(e, seat)).collect();
            let request = self.prompts[seat].filter(|_| owes).map(|p| RequestInfo {
                request_kind: state.request_kind(),
                timeout_ms: p.deadline.saturating_duration_since(now).as_millis() as u64,
            });
            let observation = state.observation_for(seat, false);
            if tx.send(ServerMsg::Update { events, observation, request }).is_ok() {
                h.sent = key;
            }
        }
    }

    fn broadcast(&self, msg: ServerMsg) {
        for o in &self.seats {
            if let Occupant::Human(Human { conn: Some((_, tx)), .. }) = o {
                let _ = tx.send(msg.clone());
            }
        }
    }

    /// Persists the finished match, retrying transient storage failures.
    async fn settle_and_store(&mut self) {
        let state = self.state.as_ref().expect("started");
        let record = MatchRecord::from_state(&self.config, state);
        let tokens: Vec<String> = self.tokens.iter().flatten().cloned().collect();
        let mut attempt = 0;
        loop {
            match self.store.append(&record, &tokens) {
                Ok(()) => break,
                Err(e) if e.is_retriable() && attempt < 3 => {
                    attempt += 1;
                    tokio::time::sleep(Duration::from_millis(50 << attempt)).await;
                }
                Err(e) => {
                    self.broadcast(ServerMsg::Error { message: format!("match not stored: {e}") });
                    break;
                }
            }
        }
        self.stored = true;
        self.broadcast(ServerMsg::Finished { match_id: record.match_id.clone(), result: record.result.clone() });
    }
}

/// What an unanswered prompt resolves to: pass on claims, otherwise
/// discard the tile just drawn, or the rightmost tile.
pub fn default_action(obs: &Observation) -> Option<Action> {
    let legal = &obs.legal_actions;
    if obs.request_kind == RequestKind::ClaimOrPass {
        return legal.contains(&Action::Pass).then_some(Action::Pass);
    }
    if let Some(t) = obs.last_draw {
        if legal.contains(&Action::Discard(t)) {
            return Some(Action::Discard(t));
        }
    }
    legal.iter().rev().find(|a| matches!(a, Action::Discard(_))).copied().or_else(|| legal.first().copied())
}
