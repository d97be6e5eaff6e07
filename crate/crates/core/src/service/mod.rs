//! Online play: a lobby of tables, live play over WebSocket and replays.

mod http;
pub mod store;
mod table;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use thiserror::Error;
use tokio::sync::{mpsc, oneshot};

pub use http::{router, serve};
pub use store::{JsonlStore, MemoryStore, RecordStore, StoreError};
pub use table::{default_action, Joined, RequestInfo, SeatInfo, SeatSpec, ServerMsg, TableInfo, TableStatus};

use crate::rng::split;
use crate::ruleset::RuleSet;
use table::{Command, Table};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub act_timeout_ms: u64,
    pub claim_timeout_ms: u64,
    /// How long a disconnected human keeps the seat before a bot takes over.
    pub takeover_grace_ms: u64,
    pub seed: u64,
    /// Directory served at `/`; a built-in page when absent.
    pub static_dir: Option<std::path::PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { act_timeout_ms: 30_000, claim_timeout_ms: 10_000, takeover_grace_ms: 60_000, seed: 0, static_dir: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ServiceError {
    #[error("unknown ruleset `{0}`")]
    UnknownRuleset(String),
    #[error("no table `{0}`")]
    NoTable(String),
    #[error("table is full")]
    TableFull,
    #[error("seat {0} is already taken")]
    SeatTaken(usize),
    #[error("unknown session token")]
    UnknownToken,
    #[error("rejected: {reason}")]
    Rejected { reason: String, legal: Vec<String> },
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("table stopped")]
    Stopped,
}

#[derive(Clone)]
struct TableHandle {
    info: Arc<Mutex<TableInfo>>,
    tx: mpsc::Sender<Command>,
}

/// All open tables plus the record store.
pub struct Lobby {
    tables: Mutex<BTreeMap<String, TableHandle>>,
    store: Arc<dyn RecordStore>,
    config: ServiceConfig,
    counter: AtomicU64,
    conns: AtomicU64,
}

impl Lobby {
    pub fn new(config: ServiceConfig, store: Arc<dyn RecordStore>) -> Arc<Lobby> {
        Arc::new(Lobby { tables: Mutex::new(BTreeMap::new()), store, config, counter: AtomicU64::new(0), conns: AtomicU64::new(0) })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn store(&self) -> &Arc<dyn RecordStore> {
        &self.store
    }

    /// Opens a table; bot seats are filled at once, human seats wait for
    /// joins. Must be called inside a Tokio runtime.
    pub fn create_table(&self, ruleset_id: &str, seats: Vec<SeatSpec>) -> Result<String, ServiceError> {
        let ruleset = RuleSet::by_id(ruleset_id).map_err(|_| ServiceError::UnknownRuleset(ruleset_id.into()))?;
        if seats.len() != 4 {
            return Err(ServiceError::BadRequest(format!("need 4 seats, got {}", seats.len())));
        }
        let n = self.counter.fetch_add(1, Ordering::Relaxed) + 1;
        let id = format!("t{n}");
        let seed = split(self.config.seed, n);
        let (table, info) = Table::new(id.clone(), seed, Arc::new(ruleset), seats, self.config.clone(), self.store.clone());
        let (tx, rx) = mpsc::channel(64);
        tokio::spawn(table.run(rx));
        self.tables.lock().expect("lobby lock").insert(id.clone(), TableHandle { info, tx });
        Ok(id)
    }

    pub fn tables(&self) -> Vec<TableInfo> {
        let tables = self.tables.lock().expect("lobby lock");
        tables.values().map(|t| t.info.lock().expect("info lock").clone()).collect()
    }

    pub fn table(&self, id: &str) -> Result<TableInfo, ServiceError> {
        Ok(self.handle(id)?.info.lock().expect("info lock").clone())
    }

    fn handle(&self, id: &str) -> Result<TableHandle, ServiceError> {
        self.tables.lock().expect("lobby lock").get(id).cloned().ok_or_else(|| ServiceError::NoTable(id.into()))
    }

    async fn ask<T>(&self, id: &str, make: impl FnOnce(oneshot::Sender<Result<T, ServiceError>>) -> Command) -> Result<T, ServiceError> {
        let handle = self.handle(id)?;
        let (reply, rx) = oneshot::channel();
        handle.tx.send(make(reply)).await.map_err(|_| ServiceError::Stopped)?;
        rx.await.map_err(|_| ServiceError::Stopped)?
    }

    /// Takes a seat, or recovers it when `token` is already seated here.
    pub async fn join(&self, id: &str, seat: Option<usize>, token: Option<String>) -> Result<Joined, ServiceError> {
        self.ask(id, |reply| Command::Join { seat, token, reply }).await
    }

    /// Binds a live channel to a seated token; returns the seat.
    pub async fn attach(&self, id: &str, token: &str, conn: u64, tx: mpsc::UnboundedSender<ServerMsg>) -> Result<usize, ServiceError> {
        self.ask(id, |reply| Command::Attach { token: token.into(), conn, tx, reply }).await
    }

    pub async fn detach(&self, id: &str, token: &str, conn: u64) {
        if let Ok(h) = self.handle(id) {
            let _ = h.tx.send(Command::Detach { token: token.into(), conn }).await;
        }
    }

    /// Submits one response line in the agent grammar.
    pub async fn submit(&self, id: &str, token: &str, line: &str) -> Result<(), ServiceError> {
        self.ask(id, |reply| Command::Submit { token: token.into(), line: line.into(), reply }).await
    }

    pub fn next_conn(&self) -> u64 {
        self.conns.fetch_add(1, Ordering::Relaxed)
    }
}
