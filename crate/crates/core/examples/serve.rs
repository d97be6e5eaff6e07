//! Starts the play server with one open table against three greedy bots.
//!
//! cargo run --release --example serve -- 127.0.0.1:8080
//! then `curl -X POST localhost:8080/tables/t1/join` and open the socket.

use std::sync::Arc;

use mcr_balance::agents::AgentHandle;
use mcr_balance::service::{serve, Lobby, MemoryStore, SeatSpec, ServiceConfig};

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let addr = std::env::args().nth(1).unwrap_or_else(|| "127.0.0.1:8080".into()).parse()?;
    let lobby = Lobby::new(ServiceConfig::default(), Arc::new(MemoryStore::default()));
    let bot = |i: usize| SeatSpec::Bot(AgentHandle::greedy(format!("bot{i}")));
    let id = lobby.create_table("revised", vec![SeatSpec::Human, bot(1), bot(2), bot(3)])?;
    println!("table {id} waiting on http://{addr}");
    serve(addr, lobby).await?;
    Ok(())
}
