//! A minimal external agent speaking the line protocol: wins when it can,
//! never claims, and throws the tile it just drew.
//!
//! cargo build --example external_agent
//! mcr simulate --agent "external:target/debug/examples/external_agent" --n 10

use std::io::{self, BufRead, Write};

use mcr_balance::agents::protocol::Request;
use mcr_balance::engine::{Action, RequestKind};

fn main() -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    for line in io::stdin().lock().lines() {
        let req: Request = serde_json::from_str(&line?)?;
        let obs = &req.observation;
        let reply = if obs.legal_actions.iter().any(Action::is_win) {
            "HU".to_string()
        } else if req.request_kind == RequestKind::ClaimOrPass {
            "PASS".to_string()
        } else {
            let tile = obs.hand.last().ok_or_else(|| anyhow::anyhow!("empty hand"))?;
            format!("PLAY {}", tile.kind)
        };
        writeln!(out, "{reply}")?;
        out.flush()?;
    }
    Ok(())
}
