//! Seat-wise statistics from self-play of one built-in agent.
//!
//! cargo run --release --example selfplay -- greedy 2000 7

use std::sync::Arc;
use std::time::Instant;

use mcr_balance::agents::{AgentHandle, AgentPolicy};
use mcr_balance::ruleset::RuleSet;
use mcr_balance::simulator::{run_selfplay, RunOptions};

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let policy = AgentPolicy::parse(args.first().map_or("greedy", String::as_str)).map_err(anyhow::Error::msg)?;
    let n: usize = args.get(1).map_or(Ok(1000), |s| s.parse())?;
    let seed: u64 = args.get(2).map_or(Ok(7), |s| s.parse())?;
    let opts = RunOptions::new(Arc::new(RuleSet::classic()));
    let start = Instant::now();
    let stats = run_selfplay(&AgentHandle::new("agent", policy), n, seed, &opts, |_| {})?;
    let secs = start.elapsed().as_secs_f64();
    println!("{stats}");
    println!("{n} matches in {secs:.1} s ({:.0} matches/min)", n as f64 * 60.0 / secs);
    Ok(())
}
