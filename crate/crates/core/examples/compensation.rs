//! Seat compensation from identical-agent self-play.
//!
//! cargo run --release --example compensation -- 20000

use std::sync::Arc;

use mcr_balance::agents::AgentHandle;
use mcr_balance::balance::derive_compensation;
use mcr_balance::ruleset::{CompensationVector, RuleSet};
use mcr_balance::simulator::{run_selfplay, RunOptions};

fn main() -> anyhow::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(Ok(10_000), |s| s.parse())?;
    let opts = RunOptions::new(Arc::new(RuleSet::revised_points_only()));
    let stats = run_selfplay(&AgentHandle::greedy("greedy"), n, 11, &opts, |_| {})?;
    println!("{stats}");
    println!("derived   {}", derive_compensation(&stats, 0.1)?);
    println!("published {}", CompensationVector::PAPER);
    Ok(())
}
