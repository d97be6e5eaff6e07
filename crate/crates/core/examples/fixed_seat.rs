//! Fixed seating with and without the seat compensation.
//!
//! The weaker agent sits first and the stronger one last, so the raw
//! averages carry the seat advantage and the compensated ones remove it.
//!
//! cargo run --release --example fixed_seat -- 5000

use std::sync::Arc;

use mcr_balance::agents::{AgentHandle, AgentPolicy};
use mcr_balance::ruleset::{CompensationVector, RuleSet};
use mcr_balance::simulator::{run_fixed_seat, RunOptions};

fn main() -> anyhow::Result<()> {
    let rounds: usize = std::env::args().nth(1).map_or(Ok(2000), |s| s.parse())?;
    let eps = |id: &str, e: f64| AgentHandle::new(id, AgentPolicy::GreedyDeficiency { epsilon: e });
    let agents = [eps("first", 0.10), eps("second", 0.05), eps("third", 0.05), eps("fourth", 0.05)];
    let opts = RunOptions::new(Arc::new(RuleSet::revised_points_only()));
    let report = run_fixed_seat(&agents, [0, 1, 2, 3], rounds, 3, Some(CompensationVector::PAPER), &opts, |_| {})?;
    println!("{report}");
    println!("raw:         {}", report.ranking(false).join(" > "));
    println!("compensated: {}", report.ranking(true).join(" > "));
    Ok(())
}
