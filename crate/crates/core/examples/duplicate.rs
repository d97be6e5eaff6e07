//! Duplicate tournament of four built-in agents.
//!
//! cargo run --release --example duplicate -- 20

use std::sync::Arc;

use mcr_balance::agents::{AgentHandle, AgentPolicy};
use mcr_balance::ruleset::RuleSet;
use mcr_balance::simulator::{run_duplicate, RunOptions};

fn main() -> anyhow::Result<()> {
    let rounds: usize = std::env::args().nth(1).map_or(Ok(10), |s| s.parse())?;
    let agents = [
        AgentHandle::greedy("greedy"),
        AgentHandle::new("greedy-0.2", AgentPolicy::GreedyDeficiency { epsilon: 0.2 }),
        AgentHandle::new("greedy-0.5", AgentPolicy::GreedyDeficiency { epsilon: 0.5 }),
        AgentHandle::random("random"),
    ];
    let opts = RunOptions::new(Arc::new(RuleSet::classic()));
    let report = run_duplicate(&agents, rounds, 1, &opts, |_| {})?;
    println!("{report}");
    println!("ranking: {}", report.ranking(false).join(" > "));
    Ok(())
}
