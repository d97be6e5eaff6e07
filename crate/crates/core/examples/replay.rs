//! Plays one match, stores it as a JSON line and reproduces it from the line.
//!
//! cargo run --example replay -- 42

use std::sync::Arc;

use mcr_balance::agents::{AgentHandle, Scripted};
use mcr_balance::engine::{run_match, MatchConfig, MatchRecord};
use mcr_balance::ruleset::RuleSet;
use mcr_balance::tiles::{build_wall, Wall};

fn main() -> anyhow::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(42), |s| s.parse())?;
    let rules = Arc::new(RuleSet::revised());
    let config = MatchConfig::new("demo", seed, rules.clone());
    let mut agents = std::array::from_fn(|s| AgentHandle::greedy("greedy").build(seed + s as u64, &rules));
    let record = run_match(&config, build_wall(seed, false), &mut agents)?;
    let line = record.to_json_line();
    println!("{} events, result {:?}, {} bytes", record.events.len(), record.result.scores, line.len());

    let stored: MatchRecord = serde_json::from_str(&line)?;
    let mut scripted = Scripted::from_record(&stored);
    let again = run_match(&config, Wall::from_tiles(stored.wall.clone()), &mut scripted)?;
    assert_eq!(again.to_json_line(), line);
    println!("replay is byte-identical");
    Ok(())
}
