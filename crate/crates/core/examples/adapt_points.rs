//! Frequency counting and point adaptation on a fresh batch of greedy self-play.
//!
//! cargo run --release --example adapt_points -- 5000

use std::sync::Arc;

use mcr_balance::agents::AgentHandle;
use mcr_balance::balance::{adapt_points, top_k, FrequencyTable, LUCK_EXEMPT};
use mcr_balance::ruleset::RuleSet;
use mcr_balance::simulator::{run_selfplay, RunOptions};

fn main() -> anyhow::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(Ok(3000), |s| s.parse())?;
    let rules = Arc::new(RuleSet::classic());
    let mut freq = FrequencyTable::default();
    let mut failed = None;
    run_selfplay(&AgentHandle::greedy("greedy"), n, 7, &RunOptions::new(rules.clone()), |r| {
        if let Err(e) = freq.add_record(r, false) {
            failed.get_or_insert(e);
        }
    })?;
    if let Some(e) = failed {
        return Err(e.into());
    }
    println!("{} matches; ten most frequent:", freq.matches);
    for id in top_k(&freq, 10) {
        println!("  {:<32} {:>6}", rules.table.name(id), freq.get(id));
    }
    let result = adapt_points(&freq, &rules.table, &LUCK_EXEMPT)?;
    println!("\nN = {}\n{result}", result.n);
    Ok(())
}
