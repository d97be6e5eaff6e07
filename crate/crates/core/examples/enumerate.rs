//! Exact hand counts for a few patterns over the full 34-kind universe.
//!
//! cargo run --release --example enumerate -- "Seven Pairs" "Full Flush"

use std::time::Instant;

use mcr_balance::balance::{enumerate_pattern_counts, EnumFlags};
use mcr_balance::scoring::{fan, FanTable};

fn main() -> anyhow::Result<()> {
    let table = FanTable::classic();
    let names: Vec<String> = std::env::args().skip(1).collect();
    let ids = if names.is_empty() {
        vec![fan::SEVEN_PAIRS, fan::FULL_FLUSH, fan::PURE_TRIPLE_CHOW]
    } else {
        names
            .iter()
            .map(|n| table.id_by_name(n).ok_or_else(|| anyhow::anyhow!("unknown pattern {n}")))
            .collect::<Result<_, _>>()?
    };
    let start = Instant::now();
    for c in enumerate_pattern_counts(&ids, &EnumFlags::default(), &table)? {
        let magnitude = c.magnitude.map_or("-".to_string(), |m| m.to_string());
        println!("{:<36} {:>22} {magnitude:>3}", c.name, c.exact_count);
    }
    eprintln!("{:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
