//! Scores a winning hand under the classic and revised tables.
//!
//! cargo run --example score_hand -- W1W1W1W2W3W4W5W6W7W8W8W9W9W9

use mcr_balance::ruleset::RuleSet;
use mcr_balance::scoring::{best_fan, settle, WinBy, WinContext};
use mcr_balance::tiles::{parse_kinds, Hand};

fn main() -> anyhow::Result<()> {
    let text = std::env::args().nth(1).unwrap_or_else(|| "W1W1W1W2W3W4W5W6W7W8W8W9W9W9".into());
    let mut kinds = parse_kinds(&text)?;
    let win = kinds.pop().ok_or_else(|| anyhow::anyhow!("empty hand"))?;
    let hand = Hand::from_kinds(&kinds, vec![]);
    for rules in [RuleSet::classic(), RuleSet::revised()] {
        let ctx = WinContext::simple(WinBy::SelfDraw, win);
        let result = best_fan(&hand, win, &ctx, &rules.table);
        println!("{}:", rules.ruleset_id);
        for f in &result.fans {
            println!("  {:<32} {:>3} x{}", rules.table.name(f.pattern_id), f.points, f.multiplicity);
        }
        println!("  total {}", result.total);
        if result.win {
            let scores = settle(result.total, WinBy::SelfDraw, 0, None)?;
            println!("  scores {scores:?}");
            if let Some(c) = rules.compensation {
                println!("  compensated {:?}", c.apply(&scores));
            }
        }
    }
    Ok(())
}
