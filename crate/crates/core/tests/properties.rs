use std::sync::Arc;

use mcr_balance::agents::{AgentHandle, Scripted};
use mcr_balance::engine::{run_match, MatchConfig, MatchRecord};
use mcr_balance::ruleset::{CompensationVector, RuleSet};
use mcr_balance::scoring::{best_fan, settle, WinBy, WinContext};
use mcr_balance::tiles::{build_wall, Hand, KindCounts, TileKind, Wall};
use proptest::prelude::*;

fn win_by() -> impl Strategy<Value = WinBy> {
    prop_oneof![Just(WinBy::SelfDraw), Just(WinBy::Discard), Just(WinBy::RobKong), Just(WinBy::ReplacementTile)]
}

/// A set is a chow start (suit, rank 1..=7) or a pung kind.
#[derive(Debug, Clone, Copy)]
enum SetSpec {
    Chow(usize, usize),
    Pung(usize),
}

fn set_spec() -> impl Strategy<Value = SetSpec> {
    prop_oneof![(0usize..3, 0usize..7).prop_map(|(s, r)| SetSpec::Chow(s, r)), (0usize..34).prop_map(SetSpec::Pung)]
}

/// Four sets and a pair that fit in one tile set, or none.
fn complete_hand(sets: &[SetSpec], pair: usize) -> Option<Vec<TileKind>> {
    let mut kinds = vec![];
    for s in sets {
        match *s {
            SetSpec::Chow(suit, r) => kinds.extend((0..3).map(|d| TileKind::from_index(suit * 9 + r + d))),
            SetSpec::Pung(k) => kinds.extend([TileKind::from_index(k); 3]),
        }
    }
    kinds.extend([TileKind::from_index(pair); 2]);
    let c = KindCounts::from_kinds(&kinds);
    c.0.iter().all(|&n| n <= 4).then_some(kinds)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn settlement_is_zero_sum_and_follows_the_formulas(n in 8u32..400, by in win_by(), winner in 0usize..4, shift in 1usize..4) {
        let discarder = (!by.is_self_drawn()).then_some((winner + shift) % 4);
        let s = settle(n, by, winner, discarder).unwrap();
        prop_assert_eq!(s.iter().sum::<i32>(), 0);
        let n = n as i32;
        for seat in 0..4 {
            let want = match discarder {
                None if seat == winner => 3 * n + 24,
                None => -n - 8,
                Some(_) if seat == winner => n + 24,
                Some(d) if seat == d => -n - 8,
                Some(_) => -8,
            };
            prop_assert_eq!(s[seat], want);
        }
    }

    #[test]
    fn below_minimum_cannot_settle(n in 0u32..8, by in win_by()) {
        prop_assert!(settle(n, by, 0, Some(1)).is_err());
    }

    #[test]
    fn complete_hands_always_score(
        sets in proptest::collection::vec(set_spec(), 4),
        pair in 0usize..34,
        pick in any::<prop::sample::Index>(),
        by in win_by(),
        order in any::<u64>(),
    ) {
        let Some(mut kinds) = complete_hand(&sets, pair) else { return Ok(()) };
        let win = kinds.remove(pick.index(14));
        let table = RuleSet::classic().table;
        let ctx = WinContext::simple(by, win);
        let result = best_fan(&Hand::from_kinds(&kinds, vec![]), win, &ctx, &table);
        prop_assert!(!result.fans.is_empty());
        let sum: u32 = result.fans.iter().map(|f| f.points * u32::from(f.multiplicity)).sum();
        prop_assert_eq!(sum, result.total);
        prop_assert_eq!(result.win, result.total >= 8);
        for a in &result.fans {
            prop_assert_eq!(a.points, table.points(a.pattern_id));
            for b in &result.fans {
                prop_assert!(!table.get(a.pattern_id).excludes.contains(&b.pattern_id), "{} kept beside {}", a.pattern_id, b.pattern_id);
            }
        }
        // Tile order in the hand is irrelevant.
        let mut shuffled = kinds.clone();
        let len = shuffled.len();
        shuffled.rotate_left((order % len as u64) as usize);
        let again = best_fan(&Hand::from_kinds(&shuffled, vec![]), win, &ctx, &table);
        prop_assert_eq!(again.total, result.total);
    }

    #[test]
    fn scoring_agrees_with_a_shape_oracle(kinds in proptest::collection::vec(0usize..34, 14)) {
        let mut counts = [0u8; 34];
        for &k in &kinds {
            counts[k] += 1;
        }
        if counts.iter().any(|&n| n > 4) {
            return Ok(());
        }
        let mut kinds: Vec<TileKind> = kinds.into_iter().map(TileKind::from_index).collect();
        let win = kinds.pop().unwrap();
        let table = RuleSet::classic().table;
        let result = best_fan(&Hand::from_kinds(&kinds, vec![]), win, &WinContext::simple(WinBy::SelfDraw, win), &table);
        let knitted = ["Knitted Straight", "Lesser Honours and Knitted Tiles", "Greater Honours and Knitted Tiles"]
            .map(|n| table.id_by_name(n).unwrap());
        if oracle_complete(&mut counts) {
            prop_assert!(!result.fans.is_empty());
        } else if !result.fans.is_empty() {
            prop_assert!(result.fans.iter().any(|f| knitted.contains(&f.pattern_id)));
        }
    }
}

/// Four sets and a pair, seven pairs or thirteen orphans.
fn oracle_complete(c: &mut [u8; 34]) -> bool {
    fn sets(c: &mut [u8; 34], need: usize) -> bool {
        let Some(i) = c.iter().position(|&n| n > 0) else { return need == 0 };
        if c[i] >= 3 {
            c[i] -= 3;
            let ok = sets(c, need - 1);
            c[i] += 3;
            if ok {
                return true;
            }
        }
        if i < 27 && i % 9 <= 6 && c[i + 1] > 0 && c[i + 2] > 0 {
            for d in 0..3 {
                c[i + d] -= 1;
            }
            let ok = sets(c, need - 1);
            for d in 0..3 {
                c[i + d] += 1;
            }
            return ok;
        }
        false
    }
    let orphans = [0, 8, 9, 17, 18, 26, 27, 28, 29, 30, 31, 32, 33];
    if orphans.iter().all(|&i| c[i] > 0) && orphans.iter().map(|&i| c[i] as usize).sum::<usize>() == 14 {
        return true;
    }
    if c.iter().all(|&n| n == 0 || n == 2 || n == 4) {
        return true;
    }
    for p in 0..34 {
        if c[p] >= 2 {
            c[p] -= 2;
            let ok = sets(c, 4);
            c[p] += 2;
            if ok {
                return true;
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn recorded_matches_round_trip_and_replay(seed in any::<u64>(), mix in 0u8..16, revised in any::<bool>()) {
        let rules = Arc::new(if revised { RuleSet::revised() } else { RuleSet::classic() });
        let config = MatchConfig::new("p", seed, rules.clone());
        let mut agents = std::array::from_fn(|s| {
            let h = if mix & (1 << s) != 0 { AgentHandle::greedy("g") } else { AgentHandle::random("r") };
            h.build(seed.wrapping_add(s as u64), &rules)
        });
        let record = run_match(&config, build_wall(seed, false), &mut agents).unwrap();
        let r = &record.result;
        prop_assert_eq!(r.scores.iter().sum::<i32>(), 0);
        prop_assert_eq!(r.fan_list.iter().map(|f| f.points * u32::from(f.multiplicity)).sum::<u32>(), r.fan_total);
        match r.compensated_scores {
            Some(c) => {
                prop_assert!(revised);
                prop_assert_eq!(c, CompensationVector::PAPER.apply(&r.scores));
            }
            None => prop_assert!(!revised),
        }
        let line = record.to_json_line();
        let back: MatchRecord = serde_json::from_str(&line).unwrap();
        prop_assert_eq!(&back, &record);
        let mut scripted = Scripted::from_record(&back);
        let again = run_match(&config, Wall::from_tiles(back.wall.clone()), &mut scripted).unwrap();
        prop_assert_eq!(again.to_json_line(), line);
    }
}
