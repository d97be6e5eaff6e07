use proptest::prelude::*;

use super::*;
use crate::engine::{FanListEntry, MatchResult};
use crate::ruleset::REVISED_CHANGES;
use crate::scoring::shape::is_winning_shape;
use crate::tiles::KindCounts;

fn record(id: &str, fans: &[(FanId, u8)]) -> MatchRecord {
    let table = FanTable::classic();
    MatchRecord {
        match_id: id.into(),
        seed: 0,
        ruleset_id: "classic".into(),
        wall: vec![],
        events: vec![],
        result: MatchResult {
            winner: (!fans.is_empty()).then_some(0),
            win_by: None,
            discarder: None,
            forfeit: None,
            fan_list: fans
                .iter()
                .map(|&(p, m)| FanListEntry {
                    pattern_id: p,
                    name: table.name(p.clamp(1, 81)).into(),
                    points: 0,
                    multiplicity: m,
                })
                .collect(),
            fan_total: 0,
            scores: [0; 4],
            compensated_scores: None,
        },
    }
}

/// Patterns named in the published top-frequency listing, in its order.
pub(crate) const LISTED: [&str; 44] = [
    "Pure Double Chow",
    "Mixed Double Chow",
    "Short Straight",
    "Two Terminal Chows",
    "Pung of Terminals or Honours",
    "Melded Kong",
    "One Voided Suit",
    "No Honours",
    "Edge Wait",
    "Closed Wait",
    "Single Wait",
    "Self-Draw",
    "Dragon Pung",
    "Prevalent Wind",
    "Seat Wind",
    "Concealed Hand",
    "All Chows",
    "Tile Hog",
    "Mixed Double Pung",
    "Two Concealed Pungs",
    "Concealed Kong",
    "All Simples",
    "Outside Hand",
    "Fully Concealed Hand",
    "Last Tile",
    "All Pungs",
    "Half Flush",
    "Mixed Shifted Chows",
    "All Types",
    "Melded Hand",
    "Two Dragon Pungs",
    "Mixed Triple Chow",
    "Chicken Hand",
    "Rob Kong",
    "Mixed Straight",
    "Lesser Honours and Knitted Tiles",
    "Knitted Straight",
    "Upper Four",
    "Lower Four",
    "Pure Straight",
    "Pure Shifted Chows",
    "Seven Pairs",
    "Greater Honours and Knitted Tiles",
    "Full Flush",
];

/// Listed patterns rank first with Self-Draw last among them; everything
/// else trails with small counts.
fn listed_frequencies(table: &FanTable) -> FrequencyTable {
    let mut freq = FrequencyTable::default();
    let mut order: Vec<FanId> = LISTED.iter().map(|n| table.id_by_name(n).unwrap_or_else(|| panic!("{n}"))).collect();
    order.retain(|&id| id != fan::SELF_DRAW);
    order.push(fan::SELF_DRAW);
    for (i, &id) in order.iter().enumerate() {
        freq.counts.insert(id, 10_000 - i as u64);
    }
    freq
}

#[test]
fn empty_stream_counts_nothing() {
    let f = count_frequencies(Vec::<MatchRecord>::new(), false).unwrap();
    assert_eq!(f.matches, 0);
    assert_eq!(f.counts.len(), 81);
    assert!(f.counts.values().all(|&n| n == 0));
}

#[test]
fn one_record_counts_each_pattern_once() {
    let r = record("a", &[(fan::SEVEN_PAIRS, 1), (fan::CONCEALED_HAND, 1)]);
    let f = count_frequencies([&r], false).unwrap();
    assert_eq!(f.get(fan::SEVEN_PAIRS), 1);
    assert_eq!(f.get(fan::CONCEALED_HAND), 1);
    assert_eq!(f.counts.values().sum::<u64>(), 2);
    let r = record("b", &[(fan::PURE_DOUBLE_CHOW, 2)]);
    assert_eq!(count_frequencies([&r], false).unwrap().get(fan::PURE_DOUBLE_CHOW), 1);
    assert_eq!(count_frequencies([&r], true).unwrap().get(fan::PURE_DOUBLE_CHOW), 2);
}

#[test]
fn unknown_pattern_names_the_match() {
    let err = count_frequencies([record("bad-7", &[(90, 1)])], false).unwrap_err();
    assert!(err.to_string().contains("bad-7"), "{err}");
}

#[test]
fn csv_round_trip() {
    let table = FanTable::classic();
    let f = listed_frequencies(&table);
    let back = FrequencyTable::from_csv(&f.to_csv(&table), f.matches).unwrap();
    assert_eq!(back, f);
    assert!(f.to_csv(&table).lines().nth(1).unwrap().starts_with("1,Big Four Winds,0,"));
}

#[test]
fn top_k_breaks_ties_by_id() {
    let mut f = FrequencyTable::default();
    f.counts.insert(30, 5);
    f.counts.insert(12, 5);
    f.counts.insert(60, 9);
    assert_eq!(top_k(&f, 3), vec![60, 12, 30]);
    let all = top_k(&f, 81);
    let mut sorted = all.clone();
    sorted.sort();
    assert_eq!(sorted, (1..=81).collect::<Vec<_>>());
}

#[test]
fn listed_top_patterns_reproduce_the_revised_points() {
    let table = FanTable::classic();
    let freq = listed_frequencies(&table);
    let result = adapt_points(&freq, &table, &LUCK_EXEMPT).unwrap();
    assert_eq!(result.n, 43);
    let mut expected = REVISED_CHANGES.to_vec();
    expected.sort();
    let mut got = result.changed.clone();
    got.sort();
    assert_eq!(got, expected);
    assert_eq!(result.new_points[&fan::SEVEN_PAIRS], 16);
    assert_eq!(result.new_points[&fan::REVERSIBLE_TILES], 12);
    assert_eq!(result.new_points[&fan::LAST_TILE_DRAW], 8);
    assert_eq!(result.new_points[&fan::PURE_DOUBLE_CHOW], 1);
    let revised = result.to_table(&table).unwrap();
    assert_eq!(revised.point_map(), crate::ruleset::RuleSet::revised().table.point_map());
    let shown = result.to_string();
    assert!(shown.starts_with("pattern"));
    assert!(shown.contains("Seven Pairs"));
    assert_eq!(shown.lines().count(), 12);
}

#[test]
fn exemption_list_controls_luck_patterns() {
    let table = FanTable::classic();
    let freq = listed_frequencies(&table);
    let result = adapt_points(&freq, &table, &[]).unwrap();
    assert_eq!(result.new_points[&fan::LAST_TILE_DRAW], 12);
    assert_eq!(result.new_points[&fan::ROB_KONG], 8);
}

#[test]
fn missing_structural_pattern_is_an_error() {
    let table = FanTable::classic();
    let mut freq = listed_frequencies(&table);
    freq.counts.remove(&fan::ALL_GREEN);
    assert!(matches!(adapt_points(&freq, &table, &LUCK_EXEMPT), Err(BalanceError::MissingPattern(3))));
}

#[test]
fn compensation_examples() {
    let c = |a| compensation_from_averages(a, 0.1).unwrap().tenths;
    assert_eq!(c([1.0, 0.4, -0.3, -1.1]), [-10, -4, 3, 11]);
    assert_eq!(c([0.0; 4]), [0; 4]);
    assert_eq!(c([0.26, -0.26, 0.0, 0.0]), [-3, 3, 0, 0]);
    // Rounded values sum to -1 tenth; the seat rounded furthest down moves.
    assert_eq!(c([0.04, 0.04, 0.04, -0.12]), [-1, 0, 0, 1]);
    assert_eq!(compensation_from_averages([0.5, 0.5, -1.0, 0.0], 0.5).unwrap().tenths, [-5, -5, 10, 0]);
    assert!(compensation_from_averages([0.0; 4], 0.05).is_err());
}

proptest! {
    #[test]
    fn compensation_sums_to_zero(a in -30.0f64..30.0, b in -30.0f64..30.0, c in -30.0f64..30.0, d in -30.0f64..30.0) {
        let v = compensation_from_averages([a, b, c, d], 0.1).unwrap();
        prop_assert_eq!(v.tenths.iter().sum::<i32>(), 0);
    }

    #[test]
    fn compensation_tracks_zero_sum_averages(a in -30.0f64..30.0, b in -30.0f64..30.0, c in -30.0f64..30.0) {
        let avg = [a, b, c, -(a + b + c)];
        let v = compensation_from_averages(avg, 0.1).unwrap();
        for (t, x) in v.tenths.iter().zip(avg) {
            prop_assert!((*t as f64 / 10.0 + x).abs() <= 0.1 + 1e-9);
        }
    }

    #[test]
    fn frequency_folding_is_associative(split in 0usize..40, seed in any::<u64>()) {
        let mut rng = crate::rng::wall_rng(seed);
        let records: Vec<MatchRecord> = (0..40)
            .map(|i| {
                let n = crate::rng::below(&mut rng, 5) as usize;
                let fans: Vec<(FanId, u8)> = (0..n).map(|_| (1 + crate::rng::below(&mut rng, 81) as FanId, 1)).collect();
                record(&format!("m{i}"), &fans)
            })
            .collect();
        let whole = count_frequencies(&records, false).unwrap();
        let mut left = count_frequencies(&records[..split], false).unwrap();
        left.merge(&count_frequencies(&records[split..], false).unwrap());
        prop_assert_eq!(whole, left);
    }

    #[test]
    fn adaptation_moves_at_most_one_level(counts in proptest::collection::vec(0u64..1000, 81)) {
        let table = FanTable::classic();
        let mut freq = FrequencyTable::default();
        for (i, n) in counts.into_iter().enumerate() {
            freq.counts.insert(i as FanId + 1, n);
        }
        let result = adapt_points(&freq, &table, &LUCK_EXEMPT).unwrap();
        for (id, old, new) in result.changed {
            let (a, b) = (level_of(old).unwrap() as i64, level_of(new).unwrap() as i64);
            prop_assert_eq!((a - b).abs(), 1, "pattern {}", id);
        }
    }
}

fn one_suit_flags() -> EnumFlags {
    EnumFlags { honors: false, suits: 0b001, ..EnumFlags::default() }
}

/// Every character-only 14-tile holding with its copy weight, by brute force.
fn one_suit_hands() -> Vec<(KindCounts, u128)> {
    let choose = [1u128, 4, 6, 4, 1];
    let mut out = Vec::new();
    for code in 0..5u32.pow(9) {
        let mut c = KindCounts::default();
        let mut x = code;
        for i in 0..9 {
            c.0[i] = (x % 5) as u8;
            x /= 5;
        }
        if c.total() == 14 {
            out.push((c, c.0.iter().map(|&n| choose[n as usize]).product()));
        }
    }
    out
}

fn counts_of(ids: &[FanId], flags: &EnumFlags) -> Vec<u128> {
    enumerate_pattern_counts(ids, flags, &FanTable::classic())
        .unwrap()
        .into_iter()
        .map(|p| p.exact_count.try_into().unwrap())
        .collect()
}

#[test]
fn one_suit_counts_match_brute_force() {
    let hands = one_suit_hands();
    let flush: u128 = hands.iter().filter(|(c, _)| is_winning_shape(c, 0, true)).map(|(_, w)| w).sum();
    // Three copies of one run and a different fourth set; four copies
    // of a run are the quadruple pattern instead.
    let triple: u128 = hands
        .iter()
        .filter(|(c, _)| {
            (0..7).any(|r| {
                if c.0[r] < 3 || c.0[r + 1] < 3 || c.0[r + 2] < 3 {
                    return false;
                }
                let mut rest = *c;
                for i in r..r + 3 {
                    rest.0[i] -= 3;
                }
                crate::scoring::shape::standard_partitions(&rest, 1)
                    .iter()
                    .any(|(sets, _)| sets[0] != crate::scoring::RawSet::Chow(crate::tiles::TileKind::from_index(r)))
            })
        })
        .map(|(_, w)| w)
        .sum();
    let got = counts_of(&[fan::FULL_FLUSH, fan::PURE_TRIPLE_CHOW, fan::SEVEN_PAIRS], &one_suit_flags());
    assert_eq!(got[0], flush);
    assert_eq!(got[1], triple);
    // Seven distinct pairs among nine kinds.
    assert_eq!(got[2], 36 * 6u128.pow(7));
}

#[test]
fn loose_seven_pairs_adds_doubled_pairs() {
    let strict = counts_of(&[fan::SEVEN_PAIRS], &one_suit_flags())[0];
    let loose = counts_of(&[fan::SEVEN_PAIRS], &EnumFlags { strict_seven_pairs: false, ..one_suit_flags() })[0];
    // One, two or three kinds held four times, the rest as distinct pairs.
    assert_eq!(loose - strict, 9 * 56 * 6u128.pow(5) + 36 * 35 * 6u128.pow(3) + 84 * 6 * 6);
}

#[test]
fn orphans_without_honours_is_empty() {
    let flags = EnumFlags { honors: false, suits: 0b001, ..EnumFlags::default() };
    let got = enumerate_pattern_counts(&[fan::THIRTEEN_ORPHANS], &flags, &FanTable::classic()).unwrap();
    assert_eq!(got[0].exact_count, num_bigint::BigUint::ZERO);
    assert_eq!(got[0].magnitude, None);
}

#[test]
fn context_patterns_are_rejected() {
    let t = FanTable::classic();
    for id in [fan::LAST_TILE_DRAW, fan::SELF_DRAW, fan::EDGE_WAIT, fan::MELDED_KONG] {
        assert!(matches!(enumerate_pattern_counts(&[id], &EnumFlags::default(), &t), Err(BalanceError::Unsupported(..))));
    }
}

#[test]
fn suit_relabelling_preserves_counts() {
    let flags = EnumFlags { honors: false, suits: 0b011, ..EnumFlags::default() };
    let table = FanTable::classic();
    let ids = [fan::MIXED_DOUBLE_CHOW, fan::ONE_VOIDED_SUIT, fan::ALL_SIMPLES, fan::PURE_STRAIGHT, fan::MIXED_DOUBLE_PUNG];
    let swap = |c: &KindCounts| {
        let mut s = *c;
        s.0[..9].copy_from_slice(&c.0[9..18]);
        s.0[9..18].copy_from_slice(&c.0[..9]);
        s
    };
    let (plain, swapped) = fold_winning_hands(
        &flags,
        || ([0u64; 5], [0u64; 5]),
        |acc, c| {
            let a = hand_patterns(c, &table, true);
            let b = hand_patterns(&swap(c), &table, true);
            for (i, &id) in ids.iter().enumerate() {
                acc.0[i] += a[id as usize] as u64;
                acc.1[i] += b[id as usize] as u64;
            }
        },
        |mut x, y| {
            for i in 0..5 {
                x.0[i] += y.0[i];
                x.1[i] += y.1[i];
            }
            x
        },
    );
    assert_eq!(plain, swapped);
    assert!(plain.iter().all(|&n| n > 0));
}
