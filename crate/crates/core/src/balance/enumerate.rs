//! Exact counts of 14-tile winning hands carrying a pattern.
//!
//! A hand is a multiset over the 34 kinds with at most four of each; it is
//! weighted by the number of ways to pick its physical copies, the product
//! of C(4, n) over kinds. Standard hands are built suit by suit from the
//! complete shapes of each suit, so every multiset is produced exactly once.
//! Special forms that are not also standard shapes are added separately.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::BalanceError;
use crate::scoring::shape::{self, KnittedArrangement};
use crate::scoring::{decompose, detect_structural, fan, FanId, FanTable, PatternKind, WinBy, WinContext, NUM_PATTERNS};
use crate::tiles::{Hand, KindCounts, TileKind, NUM_KINDS};

/// Suit masks for [`EnumFlags::suits`].
pub const SUPPORTED_SUITS: u8 = 0b111;

const CHOOSE4: [u128; 5] = [1, 4, 6, 4, 1];

/// Patterns that depend on melds, kongs, the wait, seat or the fan total.
const CONTEXTUAL: [FanId; 16] = [
    fan::FOUR_KONGS,
    fan::THREE_KONGS,
    fan::TWO_CONCEALED_KONGS,
    fan::MELDED_AND_CONCEALED_KONGS,
    fan::TWO_MELDED_KONGS,
    fan::MELDED_KONG,
    fan::CONCEALED_KONG,
    fan::MELDED_HAND,
    fan::FULLY_CONCEALED_HAND,
    fan::CONCEALED_HAND,
    fan::PREVALENT_WIND,
    fan::SEAT_WIND,
    fan::EDGE_WAIT,
    fan::CLOSED_WAIT,
    fan::SINGLE_WAIT,
    fan::CHICKEN_HAND,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumFlags {
    /// Seven Pairs needs seven different kinds.
    pub strict_seven_pairs: bool,
    pub honors: bool,
    /// Bit i allows suit i (characters, dots, bamboo).
    pub suits: u8,
    pub kongs: bool,
}

impl Default for EnumFlags {
    fn default() -> Self {
        EnumFlags { strict_seven_pairs: true, honors: true, suits: SUPPORTED_SUITS, kongs: false }
    }
}

impl EnumFlags {
    fn allows(&self, c: &KindCounts) -> bool {
        (0..NUM_KINDS).all(|i| {
            c.0[i] == 0
                || match TileKind::from_index(i).suit() {
                    Some(s) => self.suits & (1 << s) != 0,
                    None => self.honors,
                }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternCount {
    pub pattern_id: FanId,
    pub name: String,
    #[serde(serialize_with = "decimal")]
    pub exact_count: BigUint,
    /// floor(log10(exact_count)); none for an empty count.
    pub magnitude: Option<u32>,
}

impl PatternCount {
    fn new(pattern_id: FanId, name: String, exact_count: BigUint) -> PatternCount {
        let magnitude = (exact_count != BigUint::ZERO).then(|| exact_count.to_str_radix(10).len() as u32 - 1);
        PatternCount { pattern_id, name, exact_count, magnitude }
    }
}

fn decimal<S: serde::Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_str_radix(10))
}

fn weight(c: &KindCounts) -> u128 {
    c.0.iter().map(|&n| CHOOSE4[n as usize]).product()
}

fn suit_sets_only(v: &mut [u8; 9], from: usize) -> bool {
    let Some(i) = (from..9).find(|&i| v[i] > 0) else { return true };
    let n = v[i];
    for pungs in 0..=1u8 {
        if 3 * pungs > n {
            break;
        }
        let chows = n - 3 * pungs;
        if chows > 0 && !(i <= 6 && v[i + 1] >= chows && v[i + 2] >= chows) {
            continue;
        }
        v[i] -= n;
        if chows > 0 {
            v[i + 1] -= chows;
            v[i + 2] -= chows;
        }
        let ok = suit_sets_only(v, i + 1);
        v[i] += n;
        if chows > 0 {
            v[i + 1] += chows;
            v[i + 2] += chows;
        }
        if ok {
            return true;
        }
    }
    false
}

fn suit_complete(v: &[u8; 9], pair: bool) -> bool {
    let mut v = *v;
    if !pair {
        return suit_sets_only(&mut v, 0);
    }
    for p in 0..9 {
        if v[p] >= 2 {
            v[p] -= 2;
            let ok = suit_sets_only(&mut v, 0);
            v[p] += 2;
            if ok {
                return true;
            }
        }
    }
    false
}

/// Complete shapes of one suit keyed by (sets, pair).
fn suit_shapes() -> BTreeMap<(usize, usize), Vec<[u8; 9]>> {
    let mut out: BTreeMap<(usize, usize), Vec<[u8; 9]>> = BTreeMap::new();
    for code in 0..5u32.pow(9) {
        let mut v = [0u8; 9];
        let mut x = code;
        for r in v.iter_mut() {
            *r = (x % 5) as u8;
            x /= 5;
        }
        let total: usize = v.iter().map(|&n| n as usize).sum();
        if total > 14 || total % 3 == 1 {
            continue;
        }
        let pair = usize::from(total % 3 == 2);
        if suit_complete(&v, pair == 1) {
            out.entry((total / 3, pair)).or_default().push(v);
        }
    }
    out
}

/// Honour shapes: pungs and at most one pair.
fn honor_shapes() -> BTreeMap<(usize, usize), Vec<[u8; 7]>> {
    let mut out: BTreeMap<(usize, usize), Vec<[u8; 7]>> = BTreeMap::new();
    for code in 0..3u32.pow(7) {
        let mut v = [0u8; 7];
        let mut x = code;
        for r in v.iter_mut() {
            *r = [0, 2, 3][(x % 3) as usize];
            x /= 3;
        }
        let pairs = v.iter().filter(|&&n| n == 2).count();
        let pungs = v.iter().filter(|&&n| n == 3).count();
        if pairs <= 1 && pungs <= 4 {
            out.entry((pungs, pairs)).or_default().push(v);
        }
    }
    out
}

fn place(c: &mut KindCounts, base: usize, v: &[u8]) {
    c.0[base..base + v.len()].copy_from_slice(v);
}

/// Seven-pair hands that are not standard shapes, split by first kind.
fn pair_hands(first: usize, strict: bool, visit: &mut dyn FnMut(&KindCounts)) {
    fn rec(c: &mut KindCounts, from: usize, left: u8, strict: bool, visit: &mut dyn FnMut(&KindCounts)) {
        if left == 0 {
            visit(c);
            return;
        }
        for i in from..NUM_KINDS {
            let max = if strict { 1 } else { 2.min(left) };
            for pairs in 1..=max {
                c.0[i] = 2 * pairs;
                rec(c, i + 1, left - pairs, strict, visit);
            }
            c.0[i] = 0;
        }
    }
    let mut c = KindCounts::default();
    let max = if strict { 1 } else { 2 };
    for pairs in 1..=max {
        c.0[first] = 2 * pairs;
        rec(&mut c, first + 1, 7 - pairs, strict, visit);
    }
}

/// Thirteen orphans, honours-and-knitted and knitted-straight hands.
fn other_special_hands() -> Vec<KindCounts> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut push = |c: KindCounts| {
        if seen.insert(c.0) {
            out.push(c);
        }
    };
    let orphans: Vec<TileKind> = shape::orphan_kinds().collect();
    for &extra in &orphans {
        let mut c = KindCounts::from_kinds(&orphans);
        c.add(extra);
        push(c);
    }
    for arr in KnittedArrangement::ALL {
        let pool: Vec<TileKind> = arr.kinds().into_iter().chain((27..34).map(TileKind::from_index)).collect();
        for skip_a in 0..pool.len() {
            for skip_b in skip_a + 1..pool.len() {
                let kinds: Vec<TileKind> =
                    pool.iter().enumerate().filter(|&(i, _)| i != skip_a && i != skip_b).map(|(_, &k)| k).collect();
                push(KindCounts::from_kinds(&kinds));
            }
        }
        let base = KindCounts::from_kinds(&arr.kinds());
        for set_start in 0..NUM_KINDS {
            for chow in [false, true] {
                let set: Vec<TileKind> = if chow {
                    let k = TileKind::from_index(set_start);
                    match (k.is_numbered() && k.rank() <= 7).then(|| [k, k.offset(1).unwrap(), k.offset(2).unwrap()]) {
                        Some(s) => s.to_vec(),
                        None => continue,
                    }
                } else {
                    vec![TileKind::from_index(set_start); 3]
                };
                for pair in 0..NUM_KINDS {
                    let mut c = base;
                    for &k in &set {
                        c.add(k);
                    }
                    c.add(TileKind::from_index(pair));
                    c.add(TileKind::from_index(pair));
                    if c.0.iter().all(|&n| n <= 4) {
                        push(c);
                    }
                }
            }
        }
    }
    out
}

/// Patterns present in at least one decomposition of a complete hand.
pub fn hand_patterns(c: &KindCounts, table: &FanTable, strict: bool) -> [bool; NUM_PATTERNS + 1] {
    let mut kinds = c.to_kinds();
    let winning = kinds.pop().expect("non-empty hand");
    let hand = Hand::from_kinds(&kinds, vec![]);
    let context = WinContext::simple(WinBy::SelfDraw, winning);
    let mut present = [false; NUM_PATTERNS + 1];
    for d in decompose(&hand, winning, strict).unwrap_or_default() {
        for (id, _) in detect_structural(&d, &context, table) {
            present[id as usize] = true;
        }
    }
    present
}

/// Folds `visit` over every complete 14-tile hand allowed by `flags`,
/// in parallel; `merge` must be commutative for a deterministic result.
pub fn fold_winning_hands<A: Send>(
    flags: &EnumFlags,
    init: impl Fn() -> A + Sync + Send,
    visit: impl Fn(&mut A, &KindCounts) + Sync + Send,
    merge: impl Fn(A, A) -> A + Sync + Send,
) -> A {
    let suits = suit_shapes();
    let honors = honor_shapes();
    let empty_suit = BTreeMap::from([((0, 0), vec![[0u8; 9]])]);
    let empty_honor = BTreeMap::from([((0, 0), vec![[0u8; 7]])]);
    let per_suit: Vec<&BTreeMap<(usize, usize), Vec<[u8; 9]>>> =
        (0..3).map(|s| if flags.suits & (1 << s) != 0 { &suits } else { &empty_suit }).collect();
    let honor = if flags.honors { &honors } else { &empty_honor };

    let firsts: Vec<((usize, usize), [u8; 9])> =
        per_suit[0].iter().flat_map(|(&key, vs)| vs.iter().map(move |&v| (key, v))).collect();
    let standard = firsts
        .par_iter()
        .fold(&init, |mut acc, &((s0, p0), v0)| {
            let mut c = KindCounts::default();
            place(&mut c, 0, &v0);
            for (&(s1, p1), vs1) in per_suit[1] {
                if s0 + s1 > 4 || p0 + p1 > 1 {
                    continue;
                }
                for v1 in vs1 {
                    place(&mut c, 9, v1);
                    for (&(s2, p2), vs2) in per_suit[2] {
                        if s0 + s1 + s2 > 4 || p0 + p1 + p2 > 1 {
                            continue;
                        }
                        let Some(hs) = honor.get(&(4 - s0 - s1 - s2, 1 - p0 - p1 - p2)) else { continue };
                        for v2 in vs2 {
                            place(&mut c, 18, v2);
                            for h in hs {
                                place(&mut c, 27, h);
                                visit(&mut acc, &c);
                            }
                        }
                    }
                }
            }
            acc
        })
        .reduce(&init, &merge);

    let strict = flags.strict_seven_pairs;
    let pairs = (0..NUM_KINDS)
        .into_par_iter()
        .fold(&init, |mut acc, first| {
            pair_hands(first, strict, &mut |c| {
                if flags.allows(c) && !shape::is_standard_complete(c, 4) {
                    visit(&mut acc, c);
                }
            });
            acc
        })
        .reduce(&init, &merge);

    let mut rest = init();
    for c in other_special_hands() {
        if flags.allows(&c) && !shape::is_standard_complete(&c, 4) {
            visit(&mut rest, &c);
        }
    }
    merge(merge(standard, pairs), rest)
}

/// Weighted number of complete hands carrying each pattern.
pub fn enumerate_pattern_counts(
    patterns: &[FanId],
    flags: &EnumFlags,
    table: &FanTable,
) -> Result<Vec<PatternCount>, BalanceError> {
    for &id in patterns {
        if id == 0 || id as usize > NUM_PATTERNS {
            return Err(BalanceError::OutOfRange(id));
        }
        let p = table.get(id);
        if p.kind == PatternKind::Luck || CONTEXTUAL.contains(&id) {
            return Err(BalanceError::Unsupported(id, p.name.clone()));
        }
    }
    if flags.kongs {
        return Err(BalanceError::Unsupported(fan::MELDED_KONG, "hands with kongs".into()));
    }
    let wanted: Vec<FanId> = patterns.to_vec();
    let strict = flags.strict_seven_pairs;
    let totals = fold_winning_hands(
        flags,
        || vec![0u128; wanted.len()],
        |acc, c| {
            let present = hand_patterns(c, table, strict);
            if wanted.iter().any(|&id| present[id as usize]) {
                let w = weight(c);
                for (a, &id) in acc.iter_mut().zip(&wanted) {
                    if present[id as usize] {
                        *a += w;
                    }
                }
            }
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    );
    Ok(wanted
        .iter()
        .zip(totals)
        .map(|(&id, n)| PatternCount::new(id, table.name(id).to_string(), BigUint::from(n)))
        .collect())
}
