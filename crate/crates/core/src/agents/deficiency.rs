//! Structural distance to a winning shape.
//!
//! deficiency = tiles in a complete concealed part minus the largest
//! overlap between the holding and any winning multiset. Standard shapes
//! are searched per suit over rank-count vectors and the per-suit tables
//! are memoised.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::scoring::KnittedArrangement;
use crate::tiles::{Hand, KindCounts, NUM_KINDS};

const NEG: i8 = i8::MIN / 2;

/// best[sets][pair] = largest overlap using exactly that many sets and pairs.
type SuitTable = [[i8; 2]; 5];

thread_local! {
    static SUIT_MEMO: RefCell<HashMap<u64, SuitTable>> = RefCell::new(HashMap::new());
}

fn key(h: &[u8], cap: &[u8]) -> u64 {
    h.iter().chain(cap).fold(0u64, |acc, &x| acc * 5 + x as u64)
}

fn suit_table(h: &[u8], cap: &[u8]) -> SuitTable {
    let k = key(h, cap);
    if let Some(t) = SUIT_MEMO.with(|m| m.borrow().get(&k).copied()) {
        return t;
    }
    let best = suit_dp(h, cap);
    SUIT_MEMO.with(|m| {
        let mut m = m.borrow_mut();
        if m.len() > 1 << 20 {
            m.clear();
        }
        m.insert(k, best);
    });
    best
}

/// Forward DP over ranks. State: chows started at the previous rank,
/// chows started two ranks back, sets used, pair used.
fn suit_dp(h: &[u8], cap: &[u8]) -> SuitTable {
    type State = [[[[i8; 2]; 5]; 5]; 5];
    let mut dp: State = [[[[NEG; 2]; 5]; 5]; 5];
    dp[0][0][0][0] = 0;
    for i in 0..9 {
        let mut next: State = [[[[NEG; 2]; 5]; 5]; 5];
        for a in 0..5u8 {
            for b in 0..5u8 - a {
                let carried = a + b;
                if carried > cap[i] {
                    continue;
                }
                for sets in 0..5u8 {
                    for pair in 0..2u8 {
                        let acc = dp[a as usize][b as usize][sets as usize][pair as usize];
                        if acc == NEG {
                            continue;
                        }
                        let max_new = if i <= 6 { 4 - sets } else { 0 };
                        for c in 0..=max_new {
                            for p in 0..=1u8 {
                                if sets + c + p > 4 {
                                    break;
                                }
                                for q in 0..=(1 - pair) {
                                    let w = carried + c + 3 * p + 2 * q;
                                    if w > cap[i] {
                                        continue;
                                    }
                                    let v = acc + h[i].min(w) as i8;
                                    let slot = &mut next[c as usize][a as usize][(sets + c + p) as usize][(pair + q) as usize];
                                    if v > *slot {
                                        *slot = v;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        dp = next;
    }
    let mut best = [[NEG; 2]; 5];
    for sets in 0..5 {
        for pair in 0..2 {
            best[sets][pair] = dp[0][0][sets][pair];
        }
    }
    best
}

fn honor_table(h: u8, cap: u8) -> SuitTable {
    let mut t = [[NEG; 2]; 5];
    t[0][0] = 0;
    if cap >= 3 {
        t[1][0] = h.min(3) as i8;
    }
    if cap >= 2 {
        t[0][1] = h.min(2) as i8;
    }
    t
}

fn combine(x: &SuitTable, y: &SuitTable) -> SuitTable {
    let mut out = [[NEG; 2]; 5];
    for s1 in 0..5 {
        for p1 in 0..2 {
            if x[s1][p1] == NEG {
                continue;
            }
            for s2 in 0..5 - s1 {
                for p2 in 0..2 - p1 {
                    if y[s2][p2] == NEG {
                        continue;
                    }
                    let v = x[s1][p1] + y[s2][p2];
                    let slot = &mut out[s1 + s2][p1 + p2];
                    *slot = (*slot).max(v);
                }
            }
        }
    }
    out
}

/// Largest overlap with `sets` sets plus a pair, each kind limited by `cap`.
fn standard_overlap(h: &[u8; NUM_KINDS], cap: &[u8; NUM_KINDS], sets: usize) -> i32 {
    let mut acc = suit_table(&h[0..9], &cap[0..9]);
    for s in 1..3 {
        acc = combine(&acc, &suit_table(&h[s * 9..s * 9 + 9], &cap[s * 9..s * 9 + 9]));
    }
    for k in 27..NUM_KINDS {
        acc = combine(&acc, &honor_table(h[k], cap[k]));
    }
    acc[sets][1] as i32
}

fn seven_pairs_overlap(h: &[u8; NUM_KINDS]) -> i32 {
    let mut slots: Vec<u8> = Vec::with_capacity(2 * NUM_KINDS);
    for &n in h {
        slots.push(n.min(2));
        slots.push(n.saturating_sub(2).min(2));
    }
    slots.sort_unstable_by(|a, b| b.cmp(a));
    slots.iter().take(7).map(|&x| x as i32).sum()
}

fn orphans_overlap(h: &[u8; NUM_KINDS]) -> i32 {
    let orphans = crate::scoring::shape::orphan_kinds();
    let mut distinct = 0;
    let mut pair = 0;
    for k in orphans {
        let n = h[k.index()];
        if n > 0 {
            distinct += 1;
        }
        if n >= 2 {
            pair = 1;
        }
    }
    distinct + pair
}

fn honors_knitted_overlap(h: &[u8; NUM_KINDS]) -> i32 {
    let honors = (27..NUM_KINDS).filter(|&k| h[k] > 0).count() as i32;
    KnittedArrangement::ALL
        .iter()
        .map(|arr| arr.kinds().iter().filter(|k| h[k.index()] > 0).count() as i32 + honors)
        .max()
        .unwrap_or(0)
        .min(14)
}

/// Returns `floor` unless some knitted straight shape beats it.
fn knitted_straight_overlap(h: &[u8; NUM_KINDS], cap: &[u8; NUM_KINDS], sets: usize, floor: i32) -> i32 {
    let mut best = floor;
    let rest_size = (3 * sets + 2) as i32;
    for arr in KnittedArrangement::ALL {
        let held = arr.kinds().iter().filter(|k| h[k.index()] > 0).count() as i32;
        if held + rest_size <= best {
            continue;
        }
        let mut rest = *h;
        let mut rest_cap = *cap;
        let mut base = 0;
        let mut ok = true;
        for k in arr.kinds() {
            let i = k.index();
            if cap[i] == 0 {
                ok = false;
                break;
            }
            rest_cap[i] -= 1;
            if rest[i] > 0 {
                rest[i] -= 1;
                base += 1;
            }
        }
        if ok {
            let extra = standard_overlap(&rest, &rest_cap, sets);
            if extra >= 0 {
                best = best.max(base + extra);
            }
        }
    }
    best
}

/// Deficiency from concealed counts and the number of declared melds.
/// `melded` holds the tiles already locked in those melds.
pub fn deficiency_counts(concealed: &KindCounts, melded: &KindCounts, melds: usize) -> u32 {
    let sets = 4usize.saturating_sub(melds);
    let target = (3 * sets + 2) as i32;
    let h = &concealed.0;
    let mut cap = [4u8; NUM_KINDS];
    for (c, m) in cap.iter_mut().zip(melded.0.iter()) {
        *c = c.saturating_sub(*m);
    }
    let mut overlap = standard_overlap(h, &cap, sets);
    if melds == 0 {
        overlap = overlap.max(seven_pairs_overlap(h));
        overlap = overlap.max(orphans_overlap(h));
        overlap = overlap.max(honors_knitted_overlap(h));
    }
    if melds <= 1 {
        overlap = knitted_straight_overlap(h, &cap, 1 - melds, overlap);
    }
    (target - overlap.min(target)).max(0) as u32
}

/// Minimum tile replacements (or additions, for a 13-tile holding) to reach a winning shape.
pub fn deficiency(hand: &Hand) -> u32 {
    let concealed = hand.concealed_counts();
    let mut melded = KindCounts::default();
    for m in &hand.melds {
        for t in &m.tiles {
            melded.add(t.kind);
        }
    }
    deficiency_counts(&concealed, &melded, hand.melds.len())
}
