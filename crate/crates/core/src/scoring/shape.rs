//! Count-vector shape search: standard set/pair partitions and the
//! special winning forms.

use crate::tiles::{KindCounts, TileKind, NUM_KINDS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RawSet {
    /// Lowest tile of the run.
    Chow(TileKind),
    Pung(TileKind),
}

/// Which suit carries 1-4-7, 2-5-8 and 3-6-9 respectively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct KnittedArrangement(pub [usize; 3]);

impl KnittedArrangement {
    pub const ALL: [KnittedArrangement; 6] = [
        KnittedArrangement([0, 1, 2]),
        KnittedArrangement([0, 2, 1]),
        KnittedArrangement([1, 0, 2]),
        KnittedArrangement([1, 2, 0]),
        KnittedArrangement([2, 0, 1]),
        KnittedArrangement([2, 1, 0]),
    ];

    /// The nine knitted kinds.
    pub fn kinds(self) -> [TileKind; 9] {
        let mut out = [TileKind::from_index(0); 9];
        for (offset, &suit) in self.0.iter().enumerate() {
            for step in 0..3 {
                out[offset * 3 + step] = TileKind::from_index(suit * 9 + offset + step * 3);
            }
        }
        out
    }
}

const ORPHANS: [usize; 13] = [0, 8, 9, 17, 18, 26, 27, 28, 29, 30, 31, 32, 33];

pub fn orphan_kinds() -> impl Iterator<Item = TileKind> {
    ORPHANS.iter().map(|&i| TileKind::from_index(i))
}

/// All distinct ways to split `counts` into `sets` sets plus one pair.
/// Each result is the set list in canonical (sorted) order and the pair kind.
pub fn standard_partitions(counts: &KindCounts, sets: usize) -> Vec<(Vec<RawSet>, TileKind)> {
    let mut out = Vec::new();
    if counts.total() != 3 * sets + 2 {
        return out;
    }
    let mut c = counts.0;
    for p in 0..NUM_KINDS {
        if c[p] >= 2 {
            c[p] -= 2;
            let mut acc = Vec::with_capacity(sets);
            partition_sets(&mut c, 0, &mut acc, &mut |found| {
                let mut v = found.to_vec();
                v.sort();
                out.push((v, TileKind::from_index(p)));
            });
            c[p] += 2;
        }
    }
    out
}

/// Partitions `c` (which must total a multiple of three) entirely into sets.
pub fn set_partitions(counts: &KindCounts) -> Vec<Vec<RawSet>> {
    let mut out = Vec::new();
    let mut c = counts.0;
    let mut acc = Vec::new();
    partition_sets(&mut c, 0, &mut acc, &mut |found| {
        let mut v = found.to_vec();
        v.sort();
        out.push(v);
    });
    out
}

fn partition_sets(c: &mut [u8; NUM_KINDS], from: usize, acc: &mut Vec<RawSet>, emit: &mut dyn FnMut(&[RawSet])) {
    let Some(i) = (from..NUM_KINDS).find(|&i| c[i] > 0) else {
        emit(acc);
        return;
    };
    let n = c[i];
    for pungs in 0..=1u8 {
        if 3 * pungs > n {
            break;
        }
        let chows = n - 3 * pungs;
        if chows > 0 {
            let numbered_ok = i < 27 && i % 9 <= 6;
            if !numbered_ok || c[i + 1] < chows || c[i + 2] < chows {
                continue;
            }
        }
        let kind = TileKind::from_index(i);
        c[i] -= 3 * pungs + chows;
        if chows > 0 {
            c[i + 1] -= chows;
            c[i + 2] -= chows;
        }
        let before = acc.len();
        if pungs == 1 {
            acc.push(RawSet::Pung(kind));
        }
        for _ in 0..chows {
            acc.push(RawSet::Chow(kind));
        }
        partition_sets(c, i + 1, acc, emit);
        acc.truncate(before);
        c[i] += 3 * pungs + chows;
        if chows > 0 {
            c[i + 1] += chows;
            c[i + 2] += chows;
        }
    }
}

/// True when `c` splits into `sets` sets and one pair (no allocation).
pub fn is_standard_complete(counts: &KindCounts, sets: usize) -> bool {
    if counts.total() != 3 * sets + 2 {
        return false;
    }
    let mut c = counts.0;
    for p in 0..NUM_KINDS {
        if c[p] >= 2 {
            c[p] -= 2;
            let ok = all_sets(&mut c, 0);
            c[p] += 2;
            if ok {
                return true;
            }
        }
    }
    false
}

fn all_sets(c: &mut [u8; NUM_KINDS], from: usize) -> bool {
    let Some(i) = (from..NUM_KINDS).find(|&i| c[i] > 0) else {
        return true;
    };
    let n = c[i];
    for pungs in 0..=1u8 {
        if 3 * pungs > n {
            break;
        }
        let chows = n - 3 * pungs;
        if chows > 0 && !(i < 27 && i % 9 <= 6 && c[i + 1] >= chows && c[i + 2] >= chows) {
            continue;
        }
        c[i] -= 3 * pungs + chows;
        if chows > 0 {
            c[i + 1] -= chows;
            c[i + 2] -= chows;
        }
        let ok = all_sets(c, i + 1);
        c[i] += 3 * pungs + chows;
        if chows > 0 {
            c[i + 1] += chows;
            c[i + 2] += chows;
        }
        if ok {
            return true;
        }
    }
    false
}

/// Seven pairs: with `strict`, the seven pairs must be of distinct kinds.
pub fn is_seven_pairs(counts: &KindCounts, strict: bool) -> bool {
    counts.total() == 14
        && counts.0.iter().all(|&n| n % 2 == 0 && (!strict || n <= 2))
}

pub fn is_thirteen_orphans(counts: &KindCounts) -> bool {
    counts.total() == 14
        && ORPHANS.iter().all(|&i| counts.0[i] >= 1)
        && ORPHANS.iter().map(|&i| counts.0[i] as usize).sum::<usize>() == 14
}

/// 14 distinct tiles drawn from the seven honours and one knitted arrangement.
pub fn honors_and_knitted(counts: &KindCounts) -> Option<KnittedArrangement> {
    if counts.total() != 14 || counts.0.iter().any(|&n| n > 1) {
        return None;
    }
    KnittedArrangement::ALL.into_iter().find(|arr| {
        let knitted = arr.kinds();
        counts.kinds().all(|k| k.is_honor() || knitted.contains(&k))
    })
}

/// Knitted straight plus `sets` sets and a pair from the remainder.
pub fn knitted_straight_partitions(
    counts: &KindCounts,
    sets: usize,
) -> Vec<(KnittedArrangement, Vec<RawSet>, TileKind)> {
    let mut out = Vec::new();
    if counts.total() != 9 + 3 * sets + 2 {
        return out;
    }
    for arr in KnittedArrangement::ALL {
        let kinds = arr.kinds();
        if kinds.iter().all(|k| counts.get(*k) >= 1) {
            let mut rest = *counts;
            for k in kinds {
                rest.remove(k);
            }
            for (s, p) in standard_partitions(&rest, sets) {
                out.push((arr, s, p));
            }
        }
    }
    out
}

/// Any winning shape for a concealed part with `melds` exposed sets.
pub fn is_winning_shape(counts: &KindCounts, melds: usize, strict_pairs: bool) -> bool {
    let sets = 4 - melds.min(4);
    if is_standard_complete(counts, sets) {
        return true;
    }
    if melds == 0
        && (is_seven_pairs(counts, strict_pairs) || is_thirteen_orphans(counts) || honors_and_knitted(counts).is_some())
    {
        return true;
    }
    melds <= 1 && !knitted_straight_partitions(counts, 1 - melds).is_empty()
}

/// Kinds that would complete a 13-tile-equivalent concealed part.
/// Kinds the hand already holds all four of are skipped.
pub fn waiting_kinds(counts: &KindCounts, held_all: &KindCounts, melds: usize, strict_pairs: bool) -> Vec<TileKind> {
    let mut out = Vec::new();
    let mut c = *counts;
    for k in TileKind::all(false) {
        if held_all.get(k) >= 4 {
            continue;
        }
        c.add(k);
        if is_winning_shape(&c, melds, strict_pairs) {
            out.push(k);
        }
        c.remove(k);
    }
    out
}
