//! Pattern detection for one decomposition and one placement of the
//! winning tile, followed by table-driven exclusion.

use super::table::{fan, FanId, FanTable, NUM_PATTERNS};
use super::{Block, BlockKind, Decomposition, SpecialForm, WinBy, WinContext};
use crate::tiles::{KindCounts, TileKind};

/// Multiplicity per pattern id (index 0 unused).
pub(crate) type Detected = [u8; NUM_PATTERNS + 1];

/// Where the winning tile sits in a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Role {
    /// Inside concealed set `index` at offset `pos` (0 for pungs).
    Set { index: usize, pos: u8 },
    Pair,
    /// Inside a special-form body (knitted part, pairs, orphans).
    Body,
}

pub(crate) fn roles(decomp: &Decomposition, winning: TileKind) -> Vec<Role> {
    let mut out = Vec::new();
    for (index, b) in decomp.sets.iter().enumerate() {
        if b.from_meld {
            continue;
        }
        match b.kind {
            BlockKind::Chow => {
                let start = b.tile.index();
                if (start..start + 3).contains(&winning.index()) {
                    out.push(Role::Set { index, pos: (winning.index() - start) as u8 });
                }
            }
            _ => {
                if b.tile == winning {
                    out.push(Role::Set { index, pos: 0 });
                }
            }
        }
    }
    if decomp.pair == Some(winning) {
        out.push(Role::Pair);
    }
    if let Some(form) = decomp.special_form {
        let in_body = match form {
            SpecialForm::KnittedStraight(arr) => arr.kinds().contains(&winning),
            _ => true,
        };
        if in_body {
            out.push(Role::Body);
        }
    }
    out.dedup();
    out
}

fn is_terminal_or_honor_block(b: &Block) -> bool {
    match b.kind {
        BlockKind::Chow => b.tile.rank() == 1 || b.tile.rank() == 7,
        _ => b.tile.is_terminal_or_honor(),
    }
}

fn block_has_five(b: &Block) -> bool {
    match b.kind {
        BlockKind::Chow => (3..=5).contains(&b.tile.rank()),
        _ => b.tile.is_numbered() && b.tile.rank() == 5,
    }
}

/// Patterns fixed by the multiset of tiles alone.
fn tile_fans(counts: &KindCounts, d: &mut Detected) {
    let kinds: Vec<TileKind> = counts.kinds().collect();
    let mut suits = [false; 3];
    let mut winds = false;
    let mut dragons = false;
    for k in &kinds {
        match k.suit() {
            Some(s) => suits[s] = true,
            None if k.index() < 31 => winds = true,
            None => dragons = true,
        }
    }
    let n_suits = suits.iter().filter(|&&s| s).count();
    let honors = winds || dragons;
    let all = |f: &dyn Fn(TileKind) -> bool| kinds.iter().all(|&k| f(k));
    let numbered_in = |lo: u8, hi: u8| all(&|k| k.is_numbered() && (lo..=hi).contains(&k.rank()));

    if n_suits == 1 && !honors {
        d[fan::FULL_FLUSH as usize] = 1;
    }
    if n_suits == 1 && honors {
        d[fan::HALF_FLUSH as usize] = 1;
    }
    if n_suits == 2 {
        d[fan::ONE_VOIDED_SUIT as usize] = 1;
    }
    if !honors {
        d[fan::NO_HONOURS as usize] = 1;
    }
    if numbered_in(2, 8) {
        d[fan::ALL_SIMPLES as usize] = 1;
    }
    if n_suits == 3 && winds && dragons {
        d[fan::ALL_TYPES as usize] = 1;
    }
    if all(&is_reversible) {
        d[fan::REVERSIBLE_TILES as usize] = 1;
    }
    if all(&is_green) {
        d[fan::ALL_GREEN as usize] = 1;
    }
    if all(&|k| k.is_honor()) {
        d[fan::ALL_HONOURS as usize] = 1;
    }
    if all(&|k| k.is_terminal()) {
        d[fan::ALL_TERMINALS as usize] = 1;
    }
    if all(&|k| k.is_terminal_or_honor()) {
        d[fan::ALL_TERMINALS_AND_HONOURS as usize] = 1;
    }
    if numbered_in(7, 9) {
        d[fan::UPPER_TILES as usize] = 1;
    }
    if numbered_in(4, 6) {
        d[fan::MIDDLE_TILES as usize] = 1;
    }
    if numbered_in(1, 3) {
        d[fan::LOWER_TILES as usize] = 1;
    }
    if numbered_in(6, 9) {
        d[fan::UPPER_FOUR as usize] = 1;
    }
    if numbered_in(1, 4) {
        d[fan::LOWER_FOUR as usize] = 1;
    }
}

fn is_reversible(k: TileKind) -> bool {
    match k.suit() {
        Some(1) => matches!(k.rank(), 1 | 2 | 3 | 4 | 5 | 8 | 9),
        Some(2) => matches!(k.rank(), 2 | 4 | 5 | 6 | 8 | 9),
        Some(_) => false,
        None => k.index() == 33,
    }
}

fn is_green(k: TileKind) -> bool {
    match k.suit() {
        Some(2) => matches!(k.rank(), 2 | 3 | 4 | 6 | 8),
        Some(_) => false,
        None => k.index() == 32,
    }
}

fn tile_hog(counts: &KindCounts, sets: &[Block], d: &mut Detected) {
    let hogs = counts
        .kinds()
        .filter(|&k| counts.get(k) == 4 && !sets.iter().any(|b| b.kind == BlockKind::Kong && b.tile == k))
        .count();
    d[fan::TILE_HOG as usize] = hogs as u8;
}

fn context_fans(ctx: &WinContext, d: &mut Detected) {
    match ctx.win_by {
        WinBy::SelfDraw => {
            d[fan::SELF_DRAW as usize] = 1;
            if ctx.last_wall_tile {
                d[fan::LAST_TILE_DRAW as usize] = 1;
            }
        }
        WinBy::ReplacementTile => {
            d[fan::SELF_DRAW as usize] = 1;
            d[fan::OUT_WITH_REPLACEMENT_TILE as usize] = 1;
        }
        WinBy::Discard => {
            if ctx.last_wall_tile {
                d[fan::LAST_TILE_CLAIM as usize] = 1;
            }
        }
        WinBy::RobKong => d[fan::ROB_KONG as usize] = 1,
    }
    if ctx.visible_counts.get(ctx.winning_tile) >= 3 {
        d[fan::LAST_TILE as usize] = 1;
    }
}

fn concealment_fans(decomp: &Decomposition, ctx: &WinContext, role: Role, d: &mut Detected) {
    let claimed = decomp.sets.iter().filter(|b| b.from_meld && !b.concealed).count();
    if claimed == 0 {
        if ctx.win_by.is_self_drawn() {
            d[fan::FULLY_CONCEALED_HAND as usize] = 1;
        } else {
            d[fan::CONCEALED_HAND as usize] = 1;
        }
    }
    if claimed == 4 && !ctx.win_by.is_self_drawn() && role == Role::Pair {
        d[fan::MELDED_HAND as usize] = 1;
    }
}

fn wait_fans(decomp: &Decomposition, role: Role, single_wait: bool, d: &mut Detected) {
    if !single_wait {
        return;
    }
    match role {
        Role::Pair => d[fan::SINGLE_WAIT as usize] = 1,
        Role::Set { index, pos } => {
            let b = &decomp.sets[index];
            if b.kind == BlockKind::Chow {
                let start = b.tile.rank();
                if pos == 1 {
                    d[fan::CLOSED_WAIT as usize] = 1;
                } else if (pos == 2 && start == 1) || (pos == 0 && start == 7) {
                    d[fan::EDGE_WAIT as usize] = 1;
                }
            }
        }
        Role::Body => {}
    }
}

fn chow_pair_fan(a: TileKind, b: TileKind) -> Option<FanId> {
    let (sa, sb) = (a.suit()?, b.suit()?);
    let (ra, rb) = (a.rank(), b.rank());
    if sa == sb {
        if ra == rb {
            Some(fan::PURE_DOUBLE_CHOW)
        } else if ra.abs_diff(rb) == 3 {
            Some(fan::SHORT_STRAIGHT)
        } else if ra.min(rb) == 1 && ra.max(rb) == 7 {
            Some(fan::TWO_TERMINAL_CHOWS)
        } else {
            None
        }
    } else if ra == rb {
        Some(fan::MIXED_DOUBLE_CHOW)
    } else {
        None
    }
}

fn three_chow_fan(c: [TileKind; 3]) -> Option<FanId> {
    let mut s: Vec<(usize, u8)> = c.iter().map(|k| (k.suit().unwrap(), k.rank())).collect();
    s.sort_by_key(|&(_, r)| r);
    let same_suit = s[0].0 == s[1].0 && s[1].0 == s[2].0;
    let distinct_suits = s[0].0 != s[1].0 && s[1].0 != s[2].0 && s[0].0 != s[2].0;
    let r: Vec<u8> = s.iter().map(|&(_, r)| r).collect();
    if same_suit {
        if r[0] == r[1] && r[1] == r[2] {
            return Some(fan::PURE_TRIPLE_CHOW);
        }
        if r == [1, 4, 7] {
            return Some(fan::PURE_STRAIGHT);
        }
        let d1 = r[1] - r[0];
        if (d1 == 1 || d1 == 2) && r[2] - r[1] == d1 {
            return Some(fan::PURE_SHIFTED_CHOWS);
        }
    } else if distinct_suits {
        if r[0] == r[1] && r[1] == r[2] {
            return Some(fan::MIXED_TRIPLE_CHOW);
        }
        if r == [1, 4, 7] {
            return Some(fan::MIXED_STRAIGHT);
        }
        if r[1] == r[0] + 1 && r[2] == r[1] + 1 {
            return Some(fan::MIXED_SHIFTED_CHOWS);
        }
    }
    None
}

fn four_chow_fan(c: &[TileKind], pair: Option<TileKind>) -> Option<FanId> {
    let mut c = c.to_vec();
    c.sort();
    let suit = c[0].suit()?;
    let same_suit = c.iter().all(|k| k.suit() == Some(suit));
    let r: Vec<u8> = c.iter().map(|k| k.rank()).collect();
    if same_suit {
        if r.iter().all(|&x| x == r[0]) {
            return Some(fan::QUADRUPLE_CHOW);
        }
        let d = r[1] - r[0];
        if (d == 1 || d == 2) && r[2] - r[1] == d && r[3] - r[2] == d {
            return Some(fan::FOUR_PURE_SHIFTED_CHOWS);
        }
        if r == [1, 1, 7, 7] && pair.is_some_and(|p| p.suit() == Some(suit) && p.rank() == 5) {
            return Some(fan::PURE_TERMINAL_CHOWS);
        }
    }
    // 123+789 in two suits, pair of fives in the third.
    if let Some(p) = pair.filter(|p| p.is_numbered() && p.rank() == 5) {
        let mut per_suit = [[0u8; 2]; 3];
        for k in &c {
            match k.rank() {
                1 => per_suit[k.suit().unwrap()][0] += 1,
                7 => per_suit[k.suit().unwrap()][1] += 1,
                _ => return None,
            }
        }
        let ps = p.suit().unwrap();
        let others: Vec<usize> = (0..3).filter(|&s| s != ps).collect();
        if per_suit[ps] == [0, 0] && others.iter().all(|&s| per_suit[s] == [1, 1]) {
            return Some(fan::THREE_SUITED_TERMINAL_CHOWS);
        }
    }
    None
}

/// Adds pairwise fans along a spanning forest: each chow is combined
/// with the others at most once per component.
fn pairwise_forest(items: &[TileKind], relation: fn(TileKind, TileKind) -> Option<FanId>, d: &mut Detected) {
    let n = items.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for i in 0..n {
        for j in i + 1..n {
            if let Some(f) = relation(items[i], items[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                    d[f as usize] += 1;
                }
            }
        }
    }
}

fn chow_fans(chows: &[TileKind], pair: Option<TileKind>, table: &FanTable, d: &mut Detected) {
    let n = chows.len();
    if n < 2 {
        return;
    }
    if n == 4 {
        if let Some(f) = four_chow_fan(chows, pair) {
            d[f as usize] = 1;
            return;
        }
    }
    if n >= 3 {
        let mut best: Option<(u32, FanId, Option<FanId>)> = None;
        let skips: Vec<Option<usize>> = if n == 3 { vec![None] } else { (0..n).rev().map(Some).collect() };
        for skip in skips {
            let idx: Vec<usize> = (0..n).filter(|&i| Some(i) != skip).collect();
            let triple = [chows[idx[0]], chows[idx[1]], chows[idx[2]]];
            if let Some(f) = three_chow_fan(triple) {
                let extra = skip.and_then(|s| idx.iter().find_map(|&i| chow_pair_fan(chows[i], chows[s])));
                let score = table.points(f) + extra.map_or(0, |e| table.points(e));
                if best.is_none_or(|(sc, _, _)| score > sc) {
                    best = Some((score, f, extra));
                }
            }
        }
        if let Some((_, f, extra)) = best {
            d[f as usize] = 1;
            if let Some(e) = extra {
                d[e as usize] += 1;
            }
            return;
        }
    }
    pairwise_forest(chows, chow_pair_fan, d);
}

fn pung_pair_fan(a: TileKind, b: TileKind) -> Option<FanId> {
    (a.suit() != b.suit() && a.rank() == b.rank()).then_some(fan::MIXED_DOUBLE_PUNG)
}

fn three_pung_fan(p: [TileKind; 3]) -> Option<FanId> {
    let mut s: Vec<(usize, u8)> = p.iter().map(|k| (k.suit().unwrap(), k.rank())).collect();
    s.sort_by_key(|&(_, r)| r);
    let same_suit = s[0].0 == s[1].0 && s[1].0 == s[2].0;
    let distinct_suits = s[0].0 != s[1].0 && s[1].0 != s[2].0 && s[0].0 != s[2].0;
    let consecutive = s[1].1 == s[0].1 + 1 && s[2].1 == s[1].1 + 1;
    if same_suit && consecutive {
        Some(fan::PURE_SHIFTED_PUNGS)
    } else if distinct_suits && consecutive {
        Some(fan::MIXED_SHIFTED_PUNGS)
    } else if distinct_suits && s[0].1 == s[1].1 && s[1].1 == s[2].1 {
        Some(fan::TRIPLE_PUNG)
    } else {
        None
    }
}

fn numbered_pung_fans(pungs: &[TileKind], table: &FanTable, d: &mut Detected) {
    let n = pungs.len();
    if n < 2 {
        return;
    }
    if n == 4 {
        let mut p = pungs.to_vec();
        p.sort();
        let suit = p[0].suit();
        if p.iter().all(|k| k.suit() == suit) && p.windows(2).all(|w| w[1].rank() == w[0].rank() + 1) {
            d[fan::FOUR_PURE_SHIFTED_PUNGS as usize] = 1;
            return;
        }
    }
    if n >= 3 {
        let mut best: Option<(u32, FanId, Option<FanId>)> = None;
        let skips: Vec<Option<usize>> = if n == 3 { vec![None] } else { (0..n).rev().map(Some).collect() };
        for skip in skips {
            let idx: Vec<usize> = (0..n).filter(|&i| Some(i) != skip).collect();
            let triple = [pungs[idx[0]], pungs[idx[1]], pungs[idx[2]]];
            if let Some(f) = three_pung_fan(triple) {
                let extra = skip.and_then(|s| idx.iter().find_map(|&i| pung_pair_fan(pungs[i], pungs[s])));
                let score = table.points(f) + extra.map_or(0, |e| table.points(e));
                if best.is_none_or(|(sc, _, _)| score > sc) {
                    best = Some((score, f, extra));
                }
            }
        }
        if let Some((_, f, extra)) = best {
            d[f as usize] = 1;
            if let Some(e) = extra {
                d[e as usize] += 1;
            }
            return;
        }
    }
    pairwise_forest(pungs, pung_pair_fan, d);
}

/// Set-level patterns for the pung/kong blocks.
fn pung_fans(decomp: &Decomposition, ctx: &WinContext, role: Role, table: &FanTable, d: &mut Detected) {
    let pungs: Vec<(usize, &Block)> =
        decomp.sets.iter().enumerate().filter(|(_, b)| b.kind != BlockKind::Chow).collect();
    let pair = decomp.pair;
    let is_wind = |k: TileKind| (27..31).contains(&k.index());
    let is_dragon = |k: TileKind| (31..34).contains(&k.index());

    let dragon_pungs = pungs.iter().filter(|(_, b)| is_dragon(b.tile)).count();
    let wind_pungs = pungs.iter().filter(|(_, b)| is_wind(b.tile)).count();
    let dragon_pair = pair.is_some_and(is_dragon);
    let wind_pair = pair.is_some_and(is_wind);

    match dragon_pungs {
        3 => d[fan::BIG_THREE_DRAGONS as usize] = 1,
        2 if dragon_pair => d[fan::LITTLE_THREE_DRAGONS as usize] = 1,
        2 => d[fan::TWO_DRAGON_PUNGS as usize] = 1,
        _ => {}
    }
    d[fan::DRAGON_PUNG as usize] = dragon_pungs as u8;

    let wind_set_fan = match wind_pungs {
        4 => Some(fan::BIG_FOUR_WINDS),
        3 if wind_pair => Some(fan::LITTLE_FOUR_WINDS),
        3 => Some(fan::BIG_THREE_WINDS),
        _ => None,
    };
    if let Some(f) = wind_set_fan {
        d[f as usize] = 1;
    }
    let seat = TileKind::from_index(26 + ctx.seat_wind as usize);
    let prevalent = TileKind::from_index(26 + ctx.prevalent_wind as usize);
    let mut terminal_pungs = 0u8;
    for (_, b) in &pungs {
        let k = b.tile;
        if k == prevalent {
            d[fan::PREVALENT_WIND as usize] = 1;
        }
        if k == seat {
            d[fan::SEAT_WIND as usize] = 1;
        }
        if k.is_terminal() || (is_wind(k) && k != seat && k != prevalent && wind_set_fan.is_none()) {
            terminal_pungs += 1;
        }
    }
    d[fan::PUNG_OF_TERMINALS_OR_HONOURS as usize] = terminal_pungs;

    let numbered: Vec<TileKind> = pungs.iter().map(|(_, b)| b.tile).filter(|k| k.is_numbered()).collect();
    numbered_pung_fans(&numbered, table, d);

    // Concealed pungs: a pung completed by another player's tile is exposed.
    let concealed = pungs
        .iter()
        .filter(|(i, b)| {
            b.concealed && !(!ctx.win_by.is_self_drawn() && role == Role::Set { index: *i, pos: 0 })
        })
        .count();
    match concealed {
        4 => d[fan::FOUR_CONCEALED_PUNGS as usize] = 1,
        3 => d[fan::THREE_CONCEALED_PUNGS as usize] = 1,
        2 => d[fan::TWO_CONCEALED_PUNGS as usize] = 1,
        _ => {}
    }

    let melded_kongs = pungs.iter().filter(|(_, b)| b.kind == BlockKind::Kong && !b.concealed).count();
    let concealed_kongs = pungs.iter().filter(|(_, b)| b.kind == BlockKind::Kong && b.concealed).count();
    match (melded_kongs + concealed_kongs, concealed_kongs) {
        (4, _) => d[fan::FOUR_KONGS as usize] = 1,
        (3, _) => d[fan::THREE_KONGS as usize] = 1,
        (2, 2) => d[fan::TWO_CONCEALED_KONGS as usize] = 1,
        (2, 1) => d[fan::MELDED_AND_CONCEALED_KONGS as usize] = 1,
        (2, 0) => d[fan::TWO_MELDED_KONGS as usize] = 1,
        (1, 1) => d[fan::CONCEALED_KONG as usize] = 1,
        (1, 0) => d[fan::MELDED_KONG as usize] = 1,
        _ => {}
    }
}

fn nine_gates(decomp: &Decomposition, ctx: &WinContext) -> bool {
    if decomp.sets.iter().any(|b| b.from_meld) {
        return false;
    }
    let mut c = decomp.concealed;
    c.remove(ctx.winning_tile);
    let Some(suit) = ctx.winning_tile.suit() else { return false };
    if c.total() != 13 {
        return false;
    }
    let pattern = [3, 1, 1, 1, 1, 1, 1, 1, 3];
    (0..34).all(|i| {
        let n = c.0[i];
        if i / 9 == suit && i < 27 {
            n == pattern[i % 9]
        } else {
            n == 0
        }
    })
}

/// Every pattern present for this decomposition and placement, before exclusion.
pub(crate) fn detect(
    decomp: &Decomposition,
    ctx: &WinContext,
    role: Role,
    single_wait: bool,
    table: &FanTable,
) -> Detected {
    let mut d: Detected = [0; NUM_PATTERNS + 1];
    tile_fans(&decomp.counts, &mut d);
    context_fans(ctx, &mut d);
    concealment_fans(decomp, ctx, role, &mut d);

    match decomp.special_form {
        Some(SpecialForm::SevenPairs) => {
            tile_hog(&decomp.counts, &[], &mut d);
            d[fan::SEVEN_PAIRS as usize] = 1;
            let kinds: Vec<TileKind> = decomp.counts.kinds().collect();
            if kinds.len() == 7
                && kinds[0].suit().is_some()
                && kinds.iter().all(|k| k.suit() == kinds[0].suit())
                && kinds.windows(2).all(|w| w[1].index() == w[0].index() + 1)
            {
                d[fan::SEVEN_SHIFTED_PAIRS as usize] = 1;
            }
        }
        Some(SpecialForm::ThirteenOrphans) => d[fan::THIRTEEN_ORPHANS as usize] = 1,
        Some(SpecialForm::HonorsAndKnitted(arr)) => {
            let honors = decomp.counts.kinds().filter(|k| k.is_honor()).count();
            if honors == 7 {
                d[fan::GREATER_HONOURS_AND_KNITTED as usize] = 1;
            } else {
                d[fan::LESSER_HONOURS_AND_KNITTED as usize] = 1;
            }
            if arr.kinds().iter().all(|k| decomp.counts.get(*k) > 0) {
                d[fan::KNITTED_STRAIGHT as usize] = 1;
            }
        }
        Some(SpecialForm::KnittedStraight(_)) => {
            d[fan::KNITTED_STRAIGHT as usize] = 1;
            set_fans(decomp, ctx, role, single_wait, table, &mut d);
        }
        None => {
            set_fans(decomp, ctx, role, single_wait, table, &mut d);
            if nine_gates(decomp, ctx) {
                d[fan::NINE_GATES as usize] = 1;
            }
        }
    }
    d
}

fn set_fans(
    decomp: &Decomposition,
    ctx: &WinContext,
    role: Role,
    single_wait: bool,
    table: &FanTable,
    d: &mut Detected,
) {
    let sets = &decomp.sets;
    let pair = decomp.pair;
    let full_standard = decomp.special_form.is_none() && sets.len() == 4;
    tile_hog(&decomp.counts, sets, d);
    wait_fans(decomp, role, single_wait, d);
    pung_fans(decomp, ctx, role, table, d);

    let chows: Vec<TileKind> = sets.iter().filter(|b| b.kind == BlockKind::Chow).map(|b| b.tile).collect();
    let all_chows = chows.len() == sets.len() && pair.is_some_and(|p| p.is_numbered());
    if all_chows {
        d[fan::ALL_CHOWS as usize] = 1;
    }
    if full_standard {
        chow_fans(&chows, pair, table, d);
        let pair_ok = |f: &dyn Fn(TileKind) -> bool| pair.is_some_and(f);
        if sets.iter().all(|b| b.kind != BlockKind::Chow) {
            d[fan::ALL_PUNGS as usize] = 1;
            let even = |k: TileKind| k.is_numbered() && k.rank() % 2 == 0;
            if sets.iter().all(|b| even(b.tile)) && pair_ok(&even) {
                d[fan::ALL_EVEN_PUNGS as usize] = 1;
            }
        }
        if sets.iter().all(is_terminal_or_honor_block) && pair_ok(&|p| p.is_terminal_or_honor()) {
            d[fan::OUTSIDE_HAND as usize] = 1;
        }
        if sets.iter().all(block_has_five) && pair_ok(&|p| p.is_numbered() && p.rank() == 5) {
            d[fan::ALL_FIVES as usize] = 1;
        }
    }
}

/// Keeps patterns in id order, dropping any suppressed by an already kept one.
pub(crate) fn apply_exclusions(raw: &Detected, table: &FanTable) -> Vec<(FanId, u8)> {
    let mut suppressed = [false; NUM_PATTERNS + 1];
    let mut kept = Vec::new();
    for id in 1..=NUM_PATTERNS as FanId {
        let m = raw[id as usize];
        if m == 0 || suppressed[id as usize] {
            continue;
        }
        kept.push((id, m));
        for &e in &table.get(id).excludes {
            suppressed[e as usize] = true;
        }
    }
    if kept.is_empty() {
        kept.push((fan::CHICKEN_HAND, 1));
    }
    kept
}
