//! Win detection, decomposition, pattern evaluation and settlement.

mod fans;
pub mod shape;
pub mod table;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tiles::{Hand, KindCounts, MeldType, TileKind};
pub use shape::{KnittedArrangement, RawSet};
pub use table::{fan, level_of, FanId, FanPattern, FanTable, PatternKind, NUM_PATTERNS, POINT_LEVELS, WIN_THRESHOLD};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScoringError {
    #[error("hand has {0} tiles (kongs counted as three); expected 13 before the winning tile")]
    Shape(usize),
    #[error("fan total {0} is below the winning threshold")]
    Threshold(u32),
    #[error("fan table: {0}")]
    Table(String),
    #[error("settlement: {0}")]
    Settlement(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WinBy {
    SelfDraw,
    Discard,
    RobKong,
    ReplacementTile,
}

impl WinBy {
    pub fn is_self_drawn(self) -> bool {
        matches!(self, WinBy::SelfDraw | WinBy::ReplacementTile)
    }
}

/// Circumstances of a win that the tiles alone do not show.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinContext {
    pub win_by: WinBy,
    /// The win involves the final tile of the wall.
    pub last_wall_tile: bool,
    /// 1 = East .. 4 = North.
    pub seat_wind: u8,
    pub prevalent_wind: u8,
    pub discarder: Option<usize>,
    pub winning_tile: TileKind,
    /// Exposed copies per kind (discards and melds), not counting the winning tile.
    pub visible_counts: KindCounts,
}

impl WinContext {
    /// A plain win with East seat and East prevalent wind and nothing exposed.
    pub fn simple(win_by: WinBy, winning_tile: TileKind) -> WinContext {
        WinContext {
            win_by,
            last_wall_tile: false,
            seat_wind: 1,
            prevalent_wind: 1,
            discarder: if win_by == WinBy::Discard { Some(1) } else { None },
            winning_tile,
            visible_counts: KindCounts::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockKind {
    Chow,
    Pung,
    Kong,
}

/// One set in a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    pub kind: BlockKind,
    /// Lowest tile for chows, the kind for pungs and kongs.
    pub tile: TileKind,
    /// Not exposed to other players (concealed-part sets and concealed kongs).
    pub concealed: bool,
    /// Came from a declared meld rather than the concealed rack.
    pub from_meld: bool,
}

impl Block {
    pub fn tiles(&self) -> Vec<TileKind> {
        match self.kind {
            BlockKind::Chow => (0..3).map(|i| self.tile.offset(i).expect("valid chow")).collect(),
            BlockKind::Pung => vec![self.tile; 3],
            BlockKind::Kong => vec![self.tile; 4],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpecialForm {
    SevenPairs,
    ThirteenOrphans,
    KnittedStraight(KnittedArrangement),
    HonorsAndKnitted(KnittedArrangement),
}

/// A full partition of a winning hand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub sets: Vec<Block>,
    pub pair: Option<TileKind>,
    pub special_form: Option<SpecialForm>,
    /// Every tile of the hand, kongs as four.
    pub counts: KindCounts,
    /// Concealed rack including the winning tile.
    pub concealed: KindCounts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanEntry {
    pub pattern_id: FanId,
    pub multiplicity: u8,
    pub points: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FanResult {
    pub fans: Vec<FanEntry>,
    pub total: u32,
    /// Whether the hand may be declared: a winning shape reaching the threshold.
    pub win: bool,
}

impl FanResult {
    pub fn contains(&self, id: FanId) -> bool {
        self.fans.iter().any(|f| f.pattern_id == id)
    }

    pub fn multiplicity(&self, id: FanId) -> u8 {
        self.fans.iter().find(|f| f.pattern_id == id).map_or(0, |f| f.multiplicity)
    }

    pub fn ids(&self) -> Vec<FanId> {
        self.fans.iter().map(|f| f.pattern_id).collect()
    }
}

fn meld_block(m: &crate::tiles::Meld) -> Block {
    let kind = match m.meld_type {
        MeldType::Chow => BlockKind::Chow,
        MeldType::Pung => BlockKind::Pung,
        _ => BlockKind::Kong,
    };
    Block { kind, tile: m.base_kind(), concealed: m.meld_type == MeldType::ConcealedKong, from_meld: true }
}

fn raw_block(s: RawSet) -> Block {
    match s {
        RawSet::Chow(k) => Block { kind: BlockKind::Chow, tile: k, concealed: true, from_meld: false },
        RawSet::Pung(k) => Block { kind: BlockKind::Pung, tile: k, concealed: true, from_meld: false },
    }
}

/// All decompositions of `hand` completed by `winning_tile`.
///
/// `hand` is the 13-tile-equivalent holding before the win. An empty
/// result means the tiles do not form a winning shape.
pub fn decompose(hand: &Hand, winning_tile: TileKind, strict_seven_pairs: bool) -> Result<Vec<Decomposition>, ScoringError> {
    if hand.effective_len() != 13 {
        return Err(ScoringError::Shape(hand.effective_len()));
    }
    let mut concealed = hand.concealed_counts();
    concealed.add(winning_tile);
    Ok(decompose_counts(&concealed, hand, strict_seven_pairs))
}

fn decompose_counts(concealed: &KindCounts, hand: &Hand, strict: bool) -> Vec<Decomposition> {
    let meld_blocks: Vec<Block> = hand.melds.iter().map(meld_block).collect();
    let mut counts = *concealed;
    for b in &meld_blocks {
        for k in b.tiles() {
            counts.add(k);
        }
    }
    let melds = meld_blocks.len();
    let mut out = Vec::new();
    if melds <= 4 {
        for (sets, pair) in shape::standard_partitions(concealed, 4 - melds) {
            let mut blocks = meld_blocks.clone();
            blocks.extend(sets.into_iter().map(raw_block));
            out.push(Decomposition { sets: blocks, pair: Some(pair), special_form: None, counts, concealed: *concealed });
        }
    }
    if melds == 0 {
        if shape::is_seven_pairs(concealed, strict) {
            out.push(Decomposition {
                sets: vec![],
                pair: None,
                special_form: Some(SpecialForm::SevenPairs),
                counts,
                concealed: *concealed,
            });
        }
        if shape::is_thirteen_orphans(concealed) {
            let pair = concealed.kinds().find(|&k| concealed.get(k) == 2);
            out.push(Decomposition {
                sets: vec![],
                pair,
                special_form: Some(SpecialForm::ThirteenOrphans),
                counts,
                concealed: *concealed,
            });
        }
        if let Some(arr) = shape::honors_and_knitted(concealed) {
            out.push(Decomposition {
                sets: vec![],
                pair: None,
                special_form: Some(SpecialForm::HonorsAndKnitted(arr)),
                counts,
                concealed: *concealed,
            });
        }
    }
    if melds <= 1 {
        for (arr, sets, pair) in shape::knitted_straight_partitions(concealed, 1 - melds) {
            let mut blocks = meld_blocks.clone();
            blocks.extend(sets.into_iter().map(raw_block));
            out.push(Decomposition {
                sets: blocks,
                pair: Some(pair),
                special_form: Some(SpecialForm::KnittedStraight(arr)),
                counts,
                concealed: *concealed,
            });
        }
    }
    out
}

fn single_wait(decomp: &Decomposition, winning: TileKind, strict: bool) -> bool {
    let mut before = decomp.concealed;
    before.remove(winning);
    let melds = decomp.sets.iter().filter(|b| b.from_meld).count();
    let mut held = decomp.counts;
    held.remove(winning);
    shape::waiting_kinds(&before, &held, melds, strict).len() == 1
}

fn finish(kept: Vec<(FanId, u8)>, table: &FanTable) -> FanResult {
    let fans: Vec<FanEntry> = kept
        .into_iter()
        .map(|(id, m)| FanEntry { pattern_id: id, multiplicity: m, points: table.points(id) })
        .collect();
    let total = fans.iter().map(|f| f.multiplicity as u32 * f.points).sum();
    FanResult { fans, total, win: total >= WIN_THRESHOLD }
}

/// Evaluates one decomposition, choosing the most valuable placement of
/// the winning tile.
pub fn enumerate_fans(decomposition: &Decomposition, context: &WinContext, table: &FanTable) -> FanResult {
    let single = single_wait(decomposition, context.winning_tile, table.strict_seven_pairs());
    let mut best: Option<FanResult> = None;
    let mut roles = fans::roles(decomposition, context.winning_tile);
    if roles.is_empty() {
        roles.push(fans::Role::Body);
    }
    for role in roles {
        let raw = fans::detect(decomposition, context, role, single, table);
        let result = finish(fans::apply_exclusions(&raw, table), table);
        if best.as_ref().is_none_or(|b| result.total > b.total) {
            best = Some(result);
        }
    }
    best.expect("at least one role")
}

/// Pattern detection without exclusion, for analysis of which patterns a
/// shape carries at all.
pub fn detect_raw(decomposition: &Decomposition, context: &WinContext, table: &FanTable) -> Vec<(FanId, u8)> {
    let single = single_wait(decomposition, context.winning_tile, table.strict_seven_pairs());
    detect_with(decomposition, context, table, single)
}

/// Like [`detect_raw`] but never awards Single Wait, which skips the
/// costly wait search.
pub fn detect_structural(decomposition: &Decomposition, context: &WinContext, table: &FanTable) -> Vec<(FanId, u8)> {
    detect_with(decomposition, context, table, false)
}

fn detect_with(decomposition: &Decomposition, context: &WinContext, table: &FanTable, single: bool) -> Vec<(FanId, u8)> {
    let mut acc = [0u8; NUM_PATTERNS + 1];
    let mut roles = fans::roles(decomposition, context.winning_tile);
    if roles.is_empty() {
        roles.push(fans::Role::Body);
    }
    for role in roles {
        let raw = fans::detect(decomposition, context, role, single, table);
        for (a, r) in acc.iter_mut().zip(raw.iter()) {
            *a = (*a).max(*r);
        }
    }
    (1..=NUM_PATTERNS as FanId).filter(|&i| acc[i as usize] > 0).map(|i| (i, acc[i as usize])).collect()
}

/// Best result over all decompositions.
pub fn best_fan(hand: &Hand, winning_tile: TileKind, context: &WinContext, table: &FanTable) -> FanResult {
    let Ok(decomps) = decompose(hand, winning_tile, table.strict_seven_pairs()) else {
        return FanResult::default();
    };
    decomps
        .iter()
        .map(|d| enumerate_fans(d, context, table))
        .reduce(|a, b| if b.total > a.total { b } else { a })
        .unwrap_or_default()
}

/// Zero-sum score exchange for a win worth `fan_total`.
pub fn settle(fan_total: u32, win_by: WinBy, winner: usize, discarder: Option<usize>) -> Result<[i32; 4], ScoringError> {
    if fan_total < WIN_THRESHOLD {
        return Err(ScoringError::Threshold(fan_total));
    }
    if winner > 3 {
        return Err(ScoringError::Settlement(format!("winner seat {winner} out of range")));
    }
    let n = fan_total as i32;
    let mut scores = [0i32; 4];
    if win_by.is_self_drawn() {
        for (seat, s) in scores.iter_mut().enumerate() {
            *s = if seat == winner { 3 * n + 24 } else { -n - 8 };
        }
    } else {
        let payer = discarder.ok_or_else(|| ScoringError::Settlement("discard win without a discarder".into()))?;
        if payer == winner || payer > 3 {
            return Err(ScoringError::Settlement(format!("invalid discarder {payer}")));
        }
        for (seat, s) in scores.iter_mut().enumerate() {
            *s = if seat == winner {
                n + 24
            } else if seat == payer {
                -n - 8
            } else {
                -8
            };
        }
    }
    Ok(scores)
}
