//! Tile identities, text codes, walls, melds and hands.
//!
//! Kinds are indexed 0..42: characters `W1..W9` (0..9), dots `B1..B9`
//! (9..18), bamboo `T1..T9` (18..27), winds `F1..F4` (27..31), dragons
//! `J1..J3` (31..34) and flowers `H1..H8` (34..42).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::rng::{fisher_yates, wall_rng};

/// Number of non-flower kinds.
pub const NUM_KINDS: usize = 34;
/// Number of kinds when flowers are in play.
pub const NUM_KINDS_WITH_FLOWERS: usize = 42;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TileError {
    #[error("malformed tile code `{0}`")]
    Parse(String),
    #[error("invalid wall: {0}")]
    InvalidWall(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Characters,
    Dots,
    Bamboo,
    Winds,
    Dragons,
    Flowers,
}

impl Category {
    pub fn letter(self) -> char {
        match self {
            Category::Characters => 'W',
            Category::Dots => 'B',
            Category::Bamboo => 'T',
            Category::Winds => 'F',
            Category::Dragons => 'J',
            Category::Flowers => 'H',
        }
    }

    pub fn max_rank(self) -> u8 {
        match self {
            Category::Characters | Category::Dots | Category::Bamboo => 9,
            Category::Winds => 4,
            Category::Dragons => 3,
            Category::Flowers => 8,
        }
    }

    fn base(self) -> u8 {
        match self {
            Category::Characters => 0,
            Category::Dots => 9,
            Category::Bamboo => 18,
            Category::Winds => 27,
            Category::Dragons => 31,
            Category::Flowers => 34,
        }
    }

    pub fn is_suit(self) -> bool {
        matches!(self, Category::Characters | Category::Dots | Category::Bamboo)
    }

    pub const SUITS: [Category; 3] = [Category::Characters, Category::Dots, Category::Bamboo];
}

/// A tile kind, stored as its dense index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TileKind(u8);

impl TileKind {
    pub fn new(category: Category, rank: u8) -> Option<TileKind> {
        if rank == 0 || rank > category.max_rank() {
            return None;
        }
        Some(TileKind(category.base() + rank - 1))
    }

    pub fn from_index(index: usize) -> TileKind {
        assert!(index < NUM_KINDS_WITH_FLOWERS, "tile index {index} out of range");
        TileKind(index as u8)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn category(self) -> Category {
        match self.0 {
            0..=8 => Category::Characters,
            9..=17 => Category::Dots,
            18..=26 => Category::Bamboo,
            27..=30 => Category::Winds,
            31..=33 => Category::Dragons,
            _ => Category::Flowers,
        }
    }

    pub fn rank(self) -> u8 {
        self.0 - self.category().base() + 1
    }

    /// Suit index 0..3 for numbered tiles.
    pub fn suit(self) -> Option<usize> {
        if self.0 < 27 {
            Some(self.0 as usize / 9)
        } else {
            None
        }
    }

    pub fn is_numbered(self) -> bool {
        self.0 < 27
    }

    pub fn is_honor(self) -> bool {
        (27..34).contains(&self.0)
    }

    pub fn is_flower(self) -> bool {
        self.0 >= 34
    }

    pub fn is_terminal(self) -> bool {
        self.is_numbered() && (self.rank() == 1 || self.rank() == 9)
    }

    pub fn is_terminal_or_honor(self) -> bool {
        self.is_terminal() || self.is_honor()
    }

    /// The kind `delta` ranks away within the same suit.
    pub fn offset(self, delta: i32) -> Option<TileKind> {
        let suit = self.suit()?;
        let rank = self.rank() as i32 + delta;
        if (1..=9).contains(&rank) {
            Some(TileKind((suit * 9) as u8 + rank as u8 - 1))
        } else {
            None
        }
    }

    pub fn all(flowers: bool) -> impl Iterator<Item = TileKind> {
        let n = if flowers { NUM_KINDS_WITH_FLOWERS } else { NUM_KINDS };
        (0..n as u8).map(TileKind)
    }
}

impl fmt::Display for TileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.category().letter(), self.rank())
    }
}

impl fmt::Debug for TileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for TileKind {
    type Err = TileError;

    fn from_str(code: &str) -> Result<Self, Self::Err> {
        parse_tile(code)
    }
}

impl Serialize for TileKind {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TileKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_tile(&s).map_err(serde::de::Error::custom)
    }
}

/// Parses a two-character code such as `W1` or `J3`.
pub fn parse_tile(code: &str) -> Result<TileKind, TileError> {
    let bad = || TileError::Parse(code.to_string());
    let mut chars = code.chars();
    let (Some(letter), Some(digit), None) = (chars.next(), chars.next(), chars.next()) else {
        return Err(bad());
    };
    let category = match letter {
        'W' => Category::Characters,
        'B' => Category::Dots,
        'T' => Category::Bamboo,
        'F' => Category::Winds,
        'J' => Category::Dragons,
        'H' => Category::Flowers,
        _ => return Err(bad()),
    };
    let rank = digit.to_digit(10).ok_or_else(bad)? as u8;
    TileKind::new(category, rank).ok_or_else(bad)
}

pub fn format_tile(kind: TileKind) -> String {
    kind.to_string()
}

/// Parses a run of concatenated or whitespace-separated codes, e.g. `"W1W1 B2"`.
pub fn parse_kinds(text: &str) -> Result<Vec<TileKind>, TileError> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace() && *c != ',').collect();
    if compact.len() % 2 != 0 {
        return Err(TileError::Parse(text.to_string()));
    }
    compact
        .as_bytes()
        .chunks(2)
        .map(|c| parse_tile(std::str::from_utf8(c).map_err(|_| TileError::Parse(text.to_string()))?))
        .collect()
}

/// One physical tile: a kind plus its copy index (0..4).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tile {
    pub kind: TileKind,
    pub copy: u8,
}

impl Tile {
    pub fn new(kind: TileKind, copy: u8) -> Tile {
        Tile { kind, copy }
    }
}

impl fmt::Display for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.kind, self.copy)
    }
}

impl fmt::Debug for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Tile {
    type Err = TileError;

    /// Accepts `W1.3` (full provenance) or bare `W1` (copy 0).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('.') {
            Some((code, copy)) => {
                let kind = parse_tile(code)?;
                let copy: u8 = copy.parse().map_err(|_| TileError::Parse(s.to_string()))?;
                if copy > 3 || (kind.is_flower() && copy != 0) {
                    return Err(TileError::Parse(s.to_string()));
                }
                Ok(Tile { kind, copy })
            }
            None => Ok(Tile { kind: parse_tile(s)?, copy: 0 }),
        }
    }
}

impl Serialize for Tile {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Tile {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-kind tile counts over the 34 playing kinds.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct KindCounts(pub [u8; NUM_KINDS]);

impl Serialize for KindCounts {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for KindCounts {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<u8>::deserialize(d)?;
        let arr: [u8; NUM_KINDS] = v
            .try_into()
            .map_err(|v: Vec<u8>| serde::de::Error::custom(format!("expected {NUM_KINDS} counts, got {}", v.len())))?;
        Ok(KindCounts(arr))
    }
}

impl Default for KindCounts {
    fn default() -> Self {
        KindCounts([0; NUM_KINDS])
    }
}

impl KindCounts {
    pub fn from_kinds<'a>(kinds: impl IntoIterator<Item = &'a TileKind>) -> KindCounts {
        let mut c = KindCounts::default();
        for k in kinds {
            c.add(*k);
        }
        c
    }

    pub fn from_tiles<'a>(tiles: impl IntoIterator<Item = &'a Tile>) -> KindCounts {
        let mut c = KindCounts::default();
        for t in tiles {
            c.add(t.kind);
        }
        c
    }

    #[inline]
    pub fn add(&mut self, k: TileKind) {
        self.0[k.index()] += 1;
    }

    #[inline]
    pub fn remove(&mut self, k: TileKind) {
        self.0[k.index()] -= 1;
    }

    #[inline]
    pub fn get(&self, k: TileKind) -> u8 {
        self.0[k.index()]
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&c| c as usize).sum()
    }

    pub fn kinds(&self) -> impl Iterator<Item = TileKind> + '_ {
        (0..NUM_KINDS).filter(|&i| self.0[i] > 0).map(TileKind::from_index)
    }

    /// Expands to a sorted list of kinds with multiplicity.
    pub fn to_kinds(&self) -> Vec<TileKind> {
        let mut out = Vec::with_capacity(self.total());
        for (i, &c) in self.0.iter().enumerate() {
            for _ in 0..c {
                out.push(TileKind::from_index(i));
            }
        }
        out
    }
}

impl fmt::Debug for KindCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in self.to_kinds() {
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeldType {
    Chow,
    Pung,
    MeldedKong,
    ConcealedKong,
    AddedKong,
}

impl MeldType {
    pub fn is_kong(self) -> bool {
        matches!(self, MeldType::MeldedKong | MeldType::ConcealedKong | MeldType::AddedKong)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meld {
    pub meld_type: MeldType,
    pub tiles: Vec<Tile>,
    pub claimed_from: Option<usize>,
    pub claimed_tile: Option<Tile>,
}

impl Meld {
    /// Builds a meld, checking its shape.
    pub fn new(
        meld_type: MeldType,
        mut tiles: Vec<Tile>,
        claimed_from: Option<usize>,
        claimed_tile: Option<Tile>,
    ) -> Result<Meld, TileError> {
        tiles.sort();
        let bad = |why: &str| TileError::InvalidWall(format!("bad {meld_type:?} meld: {why}"));
        let kinds: Vec<TileKind> = tiles.iter().map(|t| t.kind).collect();
        match meld_type {
            MeldType::Chow => {
                if kinds.len() != 3 || !kinds[0].is_numbered() {
                    return Err(bad("need three numbered tiles"));
                }
                if kinds[0].offset(1) != Some(kinds[1]) || kinds[0].offset(2) != Some(kinds[2]) {
                    return Err(bad("ranks not consecutive"));
                }
            }
            MeldType::Pung => {
                if kinds.len() != 3 || kinds.iter().any(|k| *k != kinds[0]) {
                    return Err(bad("need three identical tiles"));
                }
            }
            _ => {
                if kinds.len() != 4 || kinds.iter().any(|k| *k != kinds[0]) {
                    return Err(bad("need four identical tiles"));
                }
            }
        }
        if kinds[0].is_flower() {
            return Err(bad("flowers cannot meld"));
        }
        let claimed = meld_type != MeldType::ConcealedKong;
        if claimed != claimed_from.is_some() {
            return Err(bad("claimed_from must be set exactly for claimed melds"));
        }
        Ok(Meld { meld_type, tiles, claimed_from, claimed_tile })
    }

    /// Lowest kind in the meld (the kind itself for pungs and kongs).
    pub fn base_kind(&self) -> TileKind {
        self.tiles[0].kind
    }

    /// Whether the meld was exposed by a claim (everything except concealed kongs).
    pub fn is_claimed(&self) -> bool {
        self.meld_type != MeldType::ConcealedKong
    }
}

/// A player's holding: concealed rack plus exposed melds and set-aside flowers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hand {
    pub concealed: Vec<Tile>,
    pub melds: Vec<Meld>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flowers: Vec<Tile>,
}

impl Hand {
    pub fn new(concealed: Vec<Tile>) -> Hand {
        Hand { concealed, melds: Vec::new(), flowers: Vec::new() }
    }

    /// Builds a hand from kind codes, assigning copy indices in order of appearance.
    pub fn from_kinds(concealed: &[TileKind], melds: Vec<Meld>) -> Hand {
        let mut used = [0u8; NUM_KINDS_WITH_FLOWERS];
        for m in &melds {
            for t in &m.tiles {
                used[t.kind.index()] = used[t.kind.index()].max(t.copy + 1);
            }
        }
        let concealed = concealed
            .iter()
            .map(|&k| {
                let c = used[k.index()];
                used[k.index()] += 1;
                Tile::new(k, c.min(3))
            })
            .collect();
        Hand { concealed, melds, flowers: Vec::new() }
    }

    /// Tile count with kongs counted as three.
    pub fn effective_len(&self) -> usize {
        3 * self.melds.len() + self.concealed.len()
    }

    pub fn concealed_counts(&self) -> KindCounts {
        KindCounts::from_tiles(&self.concealed)
    }

    /// Counts over concealed tiles and all meld tiles.
    pub fn all_counts(&self) -> KindCounts {
        let mut c = self.concealed_counts();
        for m in &self.melds {
            for t in &m.tiles {
                c.add(t.kind);
            }
        }
        c
    }

    pub fn has_claimed_meld(&self) -> bool {
        self.melds.iter().any(Meld::is_claimed)
    }

    pub fn sort(&mut self) {
        self.concealed.sort();
    }
}

/// The shuffled stock. Regular draws come from the front, replacement
/// draws from the tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wall {
    pub tiles: Vec<Tile>,
    pub draw_cursor: usize,
    pub tail_cursor: usize,
}

impl Wall {
    pub fn from_tiles(tiles: Vec<Tile>) -> Wall {
        let n = tiles.len();
        Wall { tiles, draw_cursor: 0, tail_cursor: n }
    }

    pub fn remaining(&self) -> usize {
        self.tail_cursor - self.draw_cursor
    }

    pub fn is_empty(&self) -> bool {
        self.remaining() == 0
    }

    pub fn draw_front(&mut self) -> Option<Tile> {
        if self.is_empty() {
            return None;
        }
        let t = self.tiles[self.draw_cursor];
        self.draw_cursor += 1;
        Some(t)
    }

    pub fn draw_tail(&mut self) -> Option<Tile> {
        if self.is_empty() {
            return None;
        }
        self.tail_cursor -= 1;
        Some(self.tiles[self.tail_cursor])
    }

    /// Undrawn tiles in draw order.
    pub fn undrawn(&self) -> &[Tile] {
        &self.tiles[self.draw_cursor..self.tail_cursor]
    }

    /// Whitespace-separated codes; `provenance` adds the `.copy` suffix.
    pub fn dump(&self, provenance: bool) -> String {
        let codes: Vec<String> = self
            .tiles
            .iter()
            .map(|t| if provenance { t.to_string() } else { t.kind.to_string() })
            .collect();
        codes.join(" ")
    }

    /// A flowerless wall that deals the given 13-tile hands, then yields
    /// `front` to regular draws and `tail` to replacement draws. The
    /// remaining tiles fill the middle in canonical order.
    pub fn stacked(hands: [&str; 4], front: &str, tail: &str) -> Result<Wall, TileError> {
        let hands: Vec<Vec<TileKind>> = hands.iter().map(|h| parse_kinds(h)).collect::<Result<_, _>>()?;
        if hands.iter().any(|h| h.len() != 13) {
            return Err(TileError::InvalidWall("stacked hands need 13 tiles each".into()));
        }
        let front = parse_kinds(front)?;
        let tail = parse_kinds(tail)?;
        let mut pool: Vec<Vec<Tile>> = vec![Vec::new(); NUM_KINDS];
        for t in full_set(false).into_iter().rev() {
            pool[t.kind.index()].push(t);
        }
        let mut take = |k: TileKind| {
            pool.get_mut(k.index())
                .and_then(Vec::pop)
                .ok_or_else(|| TileError::InvalidWall(format!("more than four {k}")))
        };
        let mut head = Vec::with_capacity(136);
        for i in 0..13 {
            for h in &hands {
                head.push(take(h[i])?);
            }
        }
        for &k in &front {
            head.push(take(k)?);
        }
        let mut back = Vec::new();
        for &k in &tail {
            back.push(take(k)?);
        }
        for k in TileKind::all(false) {
            while let Some(t) = pool[k.index()].pop() {
                head.push(t);
            }
        }
        back.reverse();
        head.extend(back);
        Ok(Wall::from_tiles(head))
    }

    /// Reads a dump. Bare codes get copy indices assigned in order of appearance.
    pub fn parse_dump(text: &str) -> Result<Wall, TileError> {
        let mut seen = [0u8; NUM_KINDS_WITH_FLOWERS];
        let mut tiles = Vec::new();
        for tok in text.split_whitespace() {
            let tile = if tok.contains('.') {
                tok.parse::<Tile>()?
            } else {
                let kind = parse_tile(tok)?;
                let copy = seen[kind.index()];
                Tile::new(kind, copy)
            };
            seen[tile.kind.index()] += 1;
            tiles.push(tile);
        }
        validate_full_set(&tiles)?;
        Ok(Wall::from_tiles(tiles))
    }
}

fn validate_full_set(tiles: &[Tile]) -> Result<(), TileError> {
    let flowers = tiles.iter().any(|t| t.kind.is_flower());
    let mut seen = std::collections::HashSet::new();
    for t in tiles {
        if !seen.insert(*t) {
            return Err(TileError::InvalidWall(format!("duplicate tile {t}")));
        }
    }
    let expected = full_set(flowers).len();
    if tiles.len() != expected {
        return Err(TileError::InvalidWall(format!("expected {expected} tiles, found {}", tiles.len())));
    }
    Ok(())
}

/// The unshuffled tile set: 136 tiles, or 144 with flowers.
pub fn full_set(flowers: bool) -> Vec<Tile> {
    let mut v = Vec::with_capacity(144);
    for kind in TileKind::all(false) {
        for copy in 0..4 {
            v.push(Tile::new(kind, copy));
        }
    }
    if flowers {
        for kind in TileKind::all(true).skip(NUM_KINDS) {
            v.push(Tile::new(kind, 0));
        }
    }
    v
}

/// Shuffles a full set deterministically from `seed`.
pub fn build_wall(seed: u64, flowers: bool) -> Wall {
    let mut tiles = full_set(flowers);
    let mut rng = wall_rng(seed);
    fisher_yates(&mut tiles, &mut rng);
    Wall::from_tiles(tiles)
}

/// Deals 13 tiles to each seat in turn order from the front of an untouched wall.
pub fn deal(mut wall: Wall) -> Result<([Hand; 4], Wall), TileError> {
    if wall.draw_cursor != 0 || wall.tail_cursor != wall.tiles.len() {
        return Err(TileError::InvalidWall("wall already drawn from".into()));
    }
    if wall.tiles.len() < 53 {
        return Err(TileError::InvalidWall(format!("only {} tiles", wall.tiles.len())));
    }
    let mut hands: [Hand; 4] = Default::default();
    for _ in 0..13 {
        for hand in hands.iter_mut() {
            hand.concealed.push(wall.draw_front().expect("length checked"));
        }
    }
    Ok((hands, wall))
}
