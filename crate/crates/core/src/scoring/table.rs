//! The pattern table: ids, names, points, kinds and exclusion relations.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ScoringError;

/// Stable pattern identifier, 1..=81.
pub type FanId = u8;

pub const NUM_PATTERNS: usize = 81;

/// The thirteen point levels a pattern may take, ascending.
pub const POINT_LEVELS: [u32; 13] = [1, 2, 4, 5, 6, 8, 12, 16, 24, 32, 48, 64, 88];

/// Minimum total required to declare a win.
pub const WIN_THRESHOLD: u32 = 8;

/// Pattern ids, in descending order of their classic points.
pub mod fan {
    use super::FanId;

    pub const BIG_FOUR_WINDS: FanId = 1;
    pub const BIG_THREE_DRAGONS: FanId = 2;
    pub const ALL_GREEN: FanId = 3;
    pub const NINE_GATES: FanId = 4;
    pub const FOUR_KONGS: FanId = 5;
    pub const SEVEN_SHIFTED_PAIRS: FanId = 6;
    pub const THIRTEEN_ORPHANS: FanId = 7;
    pub const ALL_TERMINALS: FanId = 8;
    pub const LITTLE_FOUR_WINDS: FanId = 9;
    pub const LITTLE_THREE_DRAGONS: FanId = 10;
    pub const ALL_HONOURS: FanId = 11;
    pub const FOUR_CONCEALED_PUNGS: FanId = 12;
    pub const PURE_TERMINAL_CHOWS: FanId = 13;
    pub const QUADRUPLE_CHOW: FanId = 14;
    pub const FOUR_PURE_SHIFTED_PUNGS: FanId = 15;
    pub const FOUR_PURE_SHIFTED_CHOWS: FanId = 16;
    pub const THREE_KONGS: FanId = 17;
    pub const ALL_TERMINALS_AND_HONOURS: FanId = 18;
    pub const SEVEN_PAIRS: FanId = 19;
    pub const GREATER_HONOURS_AND_KNITTED: FanId = 20;
    pub const ALL_EVEN_PUNGS: FanId = 21;
    pub const FULL_FLUSH: FanId = 22;
    pub const PURE_TRIPLE_CHOW: FanId = 23;
    pub const PURE_SHIFTED_PUNGS: FanId = 24;
    pub const UPPER_TILES: FanId = 25;
    pub const MIDDLE_TILES: FanId = 26;
    pub const LOWER_TILES: FanId = 27;
    pub const PURE_STRAIGHT: FanId = 28;
    pub const THREE_SUITED_TERMINAL_CHOWS: FanId = 29;
    pub const PURE_SHIFTED_CHOWS: FanId = 30;
    pub const ALL_FIVES: FanId = 31;
    pub const TRIPLE_PUNG: FanId = 32;
    pub const THREE_CONCEALED_PUNGS: FanId = 33;
    pub const LESSER_HONOURS_AND_KNITTED: FanId = 34;
    pub const KNITTED_STRAIGHT: FanId = 35;
    pub const UPPER_FOUR: FanId = 36;
    pub const LOWER_FOUR: FanId = 37;
    pub const BIG_THREE_WINDS: FanId = 38;
    pub const MIXED_STRAIGHT: FanId = 39;
    pub const REVERSIBLE_TILES: FanId = 40;
    pub const MIXED_TRIPLE_CHOW: FanId = 41;
    pub const MIXED_SHIFTED_PUNGS: FanId = 42;
    pub const CHICKEN_HAND: FanId = 43;
    pub const LAST_TILE_DRAW: FanId = 44;
    pub const LAST_TILE_CLAIM: FanId = 45;
    pub const OUT_WITH_REPLACEMENT_TILE: FanId = 46;
    pub const ROB_KONG: FanId = 47;
    pub const ALL_PUNGS: FanId = 48;
    pub const HALF_FLUSH: FanId = 49;
    pub const MIXED_SHIFTED_CHOWS: FanId = 50;
    pub const ALL_TYPES: FanId = 51;
    pub const MELDED_HAND: FanId = 52;
    pub const TWO_DRAGON_PUNGS: FanId = 53;
    pub const TWO_CONCEALED_KONGS: FanId = 54;
    pub const MELDED_AND_CONCEALED_KONGS: FanId = 55;
    pub const OUTSIDE_HAND: FanId = 56;
    pub const FULLY_CONCEALED_HAND: FanId = 57;
    pub const TWO_MELDED_KONGS: FanId = 58;
    pub const LAST_TILE: FanId = 59;
    pub const DRAGON_PUNG: FanId = 60;
    pub const PREVALENT_WIND: FanId = 61;
    pub const SEAT_WIND: FanId = 62;
    pub const CONCEALED_HAND: FanId = 63;
    pub const ALL_CHOWS: FanId = 64;
    pub const TILE_HOG: FanId = 65;
    pub const MIXED_DOUBLE_PUNG: FanId = 66;
    pub const TWO_CONCEALED_PUNGS: FanId = 67;
    pub const CONCEALED_KONG: FanId = 68;
    pub const ALL_SIMPLES: FanId = 69;
    pub const PURE_DOUBLE_CHOW: FanId = 70;
    pub const MIXED_DOUBLE_CHOW: FanId = 71;
    pub const SHORT_STRAIGHT: FanId = 72;
    pub const TWO_TERMINAL_CHOWS: FanId = 73;
    pub const PUNG_OF_TERMINALS_OR_HONOURS: FanId = 74;
    pub const MELDED_KONG: FanId = 75;
    pub const ONE_VOIDED_SUIT: FanId = 76;
    pub const NO_HONOURS: FanId = 77;
    pub const EDGE_WAIT: FanId = 78;
    pub const CLOSED_WAIT: FanId = 79;
    pub const SINGLE_WAIT: FanId = 80;
    pub const SELF_DRAW: FanId = 81;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    /// Determined by the tiles and how they were assembled.
    Structural,
    /// Awarded by the circumstances of the win.
    Luck,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanPattern {
    pub pattern_id: FanId,
    pub name: String,
    pub base_points: u32,
    pub kind: PatternKind,
    /// Patterns this one suppresses when both are detected.
    pub excludes: BTreeSet<FanId>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Record {
    pattern_id: FanId,
    name: String,
    points: u32,
    kind: PatternKind,
    #[serde(default)]
    excludes: String,
}

/// All 81 patterns, indexed by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FanTable {
    patterns: Vec<FanPattern>,
    strict_seven_pairs: bool,
}

const CLASSIC_CSV: &str = include_str!("../../data/fans_classic.csv");

impl FanTable {
    /// The standard table shipped with the crate.
    pub fn classic() -> FanTable {
        FanTable::from_csv(CLASSIC_CSV).expect("shipped fan table is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<FanTable, ScoringError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| ScoringError::Table(format!("{}: {e}", path.as_ref().display())))?;
        FanTable::from_csv(&text)
    }

    pub fn from_csv(text: &str) -> Result<FanTable, ScoringError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut patterns = Vec::new();
        for row in reader.deserialize::<Record>() {
            let r = row.map_err(|e| ScoringError::Table(e.to_string()))?;
            let excludes = r
                .excludes
                .split_whitespace()
                .map(|s| s.parse::<FanId>().map_err(|_| ScoringError::Table(format!("bad exclusion id `{s}`"))))
                .collect::<Result<BTreeSet<_>, _>>()?;
            patterns.push(FanPattern {
                pattern_id: r.pattern_id,
                name: r.name,
                base_points: r.points,
                kind: r.kind,
                excludes,
            });
        }
        FanTable::from_patterns(patterns)
    }

    pub fn from_patterns(mut patterns: Vec<FanPattern>) -> Result<FanTable, ScoringError> {
        if patterns.len() != NUM_PATTERNS {
            return Err(ScoringError::Table(format!("expected {NUM_PATTERNS} patterns, found {}", patterns.len())));
        }
        patterns.sort_by_key(|p| p.pattern_id);
        let mut names = HashSet::new();
        for (i, p) in patterns.iter().enumerate() {
            if p.pattern_id as usize != i + 1 {
                return Err(ScoringError::Table(format!("pattern ids must be 1..={NUM_PATTERNS}, got {}", p.pattern_id)));
            }
            if !names.insert(p.name.to_lowercase()) {
                return Err(ScoringError::Table(format!("duplicate pattern name `{}`", p.name)));
            }
            if !POINT_LEVELS.contains(&p.base_points) {
                return Err(ScoringError::Table(format!("`{}` has points {} outside the point levels", p.name, p.base_points)));
            }
            if let Some(bad) = p.excludes.iter().find(|&&e| e == 0 || e as usize > NUM_PATTERNS || e == p.pattern_id) {
                return Err(ScoringError::Table(format!("`{}` excludes invalid id {bad}", p.name)));
            }
        }
        Ok(FanTable { patterns, strict_seven_pairs: false })
    }

    /// Seven Pairs requires seven distinct kinds when set.
    pub fn strict_seven_pairs(&self) -> bool {
        self.strict_seven_pairs
    }

    pub fn with_strict_seven_pairs(mut self, strict: bool) -> FanTable {
        self.strict_seven_pairs = strict;
        self
    }

    pub fn get(&self, id: FanId) -> &FanPattern {
        &self.patterns[id as usize - 1]
    }

    pub fn points(&self, id: FanId) -> u32 {
        self.patterns[id as usize - 1].base_points
    }

    pub fn name(&self, id: FanId) -> &str {
        &self.patterns[id as usize - 1].name
    }

    pub fn patterns(&self) -> &[FanPattern] {
        &self.patterns
    }

    pub fn id_by_name(&self, name: &str) -> Option<FanId> {
        let wanted = normalize(name);
        self.patterns.iter().find(|p| normalize(&p.name) == wanted).map(|p| p.pattern_id)
    }

    /// Same patterns and exclusions with a new point mapping.
    pub fn with_points(&self, points: &BTreeMap<FanId, u32>) -> Result<FanTable, ScoringError> {
        let mut patterns = self.patterns.clone();
        for (&id, &pts) in points {
            if id == 0 || id as usize > NUM_PATTERNS {
                return Err(ScoringError::Table(format!("unknown pattern id {id}")));
            }
            patterns[id as usize - 1].base_points = pts;
        }
        Ok(FanTable::from_patterns(patterns)?.with_strict_seven_pairs(self.strict_seven_pairs))
    }

    /// Point mapping keyed by id.
    pub fn point_map(&self) -> BTreeMap<FanId, u32> {
        self.patterns.iter().map(|p| (p.pattern_id, p.base_points)).collect()
    }

    /// Patterns whose points differ from `other`, as `(id, ours, theirs)`.
    pub fn diff(&self, other: &FanTable) -> Vec<(FanId, u32, u32)> {
        self.patterns
            .iter()
            .zip(&other.patterns)
            .filter(|(a, b)| a.base_points != b.base_points)
            .map(|(a, b)| (a.pattern_id, a.base_points, b.base_points))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for p in &self.patterns {
            let excludes: Vec<String> = p.excludes.iter().map(|e| e.to_string()).collect();
            w.serialize(Record {
                pattern_id: p.pattern_id,
                name: p.name.clone(),
                points: p.base_points,
                kind: p.kind,
                excludes: excludes.join(" "),
            })
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
    }
}

fn normalize(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect::<String>()
        .replace("honors", "honours")
}

pub fn level_of(points: u32) -> Option<usize> {
    POINT_LEVELS.iter().position(|&p| p == points)
}
