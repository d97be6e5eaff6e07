//! Pattern frequencies, point adaptation, compensation and exact hand counts.

mod enumerate;

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use enumerate::{enumerate_pattern_counts, fold_winning_hands, hand_patterns, EnumFlags, PatternCount, SUPPORTED_SUITS};

use crate::engine::MatchRecord;
use crate::ruleset::CompensationVector;
use crate::scoring::{fan, level_of, FanId, FanTable, PatternKind, ScoringError, NUM_PATTERNS, POINT_LEVELS, WIN_THRESHOLD};
use crate::simulator::SeatStats;

#[derive(Debug, Error)]
pub enum BalanceError {
    #[error("match {match_id}: unknown pattern id {pattern_id}")]
    UnknownPattern { match_id: String, pattern_id: FanId },
    #[error("frequency table has no entry for pattern {0}")]
    MissingPattern(FanId),
    #[error("pattern {0} ({1}) cannot be counted from tiles alone")]
    Unsupported(FanId, String),
    #[error("pattern {0} out of range")]
    OutOfRange(FanId),
    #[error("resolution {0} is not a positive multiple of 0.1")]
    Resolution(f64),
    #[error("frequency csv line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

/// The luck patterns Algorithm 3 leaves at 8 points.
pub const LUCK_EXEMPT: [FanId; 4] = [fan::LAST_TILE_DRAW, fan::LAST_TILE_CLAIM, fan::OUT_WITH_REPLACEMENT_TILE, fan::ROB_KONG];

/// Occurrences per pattern over a set of matches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub counts: BTreeMap<FanId, u64>,
    pub matches: u64,
}

impl Default for FrequencyTable {
    fn default() -> Self {
        FrequencyTable { counts: (1..=NUM_PATTERNS as FanId).map(|id| (id, 0)).collect(), matches: 0 }
    }
}

impl FrequencyTable {
    pub fn get(&self, id: FanId) -> u64 {
        self.counts.get(&id).copied().unwrap_or(0)
    }

    /// Adds one match; `multiplicity` counts a pattern as many times as it
    /// was scored instead of once.
    pub fn add_record(&mut self, record: &MatchRecord, multiplicity: bool) -> Result<(), BalanceError> {
        for f in &record.result.fan_list {
            if f.pattern_id == 0 || f.pattern_id as usize > NUM_PATTERNS {
                return Err(BalanceError::UnknownPattern { match_id: record.match_id.clone(), pattern_id: f.pattern_id });
            }
        }
        self.matches += 1;
        if multiplicity {
            for f in &record.result.fan_list {
                *self.counts.entry(f.pattern_id).or_default() += f.multiplicity.max(1) as u64;
            }
        } else {
            let ids: BTreeSet<FanId> = record.result.fan_list.iter().map(|f| f.pattern_id).collect();
            for id in ids {
                *self.counts.entry(id).or_default() += 1;
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &FrequencyTable) {
        self.matches += other.matches;
        for (&id, &n) in &other.counts {
            *self.counts.entry(id).or_default() += n;
        }
    }

    /// Rank of every pattern, 1 for the most frequent.
    pub fn ranks(&self) -> BTreeMap<FanId, usize> {
        let all = top_k(self, self.counts.len());
        all.into_iter().enumerate().map(|(i, id)| (id, i + 1)).collect()
    }

    /// `pattern_id,name,count,rank`, ordered by id.
    pub fn to_csv(&self, table: &FanTable) -> String {
        let ranks = self.ranks();
        let mut out = String::from("pattern_id,name,count,rank\n");
        for (&id, &n) in &self.counts {
            out.push_str(&format!("{id},{},{n},{}\n", table.name(id), ranks[&id]));
        }
        out
    }

    /// Reads the format written by [`FrequencyTable::to_csv`]; only the id
    /// and count columns are used.
    pub fn from_csv(text: &str, matches: u64) -> Result<FrequencyTable, BalanceError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let mut counts = BTreeMap::new();
        for (i, row) in reader.records().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| BalanceError::Csv { line, message: e.to_string() })?;
            let field = |j: usize| row.get(j).ok_or_else(|| BalanceError::Csv { line, message: "too few columns".into() });
            let id: FanId = field(0)?.trim().parse().map_err(|_| BalanceError::Csv { line, message: "bad pattern_id".into() })?;
            let n: u64 = field(2)?.trim().parse().map_err(|_| BalanceError::Csv { line, message: "bad count".into() })?;
            if id == 0 || id as usize > NUM_PATTERNS {
                return Err(BalanceError::OutOfRange(id));
            }
            counts.insert(id, n);
        }
        Ok(FrequencyTable { counts, matches })
    }
}

/// Frequencies over a stream of records.
pub fn count_frequencies<R: Borrow<MatchRecord>>(
    records: impl IntoIterator<Item = R>,
    multiplicity: bool,
) -> Result<FrequencyTable, BalanceError> {
    let mut table = FrequencyTable::default();
    for r in records {
        table.add_record(r.borrow(), multiplicity)?;
    }
    Ok(table)
}

/// The `k` most frequent ids; equal counts go to the lower id first.
pub fn top_k(freq: &FrequencyTable, k: usize) -> Vec<FanId> {
    let mut ids: Vec<(FanId, u64)> = freq.counts.iter().map(|(&id, &n)| (id, n)).collect();
    ids.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ids.into_iter().take(k).map(|(id, _)| id).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaptationResult {
    /// Number of patterns at or below the threshold.
    pub n: usize,
    pub top: Vec<FanId>,
    pub new_points: BTreeMap<FanId, u32>,
    /// `(pattern_id, old, new)` for every pattern that moved.
    pub changed: Vec<(FanId, u32, u32)>,
    #[serde(skip)]
    names: BTreeMap<FanId, String>,
}

impl AdaptationResult {
    pub fn to_table(&self, table: &FanTable) -> Result<FanTable, BalanceError> {
        Ok(table.with_points(&self.new_points)?)
    }
}

impl fmt::Display for AdaptationResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.changed.iter().map(|c| self.names.get(&c.0).map_or(0, String::len)).max().unwrap_or(7).max(7);
        writeln!(f, "{:<width$} | previous points | new points", "pattern")?;
        for (id, old, new) in &self.changed {
            let name = self.names.get(id).map_or("?", String::as_str);
            writeln!(f, "{name:<width$} | {old:>15} | {new:>10}")?;
        }
        Ok(())
    }
}

/// Point adaptation from pattern frequencies.
///
/// Frequent patterns above the threshold drop one level; infrequent
/// patterns at the threshold rise one level, except those in `exempt`.
pub fn adapt_points(freq: &FrequencyTable, table: &FanTable, exempt: &[FanId]) -> Result<AdaptationResult, BalanceError> {
    for p in table.patterns() {
        if p.kind == PatternKind::Structural && !freq.counts.contains_key(&p.pattern_id) {
            return Err(BalanceError::MissingPattern(p.pattern_id));
        }
    }
    let n = table.patterns().iter().filter(|p| p.base_points <= WIN_THRESHOLD).count();
    let top = top_k(freq, n);
    let members: BTreeSet<FanId> = top.iter().copied().collect();
    let mut new_points = table.point_map();
    let mut changed = Vec::new();
    for p in table.patterns() {
        let old = p.base_points;
        let Some(level) = level_of(old) else { continue };
        let new = if members.contains(&p.pattern_id) {
            if old > WIN_THRESHOLD { POINT_LEVELS[level - 1] } else { old }
        } else if old == WIN_THRESHOLD && !exempt.contains(&p.pattern_id) {
            POINT_LEVELS[level + 1]
        } else {
            old
        };
        if new != old {
            new_points.insert(p.pattern_id, new);
            changed.push((p.pattern_id, old, new));
        }
    }
    let names = table.patterns().iter().map(|p| (p.pattern_id, p.name.clone())).collect();
    Ok(AdaptationResult { n, top, new_points, changed, names })
}

/// Negated seat averages rounded to `resolution`, repaired to sum to zero
/// by moving the entries with the largest rounding error.
pub fn compensation_from_averages(averages: [f64; 4], resolution: f64) -> Result<CompensationVector, BalanceError> {
    let step = (resolution * 10.0).round();
    if !(step >= 1.0) || ((resolution * 10.0) - step).abs() > 1e-9 {
        return Err(BalanceError::Resolution(resolution));
    }
    let exact: [f64; 4] = averages.map(|a| -a * 10.0 / step);
    let mut units: [i64; 4] = exact.map(|x| x.round() as i64);
    let mut residue: i64 = units.iter().sum();
    while residue != 0 {
        let dir = residue.signum();
        // Excess rounding in the direction of the residue, per seat.
        let err = |s: usize| (units[s] as f64 - exact[s]) * dir as f64;
        let seat = (0..4).fold(0, |best, s| if err(s) > err(best) + 1e-12 { s } else { best });
        units[seat] -= dir;
        residue -= dir;
    }
    let tenths = units.map(|u| (u * step as i64) as i32);
    Ok(CompensationVector::new(tenths).expect("repaired to zero"))
}

pub fn derive_compensation(stats: &SeatStats, resolution: f64) -> Result<CompensationVector, BalanceError> {
    compensation_from_averages(stats.averages(), resolution)
}

#[cfg(test)]
mod tests;
