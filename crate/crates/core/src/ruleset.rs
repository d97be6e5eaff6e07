//! Named rule sets: a fan table plus an optional per-seat compensation.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scoring::{fan, FanId, FanTable, ScoringError, WIN_THRESHOLD};

/// Per-seat point transfer held in tenths of a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CompensationVector {
    pub tenths: [i32; 4],
}

impl CompensationVector {
    pub const PAPER: CompensationVector = CompensationVector { tenths: [-10, -4, 3, 11] };

    /// Fails unless the entries sum to zero.
    pub fn new(tenths: [i32; 4]) -> Result<CompensationVector, String> {
        let sum: i32 = tenths.iter().sum();
        if sum != 0 {
            return Err(format!("compensation must sum to 0, got {:.1}", sum as f64 / 10.0));
        }
        Ok(CompensationVector { tenths })
    }

    pub fn from_points(points: [f64; 4]) -> Result<CompensationVector, String> {
        let mut tenths = [0i32; 4];
        for (t, p) in tenths.iter_mut().zip(points) {
            let scaled = p * 10.0;
            if (scaled - scaled.round()).abs() > 1e-6 {
                return Err(format!("{p} is not a multiple of 0.1"));
            }
            *t = scaled.round() as i32;
        }
        CompensationVector::new(tenths)
    }

    pub fn points(&self) -> [f64; 4] {
        self.tenths.map(|t| t as f64 / 10.0)
    }

    /// Raw scores plus this vector, in points.
    pub fn apply(&self, scores: &[i32; 4]) -> [f64; 4] {
        std::array::from_fn(|i| (scores[i] * 10 + self.tenths[i]) as f64 / 10.0)
    }
}

impl fmt::Display for CompensationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.points().iter().map(|p| format!("{p:+.1}")).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl Serialize for CompensationVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.points().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CompensationVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let p = <[f64; 4]>::deserialize(d)?;
        CompensationVector::from_points(p).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    pub ruleset_id: String,
    pub table: FanTable,
    pub win_threshold: u32,
    pub compensation: Option<CompensationVector>,
}

/// Point changes of the revised table.
pub const REVISED_CHANGES: [(FanId, u32, u32); 11] = [
    (fan::REVERSIBLE_TILES, 8, 12),
    (fan::MIXED_SHIFTED_PUNGS, 8, 12),
    (fan::LESSER_HONOURS_AND_KNITTED, 12, 8),
    (fan::KNITTED_STRAIGHT, 12, 8),
    (fan::UPPER_FOUR, 12, 8),
    (fan::LOWER_FOUR, 12, 8),
    (fan::PURE_STRAIGHT, 16, 12),
    (fan::PURE_SHIFTED_CHOWS, 16, 12),
    (fan::SEVEN_PAIRS, 24, 16),
    (fan::GREATER_HONOURS_AND_KNITTED, 24, 16),
    (fan::FULL_FLUSH, 24, 16),
];

impl RuleSet {
    pub fn classic() -> RuleSet {
        RuleSet {
            ruleset_id: "classic".into(),
            table: FanTable::classic(),
            win_threshold: WIN_THRESHOLD,
            compensation: None,
        }
    }

    /// Revised points with the seat compensation.
    pub fn revised() -> RuleSet {
        let points: BTreeMap<FanId, u32> = REVISED_CHANGES.iter().map(|&(id, _, new)| (id, new)).collect();
        RuleSet {
            ruleset_id: "revised".into(),
            table: FanTable::classic().with_points(&points).expect("revised points are valid levels"),
            win_threshold: WIN_THRESHOLD,
            compensation: Some(CompensationVector::PAPER),
        }
    }

    /// Revised points without compensation.
    pub fn revised_points_only() -> RuleSet {
        RuleSet { ruleset_id: "revised-points".into(), compensation: None, ..RuleSet::revised() }
    }

    /// Looks up `classic`, `revised`, `revised-points` or `classic-compensated`.
    pub fn by_id(id: &str) -> Result<RuleSet, ScoringError> {
        match id {
            "classic" | "default" => Ok(RuleSet::classic()),
            "revised" => Ok(RuleSet::revised()),
            "revised-points" => Ok(RuleSet::revised_points_only()),
            "classic-compensated" => Ok(RuleSet {
                ruleset_id: "classic-compensated".into(),
                compensation: Some(CompensationVector::PAPER),
                ..RuleSet::classic()
            }),
            other => Err(ScoringError::Table(format!("unknown ruleset `{other}`"))),
        }
    }

    pub const KNOWN: [&'static str; 4] = ["classic", "revised", "revised-points", "classic-compensated"];
}
