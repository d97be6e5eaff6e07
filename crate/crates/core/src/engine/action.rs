use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::tiles::{parse_tile, Tile, TileKind};

/// A decision at one step of the referee.
///
/// Chow and Pung claims carry the discard that follows them, so a claim
/// and its discard are one decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Draw,
    Discard(Tile),
    Chow { mid: TileKind, discard: Tile },
    Pung { discard: Tile },
    MeldedKong,
    ConcealedKong(TileKind),
    AddedKong(TileKind),
    WinSelfDraw,
    WinDiscard,
    WinRobKong,
    Pass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionKind {
    Draw,
    Discard,
    Chow,
    Pung,
    MeldedKong,
    ConcealedKong,
    AddedKong,
    WinSelfDraw,
    WinDiscard,
    WinRobKong,
    Pass,
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Draw => ActionKind::Draw,
            Action::Discard(_) => ActionKind::Discard,
            Action::Chow { .. } => ActionKind::Chow,
            Action::Pung { .. } => ActionKind::Pung,
            Action::MeldedKong => ActionKind::MeldedKong,
            Action::ConcealedKong(_) => ActionKind::ConcealedKong,
            Action::AddedKong(_) => ActionKind::AddedKong,
            Action::WinSelfDraw => ActionKind::WinSelfDraw,
            Action::WinDiscard => ActionKind::WinDiscard,
            Action::WinRobKong => ActionKind::WinRobKong,
            Action::Pass => ActionKind::Pass,
        }
    }

    pub fn is_win(&self) -> bool {
        matches!(self, Action::WinSelfDraw | Action::WinDiscard | Action::WinRobKong)
    }

    /// The tile that leaves the hand as a discard, if any.
    pub fn discarded(&self) -> Option<Tile> {
        match *self {
            Action::Discard(t) | Action::Chow { discard: t, .. } | Action::Pung { discard: t } => Some(t),
            _ => None,
        }
    }

    /// Response line in the agent protocol grammar.
    pub fn to_protocol(&self) -> String {
        match self {
            Action::Draw => "DRAW".into(),
            Action::Discard(t) => format!("PLAY {}", t.kind),
            Action::Chow { mid, discard } => format!("CHI {mid} {}", discard.kind),
            Action::Pung { discard } => format!("PENG {}", discard.kind),
            Action::MeldedKong => "GANG".into(),
            Action::ConcealedKong(k) => format!("GANG {k}"),
            Action::AddedKong(k) => format!("BUGANG {k}"),
            Action::WinSelfDraw | Action::WinDiscard | Action::WinRobKong => "HU".into(),
            Action::Pass => "PASS".into(),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Discard(t) => write!(f, "Discard {t}"),
            Action::Chow { mid, discard } => write!(f, "Chow {mid} {discard}"),
            Action::Pung { discard } => write!(f, "Pung {discard}"),
            Action::ConcealedKong(k) => write!(f, "ConcealedKong {k}"),
            Action::AddedKong(k) => write!(f, "AddedKong {k}"),
            other => write!(f, "{:?}", other.kind()),
        }
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let tile = |i: usize| -> Result<Tile, String> {
            parts.get(i).ok_or_else(|| format!("`{s}`: missing tile"))?.parse::<Tile>().map_err(|e| e.to_string())
        };
        let kind = |i: usize| -> Result<TileKind, String> {
            parse_tile(parts.get(i).ok_or_else(|| format!("`{s}`: missing tile"))?).map_err(|e| e.to_string())
        };
        let (expected, action) = match parts.first().copied() {
            Some("Draw") => (1, Action::Draw),
            Some("Discard") => (2, Action::Discard(tile(1)?)),
            Some("Chow") => (3, Action::Chow { mid: kind(1)?, discard: tile(2)? }),
            Some("Pung") => (2, Action::Pung { discard: tile(1)? }),
            Some("MeldedKong") => (1, Action::MeldedKong),
            Some("ConcealedKong") => (2, Action::ConcealedKong(kind(1)?)),
            Some("AddedKong") => (2, Action::AddedKong(kind(1)?)),
            Some("WinSelfDraw") => (1, Action::WinSelfDraw),
            Some("WinDiscard") => (1, Action::WinDiscard),
            Some("WinRobKong") => (1, Action::WinRobKong),
            Some("Pass") => (1, Action::Pass),
            _ => return Err(format!("unknown action `{s}`")),
        };
        if parts.len() != expected {
            return Err(format!("`{s}`: wrong number of arguments"));
        }
        Ok(action)
    }
}

impl Serialize for Action {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Action {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
