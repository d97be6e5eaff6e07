//! Line protocol for external agents and human clients.
//!
//! Request: one JSON object `{match_id, seat, request_kind, observation}`.
//! Response: `PLAY t` | `CHI mid t` | `PENG t` | `GANG [t]` | `BUGANG t` | `HU` | `PASS`.

use serde::{Deserialize, Serialize};

use super::AgentError;
use crate::engine::{Action, Observation, RequestKind};
use crate::tiles::{parse_tile, TileKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub match_id: String,
    pub seat: usize,
    pub request_kind: RequestKind,
    pub observation: Observation,
}

impl Request {
    pub fn new(match_id: impl Into<String>, observation: Observation) -> Request {
        Request { match_id: match_id.into(), seat: observation.seat, request_kind: observation.request_kind, observation }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("requests serialize")
    }
}

/// A response line with tile codes decoded but not yet checked for legality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Response {
    Play(TileKind),
    Chi(TileKind, TileKind),
    Peng(TileKind),
    Gang(Option<TileKind>),
    Bugang(TileKind),
    Hu,
    Pass,
}

impl Response {
    pub fn parse(line: &str) -> Result<Response, AgentError> {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let malformed = || AgentError::Malformed(line.trim().to_string());
        let tile = |i: usize| parts.get(i).ok_or_else(malformed).and_then(|s| parse_tile(s).map_err(|_| malformed()));
        let (argc, r) = match parts.first().copied() {
            Some("PLAY") => (2, Response::Play(tile(1)?)),
            Some("CHI") => (3, Response::Chi(tile(1)?, tile(2)?)),
            Some("PENG") => (2, Response::Peng(tile(1)?)),
            Some("GANG") if parts.len() == 1 => (1, Response::Gang(None)),
            Some("GANG") => (2, Response::Gang(Some(tile(1)?))),
            Some("BUGANG") => (2, Response::Bugang(tile(1)?)),
            Some("HU") => (1, Response::Hu),
            Some("PASS") => (1, Response::Pass),
            _ => return Err(malformed()),
        };
        if parts.len() != argc {
            return Err(malformed());
        }
        Ok(r)
    }

    /// The legal action this response names.
    pub fn resolve(self, legal: &[Action]) -> Result<Action, AgentError> {
        let kind_of = |a: &Action| a.discarded().map(|t| t.kind);
        let found = legal.iter().copied().find(|a| match (self, a) {
            (Response::Play(k), Action::Discard(t)) => t.kind == k,
            (Response::Chi(m, k), Action::Chow { mid, .. }) => *mid == m && kind_of(a) == Some(k),
            (Response::Peng(k), Action::Pung { .. }) => kind_of(a) == Some(k),
            (Response::Gang(None), Action::MeldedKong) => true,
            (Response::Gang(Some(k)), Action::ConcealedKong(x)) => *x == k,
            (Response::Bugang(k), Action::AddedKong(x)) => *x == k,
            (Response::Hu, a) => a.is_win(),
            (Response::Pass, Action::Pass) => true,
            _ => false,
        });
        let found = found.or_else(|| match self {
            // A claimed kong named by its tile.
            Response::Gang(Some(_)) => legal.iter().copied().find(|a| *a == Action::MeldedKong),
            _ => None,
        });
        found.ok_or_else(|| AgentError::Illegal(format!("{self:?} is not among {} legal actions", legal.len())))
    }
}

/// Parses a response line and matches it against the legal set.
pub fn parse_response(line: &str, legal: &[Action]) -> Result<Action, AgentError> {
    Response::parse(line)?.resolve(legal)
}
