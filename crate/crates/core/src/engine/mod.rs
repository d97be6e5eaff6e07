//! The four-player referee.
//!
//! Play starts with seat 0 drawing. A discard opens a claim window in
//! which every seat with a possible claim answers once; claims resolve
//! by priority win > pung/kong > chow, and among several wins the seat
//! nearest the discarder takes it alone.

mod action;
mod record;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use action::{Action, ActionKind};
pub use record::{play_out, run_match, EventRecord, FanListEntry, MatchConfig, MatchRecord, MatchResult, DEFAULT_FORFEIT_PENALTY};

use crate::ruleset::RuleSet;
use crate::scoring::{self, shape, FanResult, WinBy, WinContext};
use crate::tiles::{deal, Hand, KindCounts, Meld, MeldType, Tile, TileError, TileKind, Wall};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    AwaitDraw,
    AwaitDiscard,
    AwaitClaims,
    Finished,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DrawSource {
    Wall,
    Replacement,
}

/// The tile other seats may claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Pending {
    Discard { seat: usize, tile: Tile },
    AddedKong { seat: usize, tile: Tile },
}

impl Pending {
    pub fn seat(&self) -> usize {
        match *self {
            Pending::Discard { seat, .. } | Pending::AddedKong { seat, .. } => seat,
        }
    }

    pub fn tile(&self) -> Tile {
        match *self {
            Pending::Discard { tile, .. } | Pending::AddedKong { tile, .. } => tile,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub seat: usize,
    pub action: Action,
    /// Tiles this event made known (hidden from other seats for draws).
    pub tiles: Vec<Tile>,
    pub timestamp_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub winner: Option<usize>,
    pub win_by: Option<WinBy>,
    pub discarder: Option<usize>,
    pub forfeit: Option<usize>,
    pub fan: FanResult,
    pub scores: [i32; 4],
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("seat {seat} may not play {action}; legal: {legal:?}")]
    Illegal { seat: usize, action: Action, legal: Vec<Action> },
    #[error(transparent)]
    Tiles(#[from] TileError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    ActNow,
    ClaimOrPass,
}

/// An event as one seat sees it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservedEvent {
    pub seat: usize,
    pub kind: ActionKind,
    /// `None` when the details are hidden from the observer.
    pub action: Option<Action>,
    pub tiles: Option<Vec<Tile>>,
    pub timestamp_index: usize,
}

/// Everything one seat is entitled to know.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub seat: usize,
    pub request_kind: RequestKind,
    pub phase: Phase,
    pub current_seat: usize,
    pub seat_wind: u8,
    pub prevalent_wind: u8,
    pub hand: Vec<Tile>,
    pub last_draw: Option<Tile>,
    pub melds: [Vec<Meld>; 4],
    pub flowers: [Vec<Tile>; 4],
    pub discards: [Vec<Tile>; 4],
    pub wall_remaining: usize,
    pub pending: Option<Pending>,
    pub visible_counts: KindCounts,
    pub legal_actions: Vec<Action>,
    #[serde(default)]
    pub history: Vec<ObservedEvent>,
}

impl Observation {
    pub fn own_hand(&self) -> Hand {
        Hand { concealed: self.hand.clone(), melds: self.melds[self.seat].clone(), flowers: Vec::new() }
    }
}

/// Full referee state of one match.
#[derive(Debug, Clone)]
pub struct GameState {
    pub ruleset: Arc<RuleSet>,
    pub initial_wall: Vec<Tile>,
    pub wall: Wall,
    pub hands: [Hand; 4],
    pub discards: [Vec<Tile>; 4],
    pub current_seat: usize,
    pub phase: Phase,
    pub events: Vec<Event>,
    pub visible_counts: KindCounts,
    pub last_draw: Option<(Tile, DrawSource)>,
    pub pending: Option<Pending>,
    pub prevalent_wind: u8,
    pub outcome: Option<Outcome>,
    claim_options: [Vec<Action>; 4],
    claims: [Option<Action>; 4],
}

impl GameState {
    /// Deals from an untouched wall and waits for seat 0 to draw.
    pub fn new(ruleset: Arc<RuleSet>, wall: Wall) -> Result<GameState, EngineError> {
        let initial_wall = wall.tiles.clone();
        let (hands, wall) = deal(wall)?;
        let mut state = GameState {
            ruleset,
            initial_wall,
            wall,
            hands,
            discards: Default::default(),
            current_seat: 0,
            phase: Phase::AwaitDraw,
            events: Vec::new(),
            visible_counts: KindCounts::default(),
            last_draw: None,
            pending: None,
            prevalent_wind: 1,
            outcome: None,
            claim_options: Default::default(),
            claims: [None; 4],
        };
        for seat in 0..4 {
            let flowers: Vec<Tile> = state.hands[seat].concealed.iter().copied().filter(|t| t.kind.is_flower()).collect();
            if flowers.is_empty() {
                continue;
            }
            state.hands[seat].concealed.retain(|t| !t.kind.is_flower());
            let mut revealed = flowers.clone();
            state.hands[seat].flowers.extend(flowers.iter().copied());
            let mut missing = flowers.len();
            while missing > 0 {
                let Some(t) = state.wall.draw_tail() else {
                    state.finish_draw();
                    return Ok(state);
                };
                revealed.push(t);
                if t.kind.is_flower() {
                    state.hands[seat].flowers.push(t);
                } else {
                    state.hands[seat].concealed.push(t);
                    missing -= 1;
                }
            }
            state.log(seat, Action::Draw, revealed);
        }
        if state.wall.is_empty() {
            state.finish_draw();
        }
        Ok(state)
    }

    pub fn is_finished(&self) -> bool {
        self.phase == Phase::Finished
    }

    fn log(&mut self, seat: usize, action: Action, tiles: Vec<Tile>) {
        let timestamp_index = self.events.len();
        self.events.push(Event { seat, action, tiles, timestamp_index });
    }

    /// Seats that currently owe a decision.
    pub fn seats_to_act(&self) -> Vec<usize> {
        match self.phase {
            Phase::Finished => vec![],
            Phase::AwaitDraw | Phase::AwaitDiscard => vec![self.current_seat],
            Phase::AwaitClaims => {
                let from = self.pending.map_or(0, |p| p.seat());
                (1..4).map(|i| (from + i) % 4).filter(|&s| self.claims[s].is_none()).collect()
            }
        }
    }

    /// Exactly the actions `seat` may take now; empty if it owes no decision.
    pub fn legal_actions(&self, seat: usize) -> Vec<Action> {
        match self.phase {
            Phase::Finished => vec![],
            Phase::AwaitDraw => {
                if seat == self.current_seat {
                    vec![Action::Draw]
                } else {
                    vec![]
                }
            }
            Phase::AwaitDiscard => {
                if seat == self.current_seat {
                    self.turn_actions(seat)
                } else {
                    vec![]
                }
            }
            Phase::AwaitClaims => {
                if self.claims[seat].is_none() {
                    self.claim_options[seat].clone()
                } else {
                    vec![]
                }
            }
        }
    }

    fn turn_actions(&self, seat: usize) -> Vec<Action> {
        let hand = &self.hands[seat];
        let mut out: Vec<Action> = hand.concealed.iter().map(|&t| Action::Discard(t)).collect();
        out.sort();
        let Some((drawn, source)) = self.last_draw else {
            return out;
        };
        let by = if source == DrawSource::Replacement { WinBy::ReplacementTile } else { WinBy::SelfDraw };
        if self.win_result(seat, drawn, by).is_some() {
            out.push(Action::WinSelfDraw);
        }
        if !self.wall.is_empty() {
            let counts = hand.concealed_counts();
            for k in counts.kinds() {
                if counts.get(k) == 4 {
                    out.push(Action::ConcealedKong(k));
                }
            }
            for m in &hand.melds {
                if m.meld_type == MeldType::Pung && counts.get(m.base_kind()) > 0 {
                    out.push(Action::AddedKong(m.base_kind()));
                }
            }
        }
        out
    }

    fn context(&self, seat: usize, winning: TileKind, win_by: WinBy, discarder: Option<usize>) -> WinContext {
        let mut visible = self.visible_counts;
        if win_by == WinBy::Discard && visible.get(winning) > 0 {
            visible.remove(winning);
        }
        WinContext {
            win_by,
            last_wall_tile: win_by != WinBy::RobKong && self.wall.is_empty(),
            seat_wind: seat as u8 + 1,
            prevalent_wind: self.prevalent_wind,
            discarder: if win_by == WinBy::Discard { discarder } else { None },
            winning_tile: winning,
            visible_counts: visible,
        }
    }

    /// Scores a win for `seat` on `tile`; `None` unless it reaches the threshold.
    fn win_result(&self, seat: usize, tile: Tile, win_by: WinBy) -> Option<FanResult> {
        let hand = &self.hands[seat];
        let mut before = hand.clone();
        if win_by.is_self_drawn() {
            let pos = before.concealed.iter().position(|t| *t == tile)?;
            before.concealed.remove(pos);
        }
        let mut counts = before.concealed_counts();
        counts.add(tile.kind);
        let strict = self.ruleset.table.strict_seven_pairs();
        if !shape::is_winning_shape(&counts, before.melds.len(), strict) {
            return None;
        }
        let discarder = self.pending.map(|p| p.seat());
        let ctx = self.context(seat, tile.kind, win_by, discarder);
        let result = scoring::best_fan(&before, tile.kind, &ctx, &self.ruleset.table);
        (result.total >= self.ruleset.win_threshold).then_some(result)
    }

    fn open_claims(&mut self, pending: Pending) {
        self.pending = Some(pending);
        self.phase = Phase::AwaitClaims;
        self.claims = [None; 4];
        let from = pending.seat();
        for seat in 0..4 {
            self.claim_options[seat] = if seat == from { vec![] } else { self.claim_actions(seat, pending) };
            if self.claim_options[seat].is_empty() {
                self.claims[seat] = Some(Action::Pass);
            }
        }
        if self.claims.iter().all(Option::is_some) {
            self.resolve_claims();
        }
    }

    fn claim_actions(&self, seat: usize, pending: Pending) -> Vec<Action> {
        let mut out = Vec::new();
        let tile = pending.tile();
        let hand = &self.hands[seat];
        match pending {
            Pending::AddedKong { .. } => {
                if self.win_result(seat, tile, WinBy::RobKong).is_some() {
                    out.push(Action::WinRobKong);
                }
            }
            Pending::Discard { seat: from, .. } => {
                if self.win_result(seat, tile, WinBy::Discard).is_some() {
                    out.push(Action::WinDiscard);
                }
                if !self.wall.is_empty() {
                    let counts = hand.concealed_counts();
                    let k = tile.kind;
                    if counts.get(k) >= 2 {
                        for &d in &hand.concealed {
                            if d.kind != k || counts.get(k) >= 3 {
                                out.push(Action::Pung { discard: d });
                            }
                        }
                    }
                    if counts.get(k) == 3 {
                        out.push(Action::MeldedKong);
                    }
                    if seat == (from + 1) % 4 && k.is_numbered() {
                        for mid in [k.offset(-1), Some(k), k.offset(1)].into_iter().flatten() {
                            let (Some(lo), Some(hi)) = (mid.offset(-1), mid.offset(1)) else { continue };
                            let needed: Vec<TileKind> = [lo, mid, hi].into_iter().filter(|&x| x != k).collect();
                            if needed.iter().any(|&x| counts.get(x) == 0) {
                                continue;
                            }
                            for &d in &hand.concealed {
                                if needed.contains(&d.kind) && counts.get(d.kind) < 2 {
                                    continue;
                                }
                                out.push(Action::Chow { mid, discard: d });
                            }
                        }
                    }
                }
            }
        }
        if !out.is_empty() {
            out.sort();
            out.dedup();
            out.push(Action::Pass);
        }
        out
    }

    /// Applies one decision.
    pub fn step(&mut self, seat: usize, action: Action) -> Result<(), EngineError> {
        let legal = self.legal_actions(seat);
        if !legal.contains(&action) {
            return Err(EngineError::Illegal { seat, action, legal });
        }
        match self.phase {
            Phase::AwaitDraw => self.do_draw(seat, DrawSource::Wall),
            Phase::AwaitDiscard => self.do_turn(seat, action),
            Phase::AwaitClaims => {
                self.claims[seat] = Some(action);
                if self.claims.iter().all(Option::is_some) {
                    self.resolve_claims();
                }
            }
            Phase::Finished => unreachable!("no legal actions once finished"),
        }
        Ok(())
    }

    fn do_draw(&mut self, seat: usize, source: DrawSource) {
        let mut revealed = Vec::new();
        loop {
            let next = match (source, revealed.is_empty()) {
                (DrawSource::Wall, true) => self.wall.draw_front(),
                _ => self.wall.draw_tail(),
            };
            let Some(t) = next else {
                if !revealed.is_empty() {
                    self.log(seat, Action::Draw, revealed);
                }
                self.finish_draw();
                return;
            };
            revealed.push(t);
            if t.kind.is_flower() {
                self.hands[seat].flowers.push(t);
                continue;
            }
            self.hands[seat].concealed.push(t);
            let src = if revealed.len() > 1 { DrawSource::Replacement } else { source };
            self.last_draw = Some((t, src));
            break;
        }
        self.log(seat, Action::Draw, revealed);
        self.current_seat = seat;
        self.phase = Phase::AwaitDiscard;
    }

    fn remove_tile(&mut self, seat: usize, tile: Tile) {
        let pos = self.hands[seat].concealed.iter().position(|t| *t == tile).expect("tile held");
        self.hands[seat].concealed.remove(pos);
    }

    fn take_kind(&mut self, seat: usize, kind: TileKind, n: usize) -> Vec<Tile> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let pos = self.hands[seat].concealed.iter().position(|t| t.kind == kind).expect("kind held");
            out.push(self.hands[seat].concealed.remove(pos));
        }
        out
    }

    fn do_turn(&mut self, seat: usize, action: Action) {
        match action {
            Action::Discard(t) => {
                self.log(seat, action, vec![t]);
                self.discard(seat, t);
            }
            Action::WinSelfDraw => {
                let (tile, source) = self.last_draw.expect("win after a draw");
                let by = if source == DrawSource::Replacement { WinBy::ReplacementTile } else { WinBy::SelfDraw };
                let fan = self.win_result(seat, tile, by).expect("legal win scores");
                let mut shown = self.hands[seat].concealed.clone();
                shown.sort();
                self.log(seat, action, shown);
                self.finish_win(seat, by, None, fan);
            }
            Action::ConcealedKong(k) => {
                let tiles = self.take_kind(seat, k, 4);
                for _ in 0..4 {
                    self.visible_counts.add(k);
                }
                self.log(seat, action, tiles.clone());
                let meld = Meld::new(MeldType::ConcealedKong, tiles, None, None).expect("four of a kind");
                self.hands[seat].melds.push(meld);
                self.last_draw = None;
                self.do_draw(seat, DrawSource::Replacement);
            }
            Action::AddedKong(k) => {
                let tile = self.hands[seat].concealed.iter().copied().find(|t| t.kind == k).expect("kind held");
                self.log(seat, action, vec![tile]);
                self.last_draw = None;
                self.current_seat = seat;
                self.open_claims(Pending::AddedKong { seat, tile });
            }
            _ => unreachable!("checked against legal set"),
        }
    }

    fn discard(&mut self, seat: usize, t: Tile) {
        self.remove_tile(seat, t);
        self.discards[seat].push(t);
        self.visible_counts.add(t.kind);
        self.last_draw = None;
        self.current_seat = seat;
        self.open_claims(Pending::Discard { seat, tile: t });
    }

    fn resolve_claims(&mut self) {
        let pending = self.pending.take().expect("claim window open");
        let from = pending.seat();
        let order: Vec<usize> = (1..4).map(|i| (from + i) % 4).collect();
        let responses: Vec<(usize, Action)> =
            order.iter().map(|&s| (s, self.claims[s].expect("all answered"))).collect();
        let asked: Vec<(usize, Action)> =
            responses.iter().copied().filter(|(s, _)| !self.claim_options[*s].is_empty()).collect();
        for o in self.claim_options.iter_mut() {
            o.clear();
        }
        let tile = pending.tile();

        if let Some(&(winner, _)) = responses.iter().find(|(_, a)| a.is_win()) {
            for &(s, a) in &asked {
                if s != winner {
                    self.log(s, a, vec![]);
                }
            }
            let by = match pending {
                Pending::Discard { .. } => WinBy::Discard,
                Pending::AddedKong { .. } => WinBy::RobKong,
            };
            let fan = self.win_result(winner, tile, by).expect("legal win scores");
            let mut shown = self.hands[winner].concealed.clone();
            shown.push(tile);
            shown.sort();
            self.log(winner, responses.iter().find(|(s, _)| *s == winner).unwrap().1, shown);
            match pending {
                Pending::Discard { .. } => {
                    self.discards[from].pop();
                    self.visible_counts.remove(tile.kind);
                }
                Pending::AddedKong { .. } => self.remove_tile(from, tile),
            }
            self.hands[winner].concealed.push(tile);
            self.finish_win(winner, by, Some(from), fan);
            return;
        }

        let claim = responses
            .iter()
            .find(|(_, a)| matches!(a, Action::Pung { .. } | Action::MeldedKong))
            .or_else(|| responses.iter().find(|(_, a)| matches!(a, Action::Chow { .. })))
            .copied();
        for &(s, a) in &asked {
            if Some((s, a)) != claim {
                self.log(s, a, vec![]);
            }
        }

        if let Pending::AddedKong { seat, tile } = pending {
            self.remove_tile(seat, tile);
            self.visible_counts.add(tile.kind);
            let m = self.hands[seat]
                .melds
                .iter_mut()
                .find(|m| m.meld_type == MeldType::Pung && m.base_kind() == tile.kind)
                .expect("pung to extend");
            m.meld_type = MeldType::AddedKong;
            m.tiles.push(tile);
            m.tiles.sort();
            self.do_draw(seat, DrawSource::Replacement);
            return;
        }

        let Some((claimer, action)) = claim else {
            self.current_seat = (from + 1) % 4;
            self.phase = Phase::AwaitDraw;
            if self.wall.is_empty() {
                self.finish_draw();
            }
            return;
        };

        self.discards[from].pop();
        let k = tile.kind;
        match action {
            Action::Pung { discard } => {
                self.remove_tile(claimer, discard);
                let mut tiles = self.take_kind(claimer, k, 2);
                self.hands[claimer].concealed.push(discard);
                tiles.push(tile);
                self.visible_counts.add(k);
                self.visible_counts.add(k);
                self.log(claimer, action, tiles.clone());
                let meld = Meld::new(MeldType::Pung, tiles, Some(from), Some(tile)).expect("pung shape");
                self.hands[claimer].melds.push(meld);
                self.discard(claimer, discard);
            }
            Action::Chow { mid, discard } => {
                self.remove_tile(claimer, discard);
                let mut tiles = vec![tile];
                for x in [mid.offset(-1), Some(mid), mid.offset(1)].into_iter().flatten() {
                    if x != k {
                        tiles.extend(self.take_kind(claimer, x, 1));
                        self.visible_counts.add(x);
                    }
                }
                self.hands[claimer].concealed.push(discard);
                self.log(claimer, action, tiles.clone());
                let meld = Meld::new(MeldType::Chow, tiles, Some(from), Some(tile)).expect("chow shape");
                self.hands[claimer].melds.push(meld);
                self.discard(claimer, discard);
            }
            Action::MeldedKong => {
                let mut tiles = self.take_kind(claimer, k, 3);
                tiles.push(tile);
                for _ in 0..3 {
                    self.visible_counts.add(k);
                }
                self.log(claimer, action, tiles.clone());
                let meld = Meld::new(MeldType::MeldedKong, tiles, Some(from), Some(tile)).expect("kong shape");
                self.hands[claimer].melds.push(meld);
                self.do_draw(claimer, DrawSource::Replacement);
            }
            _ => unreachable!("only claims reach here"),
        }
    }

    fn finish_win(&mut self, winner: usize, by: WinBy, discarder: Option<usize>, fan: FanResult) {
        let scores = scoring::settle(fan.total, by, winner, discarder).expect("threshold checked");
        self.outcome = Some(Outcome { winner: Some(winner), win_by: Some(by), discarder, forfeit: None, fan, scores });
        self.phase = Phase::Finished;
        self.pending = None;
    }

    fn finish_draw(&mut self) {
        self.outcome = Some(Outcome {
            winner: None,
            win_by: None,
            discarder: None,
            forfeit: None,
            fan: FanResult::default(),
            scores: [0; 4],
        });
        self.phase = Phase::Finished;
        self.pending = None;
    }

    /// Ends the match with `seat` penalised under `penalty` (others share it equally).
    pub fn forfeit(&mut self, seat: usize, penalty: i32) {
        let mut scores = [penalty / 3; 4];
        scores[seat] = -(penalty / 3) * 3;
        self.outcome = Some(Outcome {
            winner: None,
            win_by: None,
            discarder: None,
            forfeit: Some(seat),
            fan: FanResult::default(),
            scores,
        });
        self.phase = Phase::Finished;
        self.pending = None;
    }

    pub fn request_kind(&self) -> RequestKind {
        if self.phase == Phase::AwaitClaims {
            RequestKind::ClaimOrPass
        } else {
            RequestKind::ActNow
        }
    }

    /// The projection of the state visible to `seat`.
    pub fn observation_for(&self, seat: usize, with_history: bool) -> Observation {
        let mut hand = self.hands[seat].concealed.clone();
        hand.sort();
        let history = if with_history { self.redacted_history(seat) } else { Vec::new() };
        Observation {
            seat,
            request_kind: self.request_kind(),
            phase: self.phase,
            current_seat: self.current_seat,
            seat_wind: seat as u8 + 1,
            prevalent_wind: self.prevalent_wind,
            hand,
            last_draw: if self.current_seat == seat { self.last_draw.map(|d| d.0) } else { None },
            melds: std::array::from_fn(|s| self.hands[s].melds.clone()),
            flowers: std::array::from_fn(|s| self.hands[s].flowers.clone()),
            discards: self.discards.clone(),
            wall_remaining: self.wall.remaining(),
            pending: self.pending,
            visible_counts: self.visible_counts,
            legal_actions: self.legal_actions(seat),
            history,
        }
    }

    /// The event log with other seats' private draws hidden.
    pub fn redacted_history(&self, seat: usize) -> Vec<ObservedEvent> {
        self.events.iter().map(|e| redact(e, seat)).collect()
    }

    /// Every tile's location agrees with the initial wall.
    pub fn check_conservation(&self) -> bool {
        let mut all: Vec<Tile> = self.wall.undrawn().to_vec();
        for s in 0..4 {
            all.extend(&self.hands[s].concealed);
            all.extend(&self.hands[s].flowers);
            for m in &self.hands[s].melds {
                all.extend(&m.tiles);
            }
            all.extend(&self.discards[s]);
        }
        let mut init = self.initial_wall.clone();
        all.sort();
        init.sort();
        all == init
    }
}

/// Hides other seats' draws from `viewer`; flowers stay public.
pub fn redact(e: &Event, viewer: usize) -> ObservedEvent {
    let hidden = e.seat != viewer && e.action == Action::Draw;
    ObservedEvent {
        seat: e.seat,
        kind: e.action.kind(),
        action: Some(e.action),
        tiles: if hidden {
            let shown: Vec<Tile> = e.tiles.iter().copied().filter(|t| t.kind.is_flower()).collect();
            Some(shown)
        } else {
            Some(e.tiles.clone())
        },
        timestamp_index: e.timestamp_index,
    }
}
