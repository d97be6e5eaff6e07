use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Action, EngineError, GameState};
use crate::agents::Agent;
use crate::ruleset::RuleSet;
use crate::scoring::{FanId, WinBy};
use crate::tiles::{Tile, Wall};

pub const DEFAULT_FORFEIT_PENALTY: i32 = 24;

#[derive(Debug, Clone)]
pub struct MatchConfig {
    pub match_id: String,
    pub seed: u64,
    pub ruleset: Arc<RuleSet>,
    /// Points the offender loses; the other three share it equally.
    pub forfeit_penalty: i32,
}

impl MatchConfig {
    pub fn new(match_id: impl Into<String>, seed: u64, ruleset: Arc<RuleSet>) -> MatchConfig {
        MatchConfig { match_id: match_id.into(), seed, ruleset, forfeit_penalty: DEFAULT_FORFEIT_PENALTY }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub seat: usize,
    pub action: Action,
    pub tiles: Vec<Tile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanListEntry {
    pub pattern_id: FanId,
    pub name: String,
    pub points: u32,
    pub multiplicity: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub winner: Option<usize>,
    #[serde(default)]
    pub win_by: Option<WinBy>,
    #[serde(default)]
    pub discarder: Option<usize>,
    #[serde(default)]
    pub forfeit: Option<usize>,
    pub fan_list: Vec<FanListEntry>,
    pub fan_total: u32,
    pub scores: [i32; 4],
    pub compensated_scores: Option<[f64; 4]>,
}

/// One finished match, serialized as a single JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub match_id: String,
    pub seed: u64,
    pub ruleset_id: String,
    pub wall: Vec<Tile>,
    pub events: Vec<EventRecord>,
    pub result: MatchResult,
}

impl MatchRecord {
    pub fn from_state(config: &MatchConfig, state: &GameState) -> MatchRecord {
        let outcome = state.outcome.clone().expect("match finished");
        let table = &state.ruleset.table;
        let fan_list = outcome
            .fan
            .fans
            .iter()
            .map(|f| FanListEntry {
                pattern_id: f.pattern_id,
                name: table.name(f.pattern_id).to_string(),
                points: f.points,
                multiplicity: f.multiplicity,
            })
            .collect();
        MatchRecord {
            match_id: config.match_id.clone(),
            seed: config.seed,
            ruleset_id: state.ruleset.ruleset_id.clone(),
            wall: state.initial_wall.clone(),
            events: state
                .events
                .iter()
                .map(|e| EventRecord { seat: e.seat, action: e.action, tiles: e.tiles.clone() })
                .collect(),
            result: MatchResult {
                winner: outcome.winner,
                win_by: outcome.win_by,
                discarder: outcome.discarder,
                forfeit: outcome.forfeit,
                fan_list,
                fan_total: outcome.fan.total,
                scores: outcome.scores,
                compensated_scores: state.ruleset.compensation.map(|c| c.apply(&outcome.scores)),
            },
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    /// Decisions (everything but draws) of `seat`, in order.
    pub fn decisions_of(&self, seat: usize) -> Vec<Action> {
        self.events.iter().filter(|e| e.seat == seat && e.action != Action::Draw).map(|e| e.action).collect()
    }
}

/// Plays one match to the end. An agent that errors or answers with an
/// illegal action forfeits.
pub fn run_match(
    config: &MatchConfig,
    wall: Wall,
    agents: &mut [Box<dyn Agent>; 4],
) -> Result<MatchRecord, EngineError> {
    let mut state = GameState::new(config.ruleset.clone(), wall)?;
    for (seat, agent) in agents.iter_mut().enumerate() {
        agent.begin_match(&config.match_id, seat);
    }
    play_out(&mut state, agents, config.forfeit_penalty);
    Ok(MatchRecord::from_state(config, &state))
}

/// Drives `state` to Finished with the given agents.
pub fn play_out(state: &mut GameState, agents: &mut [Box<dyn Agent>; 4], forfeit_penalty: i32) {
    while !state.is_finished() {
        let seat = state.seats_to_act()[0];
        if state.phase == super::Phase::AwaitDraw {
            state.step(seat, Action::Draw).expect("draw is legal");
            continue;
        }
        let agent = &mut agents[seat];
        let obs = state.observation_for(seat, agent.wants_history());
        let ok = match agent.act(&obs) {
            Ok(action) => state.step(seat, action).is_ok(),
            Err(_) => false,
        };
        if !ok {
            state.forfeit(seat, forfeit_penalty);
        }
    }
}
