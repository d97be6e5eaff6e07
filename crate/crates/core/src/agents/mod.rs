//! Decision makers: built-in baselines, scripted replays and external
//! programs speaking the line protocol.

mod deficiency;
mod external;
mod greedy;
pub mod protocol;

use std::collections::VecDeque;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Action, Observation};
use crate::rng::{below, wall_rng};
use crate::ruleset::RuleSet;

pub use deficiency::{deficiency, deficiency_counts};
pub use external::ExternalAgent;
pub use greedy::GreedyDeficiency;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("agent timed out after {0} ms")]
    Timeout(u64),
    #[error("malformed response `{0}`")]
    Malformed(String),
    #[error("illegal action: {0}")]
    Illegal(String),
    #[error("agent process failed: {0}")]
    Process(String),
    #[error("scripted agent has no more actions")]
    Exhausted,
}

pub trait Agent: Send {
    fn name(&self) -> &str;

    /// Called once per match before the first observation.
    fn begin_match(&mut self, _match_id: &str, _seat: usize) {}

    fn act(&mut self, obs: &Observation) -> Result<Action, AgentError>;

    /// Whether observations should carry the redacted event history.
    fn wants_history(&self) -> bool {
        false
    }
}

/// How to build an agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AgentPolicy {
    RandomLegal,
    /// With probability `epsilon` a turn discard is chosen uniformly at random.
    GreedyDeficiency {
        #[serde(default)]
        epsilon: f64,
    },
    External {
        command: Vec<String>,
        #[serde(default = "default_timeout")]
        timeout_ms: u64,
    },
}

fn default_timeout() -> u64 {
    1000
}

impl AgentPolicy {
    /// Parses `random`, `greedy`, `greedy:0.2` or `external:<cmd ...>`.
    pub fn parse(spec: &str) -> Result<AgentPolicy, String> {
        let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
        match head {
            "random" => Ok(AgentPolicy::RandomLegal),
            "greedy" => {
                let epsilon = if rest.is_empty() { 0.0 } else { rest.parse().map_err(|_| format!("bad epsilon `{rest}`"))? };
                if !(0.0..=1.0).contains(&epsilon) {
                    return Err(format!("epsilon {epsilon} outside [0, 1]"));
                }
                Ok(AgentPolicy::GreedyDeficiency { epsilon })
            }
            "external" => {
                let command: Vec<String> = rest.split_whitespace().map(String::from).collect();
                if command.is_empty() {
                    return Err("external agent needs a command".into());
                }
                Ok(AgentPolicy::External { command, timeout_ms: default_timeout() })
            }
            _ => Err(format!("unknown agent `{spec}` (expected random, greedy[:eps] or external:<cmd>)")),
        }
    }
}

/// A named policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentHandle {
    pub id: String,
    pub policy: AgentPolicy,
}

impl AgentHandle {
    pub fn new(id: impl Into<String>, policy: AgentPolicy) -> AgentHandle {
        AgentHandle { id: id.into(), policy }
    }

    pub fn random(id: impl Into<String>) -> AgentHandle {
        AgentHandle::new(id, AgentPolicy::RandomLegal)
    }

    pub fn greedy(id: impl Into<String>) -> AgentHandle {
        AgentHandle::new(id, AgentPolicy::GreedyDeficiency { epsilon: 0.0 })
    }

    /// A fresh agent whose random choices derive from `seed`.
    pub fn build(&self, seed: u64, ruleset: &Arc<RuleSet>) -> Box<dyn Agent> {
        match &self.policy {
            AgentPolicy::RandomLegal => Box::new(RandomLegal::new(self.id.clone(), seed)),
            AgentPolicy::GreedyDeficiency { epsilon } => {
                Box::new(GreedyDeficiency::new(self.id.clone(), seed, *epsilon, ruleset.clone()))
            }
            AgentPolicy::External { command, timeout_ms } => {
                Box::new(ExternalAgent::new(self.id.clone(), command.clone(), *timeout_ms))
            }
        }
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self.policy, AgentPolicy::External { .. })
    }
}

/// Picks uniformly among the legal actions.
pub struct RandomLegal {
    name: String,
    rng: ChaCha8Rng,
}

impl RandomLegal {
    pub fn new(name: impl Into<String>, seed: u64) -> RandomLegal {
        RandomLegal { name: name.into(), rng: wall_rng(seed) }
    }
}

impl Agent for RandomLegal {
    fn name(&self) -> &str {
        &self.name
    }

    fn act(&mut self, obs: &Observation) -> Result<Action, AgentError> {
        if obs.legal_actions.is_empty() {
            return Err(AgentError::Illegal("no legal action offered".into()));
        }
        let i = below(&mut self.rng, obs.legal_actions.len() as u64) as usize;
        Ok(obs.legal_actions[i])
    }
}

/// Replays a fixed list of decisions.
pub struct Scripted {
    name: String,
    actions: VecDeque<Action>,
}

impl Scripted {
    pub fn new(name: impl Into<String>, actions: impl IntoIterator<Item = Action>) -> Scripted {
        Scripted { name: name.into(), actions: actions.into_iter().collect() }
    }

    /// Four agents that replay the decisions recorded in `record`.
    pub fn from_record(record: &crate::engine::MatchRecord) -> [Box<dyn Agent>; 4] {
        std::array::from_fn(|s| Box::new(Scripted::new(format!("replay-{s}"), record.decisions_of(s))) as Box<dyn Agent>)
    }

    pub fn remaining(&self) -> usize {
        self.actions.len()
    }
}

impl Agent for Scripted {
    fn name(&self) -> &str {
        &self.name
    }

    fn act(&mut self, _obs: &Observation) -> Result<Action, AgentError> {
        self.actions.pop_front().ok_or(AgentError::Exhausted)
    }
}

#[cfg(test)]
mod tests;
