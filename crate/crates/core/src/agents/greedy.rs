use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::deficiency::deficiency_counts;
use super::{Agent, AgentError};
use crate::engine::{Action, Observation, RequestKind};
use crate::rng::{below, wall_rng};
use crate::ruleset::RuleSet;
use crate::scoring::{best_fan, shape, WinBy, WinContext};
use crate::tiles::{Hand, KindCounts, Meld, MeldType, Tile, TileKind, NUM_KINDS};

/// Discards toward the nearest winning shape, breaking ties by the number
/// of unseen tiles that improve the hand. A ready hand whose waits cannot
/// reach the win threshold is valued as one step further away.
pub struct GreedyDeficiency {
    name: String,
    rng: ChaCha8Rng,
    epsilon: f64,
    ruleset: Arc<RuleSet>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Score {
    deficiency: u32,
    /// Negated so that smaller is better.
    neg_outs: i32,
}

impl GreedyDeficiency {
    pub fn new(name: impl Into<String>, seed: u64, epsilon: f64, ruleset: Arc<RuleSet>) -> GreedyDeficiency {
        GreedyDeficiency { name: name.into(), rng: wall_rng(seed), epsilon, ruleset }
    }

    fn melded_counts(melds: &[Meld]) -> KindCounts {
        let mut c = KindCounts::default();
        for m in melds {
            for t in &m.tiles {
                c.add(t.kind);
            }
        }
        c
    }

    fn unseen(obs: &Observation, own: &KindCounts, k: TileKind) -> i32 {
        4 - obs.visible_counts.get(k) as i32 - own.get(k) as i32
    }

    /// Waits of a ready 13-tile-equivalent holding that score at least the threshold.
    fn winnable_waits(&self, obs: &Observation, concealed: &KindCounts, melds: &[Meld]) -> Vec<TileKind> {
        let table = &self.ruleset.table;
        let mut held = Self::melded_counts(melds);
        for k in concealed.kinds() {
            for _ in 0..concealed.get(k) {
                held.add(k);
            }
        }
        let waits = shape::waiting_kinds(concealed, &held, melds.len(), table.strict_seven_pairs());
        if waits.is_empty() {
            return waits;
        }
        let hand = Hand::from_kinds(&concealed.to_kinds(), melds.to_vec());
        waits
            .into_iter()
            .filter(|&w| {
                [WinBy::SelfDraw, WinBy::Discard].into_iter().any(|by| {
                    let ctx = WinContext {
                        win_by: by,
                        last_wall_tile: false,
                        seat_wind: obs.seat_wind,
                        prevalent_wind: obs.prevalent_wind,
                        discarder: (by == WinBy::Discard).then_some((obs.seat + 1) % 4),
                        winning_tile: w,
                        visible_counts: obs.visible_counts,
                    };
                    best_fan(&hand, w, &ctx, table).total >= self.ruleset.win_threshold
                })
            })
            .collect()
    }

    /// Deficiency of a 13-tile-equivalent holding, with unwinnable ready
    /// hands pushed back one step.
    fn adjusted(&self, obs: &Observation, concealed: &KindCounts, melds: &[Meld]) -> (u32, Option<Vec<TileKind>>) {
        let d = deficiency_counts(concealed, &Self::melded_counts(melds), melds.len());
        if d == 1 {
            let waits = self.winnable_waits(obs, concealed, melds);
            if waits.is_empty() {
                return (2, None);
            }
            return (1, Some(waits));
        }
        (d, None)
    }

    fn score(&self, obs: &Observation, concealed: &KindCounts, melds: &[Meld], with_outs: bool) -> Score {
        let (d, waits) = self.adjusted(obs, concealed, melds);
        if !with_outs {
            return Score { deficiency: d, neg_outs: 0 };
        }
        let own = concealed;
        let outs: i32 = match waits {
            Some(w) => w.iter().map(|&k| Self::unseen(obs, own, k).max(0)).sum(),
            None => {
                let melded = Self::melded_counts(melds);
                let mut c = *concealed;
                let mut total = 0;
                for k in nearby_kinds(concealed) {
                    let n = Self::unseen(obs, own, k);
                    if n <= 0 || c.get(k) + melded.get(k) >= 4 {
                        continue;
                    }
                    c.add(k);
                    let after = deficiency_counts(&c, &melded, melds.len());
                    c.remove(k);
                    // `after` is for a 14-tile holding, one tile closer when it drops below d.
                    if after < d {
                        total += n;
                    }
                }
                total
            }
        };
        Score { deficiency: d, neg_outs: -outs }
    }

    fn turn(&mut self, obs: &Observation) -> Action {
        let legal = &obs.legal_actions;
        let discards: Vec<Action> = legal.iter().copied().filter(|a| matches!(a, Action::Discard(_))).collect();
        if self.epsilon > 0.0 && !discards.is_empty() && self.rng.random::<f64>() < self.epsilon {
            return discards[below(&mut self.rng, discards.len() as u64) as usize];
        }
        let hand = obs.own_hand();
        let counts = hand.concealed_counts();
        let melds = &hand.melds;

        let mut kinds: Vec<TileKind> = discards.iter().filter_map(|a| a.discarded()).map(|t| t.kind).collect();
        kinds.dedup();
        let mut plain: Vec<(TileKind, Score)> = kinds
            .iter()
            .map(|&k| {
                let mut c = counts;
                c.remove(k);
                (k, self.score(obs, &c, melds, false))
            })
            .collect();
        let best_d = plain.iter().map(|(_, s)| s.deficiency).min();
        let mut choice: Option<(TileKind, Score)> = None;
        if let Some(best_d) = best_d {
            plain.retain(|(_, s)| s.deficiency == best_d);
            if plain.len() == 1 {
                choice = Some(plain[0]);
            } else {
                for &(k, _) in &plain {
                    let mut c = counts;
                    c.remove(k);
                    let s = self.score(obs, &c, melds, true);
                    if choice.is_none_or(|(_, b)| s < b) {
                        choice = Some((k, s));
                    }
                }
            }
        }

        for &a in legal {
            let (c, ms) = match a {
                Action::ConcealedKong(k) => {
                    let mut c = counts;
                    for _ in 0..4 {
                        c.remove(k);
                    }
                    let mut ms = melds.clone();
                    ms.push(synthetic_meld(MeldType::ConcealedKong, k, 4));
                    (c, ms)
                }
                Action::AddedKong(k) => {
                    let mut c = counts;
                    c.remove(k);
                    let mut ms = melds.clone();
                    if let Some(m) = ms.iter_mut().find(|m| m.meld_type == MeldType::Pung && m.base_kind() == k) {
                        *m = synthetic_meld(MeldType::AddedKong, k, 4);
                    }
                    (c, ms)
                }
                _ => continue,
            };
            let d = self.adjusted(obs, &c, &ms).0;
            if choice.is_none_or(|(_, b)| d <= b.deficiency) {
                return a;
            }
        }

        match choice {
            Some((k, _)) => discards.into_iter().find(|a| a.discarded().map(|t| t.kind) == Some(k)).expect("kind held"),
            None => legal[0],
        }
    }

    fn claim(&mut self, obs: &Observation) -> Action {
        let legal = &obs.legal_actions;
        let Some(pending) = obs.pending else { return Action::Pass };
        let k = pending.tile().kind;
        let hand = obs.own_hand();
        let counts = hand.concealed_counts();
        let melds = &hand.melds;
        let current = self.adjusted(obs, &counts, melds).0;

        let mut best: Option<(u32, Action)> = None;
        for &a in legal {
            let (removed, meld, discard): (Vec<TileKind>, Meld, Option<Tile>) = match a {
                Action::Pung { discard } => (vec![k, k], synthetic_meld(MeldType::Pung, k, 3), Some(discard)),
                Action::MeldedKong => (vec![k, k, k], synthetic_meld(MeldType::MeldedKong, k, 4), None),
                Action::Chow { mid, discard } => {
                    let others: Vec<TileKind> =
                        [mid.offset(-1), Some(mid), mid.offset(1)].into_iter().flatten().filter(|&x| x != k).collect();
                    (others, chow_meld(mid), Some(discard))
                }
                _ => continue,
            };
            let mut c = counts;
            for r in &removed {
                c.remove(*r);
            }
            if let Some(d) = discard {
                c.remove(d.kind);
            }
            let mut ms = melds.clone();
            ms.push(meld);
            let d = self.adjusted(obs, &c, &ms).0;
            let acceptable = if a == Action::MeldedKong { d <= current } else { d < current };
            if acceptable && best.is_none_or(|(b, _)| d < b) {
                best = Some((d, a));
            }
        }
        best.map(|(_, a)| a).unwrap_or(Action::Pass)
    }
}

fn synthetic_meld(meld_type: MeldType, k: TileKind, n: u8) -> Meld {
    let tiles = (0..n).map(|c| Tile::new(k, c)).collect();
    let from = if meld_type == MeldType::ConcealedKong { None } else { Some(0) };
    Meld::new(meld_type, tiles, from, None).expect("well-formed meld")
}

fn chow_meld(mid: TileKind) -> Meld {
    let tiles = [mid.offset(-1), Some(mid), mid.offset(1)].into_iter().flatten().map(|k| Tile::new(k, 0)).collect();
    Meld::new(MeldType::Chow, tiles, Some(0), None).expect("well-formed chow")
}

/// Kinds within two ranks of a held suited tile, plus held honors.
fn nearby_kinds(c: &KindCounts) -> Vec<TileKind> {
    let mut mark = [false; NUM_KINDS];
    for k in c.kinds() {
        if k.is_numbered() {
            for d in -2..=2 {
                if let Some(x) = k.offset(d) {
                    mark[x.index()] = true;
                }
            }
        } else {
            mark[k.index()] = true;
        }
    }
    (0..NUM_KINDS).filter(|&i| mark[i]).map(TileKind::from_index).collect()
}

impl Agent for GreedyDeficiency {
    fn name(&self) -> &str {
        &self.name
    }

    fn act(&mut self, obs: &Observation) -> Result<Action, AgentError> {
        if obs.legal_actions.is_empty() {
            return Err(AgentError::Illegal("no legal action offered".into()));
        }
        if let Some(&win) = obs.legal_actions.iter().find(|a| a.is_win()) {
            return Ok(win);
        }
        Ok(match obs.request_kind {
            RequestKind::ActNow => self.turn(obs),
            RequestKind::ClaimOrPass => self.claim(obs),
        })
    }
}
