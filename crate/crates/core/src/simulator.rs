//! Batch self-play and the two tournament formats.
//!
//! Every match seed is derived from the run seed and the match index, and
//! results are folded in index order, so output does not depend on the
//! number of workers.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{Agent, AgentHandle};
use crate::engine::{run_match, EngineError, MatchConfig, MatchRecord, DEFAULT_FORFEIT_PENALTY};
use crate::rng::split;
use crate::ruleset::{CompensationVector, RuleSet};
use crate::tiles::build_wall;

/// Normal quantile for a two-sided 95% interval.
pub const Z95: f64 = 1.96;

/// First-mover gap reported for the champion agent, in percentage points.
pub const REFERENCE_GAP_PP: f64 = 3.74;

const CHUNK: usize = 512;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("confidence interval needs at least one sample")]
    EmptySample,
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("agent ids must be distinct, got {0:?}")]
    DuplicateAgents(Vec<String>),
    #[error("seating {0:?} is not a permutation of 0..4")]
    Seating([usize; 4]),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Wald half-width `z * sqrt(p (1 - p) / n)`.
pub fn ci_halfwidth(p: f64, n: u64, z: f64) -> Result<f64, SimError> {
    if n == 0 {
        return Err(SimError::EmptySample);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(SimError::Probability(p));
    }
    Ok(z * (p * (1.0 - p) / n as f64).sqrt())
}

/// Run-wide knobs shared by all formats.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub ruleset: Arc<RuleSet>,
    /// 0 means one worker per available core.
    pub workers: usize,
    pub flowers: bool,
    pub forfeit_penalty: i32,
    pub match_prefix: String,
}

impl RunOptions {
    pub fn new(ruleset: Arc<RuleSet>) -> RunOptions {
        RunOptions { ruleset, workers: 0, flowers: false, forfeit_penalty: DEFAULT_FORFEIT_PENALTY, match_prefix: "m".into() }
    }

    pub fn workers(mut self, workers: usize) -> RunOptions {
        self.workers = workers;
        self
    }
}

/// Commutative running totals per seat.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub matches: u64,
    pub draws: u64,
    pub forfeits: u64,
    pub wins: [u64; 4],
    pub self_draw_wins: [u64; 4],
    pub score_sum: [i64; 4],
}

impl Tally {
    pub fn add(&mut self, record: &MatchRecord) {
        let r = &record.result;
        self.matches += 1;
        match (r.winner, r.forfeit) {
            (Some(w), _) => {
                self.wins[w] += 1;
                if r.win_by.is_some_and(|b| b.is_self_drawn()) {
                    self.self_draw_wins[w] += 1;
                }
            }
            (None, Some(_)) => self.forfeits += 1,
            (None, None) => self.draws += 1,
        }
        for s in 0..4 {
            self.score_sum[s] += r.scores[s] as i64;
        }
    }

    pub fn merge(mut self, other: &Tally) -> Tally {
        self.matches += other.matches;
        self.draws += other.draws;
        self.forfeits += other.forfeits;
        for s in 0..4 {
            self.wins[s] += other.wins[s];
            self.self_draw_wins[s] += other.self_draw_wins[s];
            self.score_sum[s] += other.score_sum[s];
        }
        self
    }

    pub fn averages(&self) -> [f64; 4] {
        std::array::from_fn(|s| if self.matches == 0 { 0.0 } else { self.score_sum[s] as f64 / self.matches as f64 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeatLine {
    pub seat: usize,
    pub matches: u64,
    pub wins: u64,
    pub win_rate: f64,
    pub ci_halfwidth: f64,
    pub score_sum: i64,
    pub avg_score: f64,
}

/// Seat-wise outcome of a batch of matches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeatStats {
    pub matches: u64,
    pub draws: u64,
    pub forfeits: u64,
    pub seats: [SeatLine; 4],
    /// Win rate of seat 0 minus seat 3.
    pub first_mover_gap: f64,
    pub first_mover_gap_ci: f64,
}

impl SeatStats {
    pub fn from_tally(t: &Tally) -> SeatStats {
        let n = t.matches.max(1);
        let seats = std::array::from_fn(|s| {
            let p = t.wins[s] as f64 / n as f64;
            SeatLine {
                seat: s,
                matches: t.matches,
                wins: t.wins[s],
                win_rate: p,
                ci_halfwidth: ci_halfwidth(p, n, Z95).expect("p in range"),
                score_sum: t.score_sum[s],
                avg_score: t.score_sum[s] as f64 / n as f64,
            }
        });
        let [p0, p3] = [t.wins[0], t.wins[3]].map(|w| w as f64 / n as f64);
        SeatStats {
            matches: t.matches,
            draws: t.draws,
            forfeits: t.forfeits,
            seats,
            first_mover_gap: p0 - p3,
            first_mover_gap_ci: Z95 * ((p0 * (1.0 - p0) + p3 * (1.0 - p3)) / n as f64).sqrt(),
        }
    }

    pub fn averages(&self) -> [f64; 4] {
        self.seats.each_ref().map(|s| s.avg_score)
    }

    /// Rows of `seat,metric,value,ci` for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seat,metric,value,ci\n");
        for s in &self.seats {
            out += &format!("{},win_rate,{:.6},{:.6}\n", s.seat, s.win_rate, s.ci_halfwidth);
            out += &format!("{},avg_score,{:.6},\n", s.seat, s.avg_score);
        }
        out
    }
}

impl fmt::Display for SeatStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "matches {}  draws {}  forfeits {}", self.matches, self.draws, self.forfeits)?;
        writeln!(f, "seat  wins      win rate            avg score")?;
        for s in &self.seats {
            writeln!(
                f,
                "{:>4}  {:>8}  {:>6.2}% ± {:<6.2}%  {:>+9.3}",
                s.seat + 1,
                s.wins,
                100.0 * s.win_rate,
                100.0 * s.ci_halfwidth,
                s.avg_score
            )?;
        }
        write!(
            f,
            "first-mover gap (seat 1 - seat 4): {:+.2} pp ± {:.2} pp  (reference {:.2} pp)",
            100.0 * self.first_mover_gap,
            100.0 * self.first_mover_gap_ci,
            REFERENCE_GAP_PP
        )
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, SimError> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| SimError::Pool(e.to_string()))
}

/// Runs `jobs` matches, handing records to `sink` in index order.
fn run_indexed(
    jobs: usize,
    workers: usize,
    play: impl Fn(usize) -> Result<MatchRecord, SimError> + Sync,
    mut sink: impl FnMut(usize, MatchRecord),
) -> Result<(), SimError> {
    let pool = pool(workers)?;
    let mut start = 0;
    while start < jobs {
        let end = (start + CHUNK).min(jobs);
        let batch: Vec<Result<MatchRecord, SimError>> = pool.install(|| (start..end).into_par_iter().map(&play).collect());
        for (i, r) in (start..end).zip(batch) {
            sink(i, r?);
        }
        start = end;
    }
    Ok(())
}

fn seat_agents(handles: [&AgentHandle; 4], match_seed: u64, ruleset: &Arc<RuleSet>) -> [Box<dyn Agent>; 4] {
    std::array::from_fn(|seat| handles[seat].build(split(match_seed, 1 + seat as u64), ruleset))
}

/// Seed of the wall for match (or round) `index`.
pub fn match_seed(seed: u64, index: u64) -> u64 {
    split(seed, index)
}

fn play_one(
    opts: &RunOptions,
    match_id: String,
    seed: u64,
    handles: [&AgentHandle; 4],
) -> Result<MatchRecord, SimError> {
    let config = MatchConfig { match_id, seed, ruleset: opts.ruleset.clone(), forfeit_penalty: opts.forfeit_penalty };
    let mut agents = seat_agents(handles, seed, &opts.ruleset);
    Ok(run_match(&config, build_wall(seed, opts.flowers), &mut agents)?)
}

/// `n` matches of four copies of `agent` on fresh walls.
pub fn run_selfplay(
    agent: &AgentHandle,
    n: usize,
    seed: u64,
    opts: &RunOptions,
    mut sink: impl FnMut(&MatchRecord),
) -> Result<SeatStats, SimError> {
    let mut tally = Tally::default();
    run_indexed(
        n,
        opts.workers,
        |i| play_one(opts, format!("{}-{i}", opts.match_prefix), match_seed(seed, i as u64), [agent; 4]),
        |_, r| {
            tally.add(&r);
            sink(&r);
        },
    )?;
    Ok(SeatStats::from_tally(&tally))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentLine {
    pub id: String,
    pub matches: u64,
    pub wins: u64,
    pub score_sum: i64,
    pub avg_score: f64,
    /// Average with the compensation of the seat played added, when supplied.
    pub compensated_avg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TournamentReport {
    pub format: String,
    pub rounds: usize,
    pub matches: u64,
    pub seed: u64,
    pub agents: Vec<AgentLine>,
    pub seat_stats: SeatStats,
}

impl TournamentReport {
    pub fn averages(&self) -> Vec<f64> {
        self.agents.iter().map(|a| a.avg_score).collect()
    }

    /// Agent ids ordered by average, best first; compensated if available.
    pub fn ranking(&self, compensated: bool) -> Vec<String> {
        let mut v: Vec<(f64, &str)> = self
            .agents
            .iter()
            .map(|a| (if compensated { a.compensated_avg.unwrap_or(a.avg_score) } else { a.avg_score }, a.id.as_str()))
            .collect();
        v.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
        v.into_iter().map(|(_, id)| id.to_string()).collect()
    }
}

impl fmt::Display for TournamentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} format, {} rounds, {} matches, seed {}", self.format, self.rounds, self.matches, self.seed)?;
        writeln!(f, "agent                 matches   wins   avg score   compensated")?;
        for a in &self.agents {
            let comp = a.compensated_avg.map_or("-".to_string(), |c| format!("{c:+.3}"));
            writeln!(f, "{:<20}  {:>7}  {:>5}   {:>+9.3}   {:>11}", a.id, a.matches, a.wins, a.avg_score, comp)?;
        }
        write!(f, "{}", self.seat_stats)
    }
}

/// All 24 seatings in lexicographic order; entry `p[seat]` is an agent index.
pub fn permutations() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    if (0..4).all(|x| p.contains(&x)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

fn check_distinct(agents: &[AgentHandle; 4]) -> Result<(), SimError> {
    let ids: Vec<String> = agents.iter().map(|a| a.id.clone()).collect();
    for i in 0..4 {
        if ids[..i].contains(&ids[i]) {
            return Err(SimError::DuplicateAgents(ids));
        }
    }
    Ok(())
}

fn agent_lines(agents: &[AgentHandle; 4], per: &[(u64, u64, i64, f64)]) -> Vec<AgentLine> {
    agents
        .iter()
        .zip(per)
        .map(|(a, &(matches, wins, sum, comp))| AgentLine {
            id: a.id.clone(),
            matches,
            wins,
            score_sum: sum,
            avg_score: if matches == 0 { 0.0 } else { sum as f64 / matches as f64 },
            compensated_avg: (!comp.is_nan() && matches > 0).then(|| comp / matches as f64),
        })
        .collect()
}

/// Each round deals one wall and plays it under all 24 seatings.
/// Agent seeds depend on the round and seat only, so identical agents
/// are interchangeable.
pub fn run_duplicate(
    agents: &[AgentHandle; 4],
    rounds: usize,
    seed: u64,
    opts: &RunOptions,
    mut sink: impl FnMut(&MatchRecord),
) -> Result<TournamentReport, SimError> {
    check_distinct(agents)?;
    let perms = permutations();
    let mut per = [(0u64, 0u64, 0i64, f64::NAN); 4];
    let mut tally = Tally::default();
    run_indexed(
        rounds * 24,
        opts.workers,
        |i| {
            let (round, p) = (i / 24, perms[i % 24]);
            let handles = p.map(|a| &agents[a]);
            play_one(opts, format!("{}-r{round}-p{}", opts.match_prefix, i % 24), match_seed(seed, round as u64), handles)
        },
        |i, r| {
            let p = perms[i % 24];
            for seat in 0..4 {
                let e = &mut per[p[seat]];
                e.0 += 1;
                e.1 += (r.result.winner == Some(seat)) as u64;
                e.2 += r.result.scores[seat] as i64;
            }
            tally.add(&r);
            sink(&r);
        },
    )?;
    Ok(TournamentReport {
        format: "duplicate".into(),
        rounds,
        matches: tally.matches,
        seed,
        agents: agent_lines(agents, &per),
        seat_stats: SeatStats::from_tally(&tally),
    })
}

/// Fixed seating for every match; `seating[seat]` is an agent index.
/// With `compensation`, each agent's average also gets the vector entry of
/// its seat added.
pub fn run_fixed_seat(
    agents: &[AgentHandle; 4],
    seating: [usize; 4],
    rounds: usize,
    seed: u64,
    compensation: Option<CompensationVector>,
    opts: &RunOptions,
    mut sink: impl FnMut(&MatchRecord),
) -> Result<TournamentReport, SimError> {
    if !(0..4).all(|a| seating.contains(&a)) {
        return Err(SimError::Seating(seating));
    }
    let handles = seating.map(|a| &agents[a]);
    let mut tally = Tally::default();
    run_indexed(
        rounds,
        opts.workers,
        |i| play_one(opts, format!("{}-f{i}", opts.match_prefix), match_seed(seed, i as u64), handles),
        |_, r| {
            tally.add(&r);
            sink(&r);
        },
    )?;
    let comp = compensation.map(|c| c.points());
    let mut per = [(0u64, 0u64, 0i64, f64::NAN); 4];
    for seat in 0..4 {
        let a = seating[seat];
        per[a] = (
            tally.matches,
            tally.wins[seat],
            tally.score_sum[seat],
            comp.map_or(f64::NAN, |c| tally.score_sum[seat] as f64 + c[seat] * tally.matches as f64),
        );
    }
    Ok(TournamentReport {
        format: "fixed-seat".into(),
        rounds,
        matches: tally.matches,
        seed,
        agents: agent_lines(agents, &per),
        seat_stats: SeatStats::from_tally(&tally),
    })
}

/// Adds `compensation` to per-seat averages.
pub fn compensate(averages: [f64; 4], compensation: &CompensationVector) -> [f64; 4] {
    let c = compensation.points();
    std::array::from_fn(|s| averages[s] + c[s])
}
