//! The `mcr` command line.
//!
//! Any flag may also come from a TOML file given with `--config`. Top-level
//! keys apply to every subcommand that has a flag of that name; keys inside
//! a `[subcommand]` table apply to that subcommand only. Flags on the
//! command line win over the file, and `MBL_SEED` wins over both.

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::Serialize;

use crate::agents::{AgentHandle, AgentPolicy, Scripted};
use crate::balance::{
    adapt_points, derive_compensation, enumerate_pattern_counts, EnumFlags, FrequencyTable,
    LUCK_EXEMPT,
};
use crate::engine::{run_match, MatchConfig, MatchRecord, DEFAULT_FORFEIT_PENALTY};
use crate::ruleset::{CompensationVector, RuleSet};
use crate::scoring::{best_fan, settle, FanId, FanTable, WinBy, WinContext};
use crate::service::{JsonlStore, Lobby, MemoryStore, RecordStore, ServiceConfig};
use crate::simulator::{run_duplicate, run_fixed_seat, run_selfplay, RunOptions, SeatStats, Tally};
use crate::tiles::{parse_kinds, Hand, Meld, MeldType, Tile, TileKind, Wall};

#[derive(Debug, Parser, Serialize)]
#[command(name = "mcr", version, about = "Mahjong Competition Rules engine, self-play and balance tools")]
pub struct Cli {
    /// TOML file supplying values for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Self-play of four copies of one agent.
    Simulate(SimulateArgs),
    /// Duplicate tournament: every wall under all 24 seatings.
    Duplicate(TournamentArgs),
    /// Fixed-seat tournament, optionally with seat compensation.
    FixedSeat(FixedSeatArgs),
    /// Pattern frequencies and seat statistics from match logs.
    Analyze(AnalyzeArgs),
    /// Adapts pattern points from a frequency table.
    AdaptPoints(AdaptArgs),
    /// Seat compensation from seat statistics or match logs.
    DeriveCompensation(CompensationArgs),
    /// Exact counts of winning hands showing given patterns.
    Enumerate(EnumerateArgs),
    /// Scores one winning hand.
    ScoreHand(ScoreHandArgs),
    /// Runs the lobby, live play socket and replay server.
    Serve(ServeArgs),
    /// Prints or verifies a recorded match.
    Replay(ReplayArgs),
    /// Runs a built-in agent over the line protocol on stdin/stdout.
    Agent(AgentArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// classic, revised, revised-points or classic-compensated.
    #[arg(long, default_value = "classic")]
    pub ruleset: String,
    /// Match workers; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Play with the eight flower tiles.
    #[arg(long)]
    pub flowers: bool,
    #[arg(long, default_value_t = DEFAULT_FORFEIT_PENALTY)]
    pub forfeit_penalty: i32,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// random, greedy, greedy:<epsilon> or external:<command>.
    #[arg(long, default_value = "greedy")]
    pub agent: String,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[command(flatten)]
    pub run: RunArgs,
    /// Directory for stats.json, seat_stats.csv and matches.jsonl.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TournamentArgs {
    /// Four agent specs, optionally named as `id=spec`.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "a=greedy,b=greedy:0.1,c=greedy:0.3,d=random")]
    pub agents: Vec<String>,
    #[arg(long, default_value_t = 10)]
    pub rounds: usize,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FixedSeatArgs {
    #[command(flatten)]
    pub tournament: TournamentArgs,
    /// Agent index for each seat.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
    pub seating: Vec<usize>,
    /// Points added per seat, e.g. `-1.0,-0.4,0.3,1.1`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub compensation: Option<Vec<f64>>,
    /// Use the ruleset's own compensation.
    #[arg(long, conflicts_with = "compensation")]
    pub compensate: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeArgs {
    /// Match logs in JSON Lines.
    #[arg(long, required = true, num_args = 1..)]
    pub log: Vec<PathBuf>,
    /// Count every occurrence instead of once per match.
    #[arg(long)]
    pub multiplicity: bool,
    /// Table used for pattern names.
    #[arg(long, default_value = "classic")]
    pub table: String,
    /// Directory for freq.csv, seat_stats.json and seat_stats.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AdaptArgs {
    /// Frequency CSV with columns pattern_id,name,count,rank.
    #[arg(long)]
    pub freq: PathBuf,
    /// A ruleset id or a pattern table CSV.
    #[arg(long, default_value = "default")]
    pub table: String,
    /// Patterns kept out of the raise; defaults to the luck patterns.
    #[arg(long, value_delimiter = ',')]
    pub exempt: Vec<String>,
    #[arg(long, conflicts_with = "exempt")]
    pub no_exempt: bool,
    /// Where to write the adapted table CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompensationArgs {
    /// stats.json written by `simulate`.
    #[arg(long, conflicts_with = "log", required_unless_present = "log")]
    pub stats: Option<PathBuf>,
    #[arg(long, num_args = 1..)]
    pub log: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    pub resolution: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EnumerateArgs {
    /// Pattern names; defaults to Seven Pairs, Full Flush and Pure Triple Chow.
    #[arg(long = "pattern", value_delimiter = ',')]
    pub patterns: Vec<String>,
    /// Let Seven Pairs use four copies of one kind.
    #[arg(long)]
    pub loose_pairs: bool,
    #[arg(long)]
    pub no_honors: bool,
    /// Suits in play, any of W, B and T.
    #[arg(long, default_value = "WBT")]
    pub suits: String,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScoreHandArgs {
    /// Concealed tiles; the last one is the winning tile unless --win-tile is given.
    #[arg(long)]
    pub tiles: String,
    /// Exposed sets such as `pung:J1J1J1`, `chow:W1W2W3`, `kong:F1F1F1F1` or `concealed-kong:B5B5B5B5`.
    #[arg(long = "meld")]
    pub melds: Vec<String>,
    #[arg(long)]
    pub win_tile: Option<String>,
    /// selfdraw, discard, rob-kong or replacement.
    #[arg(long, default_value = "selfdraw")]
    pub win_by: String,
    /// 1 = East .. 4 = North.
    #[arg(long, default_value_t = 1)]
    pub seat_wind: u8,
    #[arg(long, default_value_t = 1)]
    pub prevalent_wind: u8,
    /// The win involves the last tile of the wall.
    #[arg(long)]
    pub last_tile: bool,
    #[arg(long, default_value = "classic")]
    pub ruleset: String,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    /// Directory for the record store; in memory when absent.
    #[arg(long)]
    pub store: Option<PathBuf>,
    /// Client bundle served at `/`.
    #[arg(long = "static")]
    pub static_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 30_000)]
    pub act_timeout_ms: u64,
    #[arg(long, default_value_t = 10_000)]
    pub claim_timeout_ms: u64,
    #[arg(long, default_value_t = 60_000)]
    pub grace_ms: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReplayArgs {
    /// Match log in JSON Lines.
    #[arg(long)]
    pub log: PathBuf,
    /// Defaults to the first match in the log.
    #[arg(long)]
    pub match_id: Option<String>,
    /// Re-run the match from its wall and decisions and compare.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AgentArgs {
    #[arg(long, default_value = "greedy")]
    pub policy: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "classic")]
    pub ruleset: String,
}

/// Bad flags or flag values; exits with status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct FlagError(pub String);

fn flag(msg: impl Into<String>) -> anyhow::Error {
    FlagError(msg.into()).into()
}

/// Entry point of the `mcr` binary.
pub fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match parse(args, std::env::var("MBL_SEED").ok()) {
        Ok(c) => c,
        Err(e) => return report(e),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}

fn report(e: anyhow::Error) -> ExitCode {
    if let Some(c) = e.downcast_ref::<clap::Error>() {
        let _ = c.print();
        return ExitCode::from(if c.use_stderr() { 2 } else { 0 });
    }
    eprintln!("mcr: {e:#}");
    ExitCode::from(if e.is::<FlagError>() { 2 } else { 1 })
}

/// Parses `args` after merging the config file and the seed override.
pub fn parse(args: Vec<String>, env_seed: Option<String>) -> Result<Cli> {
    let cmd = Cli::command().mut_subcommands(|s| s.args_override_self(true));
    let (config, sub_at) = locate(&args);
    let mut args = args;
    if let Some(sub_at) = sub_at {
        let name = args[sub_at].clone();
        let Some(sub) = cmd.find_subcommand(&name) else {
            return Ok(Cli::from_arg_matches(&cmd.try_get_matches_from(args)?)?);
        };
        let known: Vec<String> = sub.get_arguments().filter_map(|a| a.get_long().map(String::from)).collect();
        let shape = |long: &str| {
            let arg = sub.get_arguments().find(|a| a.get_long() == Some(long)).expect("known flag");
            (arg.get_action().takes_values(), arg.get_value_delimiter().is_some())
        };
        let mut injected = Vec::new();
        if let Some(path) = config {
            let text = fs::read_to_string(&path).map_err(|e| flag(format!("config {path}: {e}")))?;
            let table: toml::Table = text.parse().map_err(|e| flag(format!("config {path}: {e}")))?;
            let given = &args[sub_at + 1..];
            let mut push = |key: &str, value: &toml::Value, strict: bool| -> Result<()> {
                let long = key.replace('_', "-");
                if !known.contains(&long) {
                    return if strict { Err(flag(format!("config key `{key}` is not a flag of `{name}`"))) } else { Ok(()) };
                }
                if given.iter().any(|a| a == &format!("--{long}") || a.starts_with(&format!("--{long}="))) {
                    return Ok(());
                }
                config_args(&long, value, shape(&long), &mut injected)
            };
            for (key, value) in &table {
                if !value.is_table() {
                    push(key, value, false)?;
                }
            }
            if let Some(toml::Value::Table(own)) = table.get(&name) {
                for (key, value) in own {
                    push(key, value, true)?;
                }
            }
        }
        if let Some(seed) = env_seed.filter(|_| known.iter().any(|k| k == "seed")) {
            seed.parse::<u64>().map_err(|_| flag(format!("MBL_SEED `{seed}` is not an unsigned integer")))?;
            args.extend(["--seed".to_string(), seed]);
        }
        args.splice(sub_at + 1..sub_at + 1, injected);
    }
    let matches = cmd.try_get_matches_from(args)?;
    Ok(Cli::from_arg_matches(&matches)?)
}

/// The `--config` value and the position of the subcommand name.
fn locate(args: &[String]) -> (Option<String>, Option<usize>) {
    let mut config = None;
    let mut sub = None;
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        if a == "--config" {
            config = args.get(i + 1).cloned();
            i += 2;
            continue;
        }
        if let Some(v) = a.strip_prefix("--config=") {
            config = Some(v.to_string());
        } else if sub.is_none() && !a.starts_with('-') {
            sub = Some(i);
        }
        i += 1;
    }
    (config, sub)
}

fn config_args(long: &str, value: &toml::Value, (takes_value, delimited): (bool, bool), out: &mut Vec<String>) -> Result<()> {
    let scalar = |v: &toml::Value| -> Result<String> {
        Ok(match v {
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            toml::Value::Boolean(b) => b.to_string(),
            other => return Err(flag(format!("config key `{long}`: unsupported value {other}"))),
        })
    };
    match (value, takes_value) {
        (toml::Value::Boolean(b), false) => {
            if *b {
                out.push(format!("--{long}"));
            }
        }
        (_, false) => return Err(flag(format!("config key `{long}` is a switch; use true or false"))),
        (toml::Value::Array(items), true) if delimited => {
            out.push(format!("--{long}={}", items.iter().map(scalar).collect::<Result<Vec<_>>>()?.join(",")));
        }
        (toml::Value::Array(items), true) => {
            for v in items {
                out.push(format!("--{long}={}", scalar(v)?));
            }
        }
        (v, true) => out.push(format!("--{long}={}", scalar(v)?)),
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    let provenance = serde_json::to_value(&cli.command)?;
    match cli.command {
        Command::Simulate(a) => simulate(a, provenance),
        Command::Duplicate(a) => duplicate(a, provenance),
        Command::FixedSeat(a) => fixed_seat(a, provenance),
        Command::Analyze(a) => analyze(a),
        Command::AdaptPoints(a) => adapt(a),
        Command::DeriveCompensation(a) => compensation(a),
        Command::Enumerate(a) => enumerate(a),
        Command::ScoreHand(a) => score_hand(a),
        Command::Serve(a) => serve(a),
        Command::Replay(a) => replay(a),
        Command::Agent(a) => agent(a),
    }
}

fn ruleset(id: &str) -> Result<Arc<RuleSet>> {
    RuleSet::by_id(id).map(Arc::new).map_err(|_| flag(format!("unknown ruleset `{id}` (known: {})", RuleSet::KNOWN.join(", "))))
}

fn run_options(run: &RunArgs) -> Result<RunOptions> {
    let mut opts = RunOptions::new(ruleset(&run.ruleset)?).workers(run.workers);
    opts.flowers = run.flowers;
    opts.forfeit_penalty = run.forfeit_penalty;
    Ok(opts)
}

fn parse_agents(specs: &[String]) -> Result<[AgentHandle; 4]> {
    if specs.len() != 4 {
        return Err(flag(format!("need four agents, got {}", specs.len())));
    }
    let mut out = Vec::with_capacity(4);
    for (i, s) in specs.iter().enumerate() {
        let (id, spec) = s.split_once('=').map_or((s.clone(), s.as_str()), |(id, spec)| (id.to_string(), spec));
        let id = if specs[..i].iter().any(|p| p == s) { format!("{id}#{i}") } else { id };
        out.push(AgentHandle::new(id, AgentPolicy::parse(spec).map_err(flag)?));
    }
    Ok(out.try_into().expect("four agents"))
}

/// Writes matches to `matches.jsonl` under `out` as they finish.
struct LogSink {
    writer: Option<BufWriter<File>>,
    error: Option<io::Error>,
}

impl LogSink {
    fn new(out: Option<&Path>) -> Result<LogSink> {
        let writer = match out {
            Some(dir) => {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                Some(BufWriter::new(File::create(dir.join("matches.jsonl"))?))
            }
            None => None,
        };
        Ok(LogSink { writer, error: None })
    }

    fn push(&mut self, record: &MatchRecord) {
        if let (Some(w), None) = (&mut self.writer, &self.error) {
            if let Err(e) = writeln!(w, "{}", record.to_json_line()) {
                self.error = Some(e);
            }
        }
    }

    fn finish(self) -> Result<()> {
        if let Some(e) = self.error {
            return Err(e.into());
        }
        if let Some(mut w) = self.writer {
            w.flush()?;
        }
        Ok(())
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn simulate(a: SimulateArgs, provenance: serde_json::Value) -> Result<()> {
    let opts = run_options(&a.run)?;
    let handle = AgentHandle::new(&a.agent, AgentPolicy::parse(&a.agent).map_err(flag)?);
    if a.n == 0 {
        return Err(flag("--n must be at least 1"));
    }
    let mut sink = LogSink::new(a.out.as_deref())?;
    let stats = run_selfplay(&handle, a.n, a.run.seed, &opts, |r| sink.push(r))?;
    sink.finish()?;
    println!("{stats}");
    if let Some(dir) = &a.out {
        write_json(&dir.join("stats.json"), &serde_json::json!({ "config": provenance, "stats": stats }))?;
        fs::write(dir.join("seat_stats.csv"), stats.to_csv())?;
    }
    Ok(())
}

fn duplicate(a: TournamentArgs, provenance: serde_json::Value) -> Result<()> {
    let opts = run_options(&a.run)?;
    let agents = parse_agents(&a.agents)?;
    let mut sink = LogSink::new(a.out.as_deref())?;
    let report = run_duplicate(&agents, a.rounds, a.run.seed, &opts, |r| sink.push(r))?;
    sink.finish()?;
    println!("{report}");
    if let Some(dir) = &a.out {
        write_json(&dir.join("report.json"), &serde_json::json!({ "config": provenance, "report": report }))?;
    }
    Ok(())
}

fn fixed_seat(a: FixedSeatArgs, provenance: serde_json::Value) -> Result<()> {
    let t = &a.tournament;
    let opts = run_options(&t.run)?;
    let agents = parse_agents(&t.agents)?;
    let seating: [usize; 4] =
        a.seating.clone().try_into().map_err(|_| flag("--seating needs four agent indices"))?;
    let compensation = match (&a.compensation, a.compensate) {
        (Some(v), _) => {
            let p: [f64; 4] = v.clone().try_into().map_err(|_| flag("--compensation needs four values"))?;
            Some(CompensationVector::from_points(p).map_err(flag)?)
        }
        (None, true) => Some(opts.ruleset.compensation.ok_or_else(|| flag(format!("ruleset `{}` has no compensation", t.run.ruleset)))?),
        (None, false) => None,
    };
    let mut sink = LogSink::new(t.out.as_deref())?;
    let report = run_fixed_seat(&agents, seating, t.rounds, t.run.seed, compensation, &opts, |r| sink.push(r))?;
    sink.finish()?;
    println!("{report}");
    println!("ranking (raw):         {}", report.ranking(false).join(" > "));
    if compensation.is_some() {
        println!("ranking (compensated): {}", report.ranking(true).join(" > "));
    }
    if let Some(dir) = &t.out {
        write_json(&dir.join("report.json"), &serde_json::json!({ "config": provenance, "report": report }))?;
    }
    Ok(())
}

/// Streams records from JSON Lines files.
pub fn read_records(paths: &[PathBuf], mut visit: impl FnMut(MatchRecord) -> Result<()>) -> Result<()> {
    for path in paths {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record = serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), i + 1))?;
            visit(record)?;
        }
    }
    Ok(())
}

fn table_named(spec: &str) -> Result<FanTable> {
    match RuleSet::by_id(spec) {
        Ok(r) => Ok(r.table),
        Err(_) if Path::new(spec).exists() => FanTable::load(spec).map_err(|e| anyhow!("{spec}: {e}")),
        Err(_) => Err(flag(format!("`{spec}` is neither a ruleset nor a table file"))),
    }
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let table = table_named(&a.table)?;
    let mut freq = FrequencyTable::default();
    let mut tally = Tally::default();
    read_records(&a.log, |r| {
        tally.add(&r);
        freq.add_record(&r, a.multiplicity)?;
        Ok(())
    })?;
    let stats = SeatStats::from_tally(&tally);
    println!("{stats}");
    println!("\nmost frequent patterns over {} matches:", freq.matches);
    let ranks = freq.ranks();
    let mut order: Vec<(usize, FanId)> = ranks.iter().map(|(&id, &r)| (r, id)).collect();
    order.sort();
    for (rank, id) in order.into_iter().take(20).filter(|&(_, id)| freq.get(id) > 0) {
        println!("{rank:>3}  {:<32} {:>9}", table.name(id), freq.get(id));
    }
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("freq.csv"), freq.to_csv(&table))?;
        write_json(&dir.join("seat_stats.json"), &stats)?;
        fs::write(dir.join("seat_stats.csv"), stats.to_csv())?;
    }
    Ok(())
}

fn pattern_ids(names: &[String], table: &FanTable) -> Result<Vec<FanId>> {
    names
        .iter()
        .map(|n| table.id_by_name(n.trim()).ok_or_else(|| flag(format!("unknown pattern `{n}`"))))
        .collect()
}

fn adapt(a: AdaptArgs) -> Result<()> {
    let table = table_named(&a.table)?;
    let exempt = match (a.no_exempt, a.exempt.is_empty()) {
        (true, _) => vec![],
        (false, true) => LUCK_EXEMPT.to_vec(),
        (false, false) => pattern_ids(&a.exempt, &table)?,
    };
    let text = fs::read_to_string(&a.freq).with_context(|| format!("reading {}", a.freq.display()))?;
    let freq = FrequencyTable::from_csv(&text, 0)?;
    let result = adapt_points(&freq, &table, &exempt)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&result)?);
    } else {
        println!("{result}");
    }
    if let Some(out) = &a.out {
        fs::write(out, result.to_table(&table)?.to_csv())?;
    }
    Ok(())
}

fn compensation(a: CompensationArgs) -> Result<()> {
    if !(a.resolution > 0.0) {
        return Err(flag("--resolution must be positive"));
    }
    let stats = match &a.stats {
        Some(path) => {
            let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
            serde_json::from_value::<SeatStats>(v.get("stats").cloned().unwrap_or(v))
                .with_context(|| format!("{} holds no seat statistics", path.display()))?
        }
        None => {
            let mut tally = Tally::default();
            read_records(&a.log, |r| {
                tally.add(&r);
                Ok(())
            })?;
            SeatStats::from_tally(&tally)
        }
    };
    let vector = derive_compensation(&stats, a.resolution)?;
    let avg = stats.averages();
    println!("matches {}", stats.matches);
    for seat in 0..4 {
        println!("seat {}  avg {:+.4}  compensation {:+.1}", seat + 1, avg[seat], vector.points()[seat]);
    }
    println!("vector {vector}");
    Ok(())
}

fn enumerate(a: EnumerateArgs) -> Result<()> {
    let table = FanTable::classic().with_strict_seven_pairs(!a.loose_pairs);
    let names: Vec<String> = if a.patterns.is_empty() {
        ["Seven Pairs", "Full Flush", "Pure Triple Chow"].map(String::from).to_vec()
    } else {
        a.patterns.clone()
    };
    let ids = pattern_ids(&names, &table)?;
    let mut suits = 0u8;
    for c in a.suits.chars() {
        suits |= match c {
            'W' | 'w' => 1,
            'B' | 'b' => 2,
            'T' | 't' => 4,
            _ => return Err(flag(format!("unknown suit `{c}` in --suits"))),
        };
    }
    let flags = EnumFlags { strict_seven_pairs: !a.loose_pairs, honors: !a.no_honors, suits, kongs: false };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.workers).build()?;
    let counts = pool.install(|| enumerate_pattern_counts(&ids, &flags, &table))?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&counts)?);
        return Ok(());
    }
    println!("{:<28} {:>20}  magnitude", "pattern", "exact count");
    for c in &counts {
        let m = c.magnitude.map_or("-".to_string(), |m| m.to_string());
        println!("{:<28} {:>20}  {m}", c.name, c.exact_count);
    }
    Ok(())
}

fn parse_meld(spec: &str, next_copy: &mut [u8; 64]) -> Result<Meld> {
    let (kind, tiles) = spec.split_once(':').ok_or_else(|| flag(format!("meld `{spec}` needs a type, e.g. pung:J1J1J1")))?;
    let meld_type = match kind {
        "chow" => MeldType::Chow,
        "pung" => MeldType::Pung,
        "kong" => MeldType::MeldedKong,
        "concealed-kong" => MeldType::ConcealedKong,
        "added-kong" => MeldType::AddedKong,
        _ => return Err(flag(format!("unknown meld type `{kind}`"))),
    };
    let kinds = parse_kinds(tiles).map_err(|e| flag(e.to_string()))?;
    let tiles = kinds.iter().map(|&k| take_copy(k, next_copy)).collect::<Result<Vec<Tile>>>()?;
    let from = (meld_type != MeldType::ConcealedKong).then_some(1);
    let claimed = from.map(|_| tiles[0]);
    Meld::new(meld_type, tiles, from, claimed).map_err(|e| flag(e.to_string()))
}

fn take_copy(k: TileKind, next_copy: &mut [u8; 64]) -> Result<Tile> {
    let c = &mut next_copy[k.index()];
    if *c >= 4 {
        return Err(flag(format!("more than four {k}")));
    }
    *c += 1;
    Ok(Tile::new(k, *c - 1))
}

/// Hand, winning tile and context described by `score-hand` flags.
pub fn hand_from_flags(a: &ScoreHandArgs) -> Result<(Hand, TileKind, WinContext)> {
    let mut next_copy = [0u8; 64];
    let melds = a.melds.iter().map(|m| parse_meld(m, &mut next_copy)).collect::<Result<Vec<_>>>()?;
    let mut kinds = parse_kinds(&a.tiles).map_err(|e| flag(e.to_string()))?;
    let win = match &a.win_tile {
        Some(w) => w.parse::<TileKind>().map_err(|e| flag(e.to_string()))?,
        None => kinds.pop().ok_or_else(|| flag("--tiles is empty"))?,
    };
    let concealed = kinds.iter().map(|&k| take_copy(k, &mut next_copy)).collect::<Result<Vec<_>>>()?;
    take_copy(win, &mut next_copy)?;
    let hand = Hand { concealed, melds, flowers: vec![] };
    if hand.effective_len() != 13 {
        return Err(flag(format!("hand has {} tiles before the winning tile; need 13", hand.effective_len())));
    }
    let win_by = match a.win_by.as_str() {
        "selfdraw" | "self-draw" => WinBy::SelfDraw,
        "discard" => WinBy::Discard,
        "rob-kong" | "robkong" => WinBy::RobKong,
        "replacement" => WinBy::ReplacementTile,
        other => return Err(flag(format!("unknown --win-by `{other}`"))),
    };
    if !(1..=4).contains(&a.seat_wind) || !(1..=4).contains(&a.prevalent_wind) {
        return Err(flag("winds are 1 (East) to 4 (North)"));
    }
    let mut ctx = WinContext::simple(win_by, win);
    ctx.seat_wind = a.seat_wind;
    ctx.prevalent_wind = a.prevalent_wind;
    ctx.last_wall_tile = a.last_tile;
    if win_by == WinBy::RobKong {
        ctx.discarder = Some(1);
    }
    Ok((hand, win, ctx))
}

fn score_hand(a: ScoreHandArgs) -> Result<()> {
    let rules = ruleset(&a.ruleset)?;
    let (hand, win, ctx) = hand_from_flags(&a)?;
    let result = best_fan(&hand, win, &ctx, &rules.table);
    let settlement = if result.win { settle(result.total, ctx.win_by, 0, ctx.discarder).ok() } else { None };
    if a.json {
        let fans: Vec<_> = result
            .fans
            .iter()
            .map(|f| serde_json::json!({ "pattern_id": f.pattern_id, "name": rules.table.name(f.pattern_id), "points": f.points, "multiplicity": f.multiplicity }))
            .collect();
        println!("{}", serde_json::json!({ "fans": fans, "total": result.total, "win": result.win, "scores": settlement }));
        return Ok(());
    }
    if result.fans.is_empty() {
        bail!("not a winning hand");
    }
    for f in &result.fans {
        let times = if f.multiplicity > 1 { format!(" x{}", f.multiplicity) } else { String::new() };
        println!("{:<32} {:>3}{times}", rules.table.name(f.pattern_id), f.points);
    }
    println!("total {}", result.total);
    match settlement {
        Some(s) => println!("scores (winner seat 1) {s:?}"),
        None => println!("below the {}-point minimum; cannot be declared", rules.win_threshold),
    }
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let store: Arc<dyn RecordStore> = match &a.store {
        Some(dir) => Arc::new(JsonlStore::open(dir)?),
        None => Arc::new(MemoryStore::default()),
    };
    if let Some(dir) = &a.static_dir {
        if !dir.is_dir() {
            return Err(flag(format!("--static {} is not a directory", dir.display())));
        }
    }
    let config = ServiceConfig {
        act_timeout_ms: a.act_timeout_ms,
        claim_timeout_ms: a.claim_timeout_ms,
        takeover_grace_ms: a.grace_ms,
        seed: a.seed,
        static_dir: a.static_dir.clone(),
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let lobby = Lobby::new(config, store);
        eprintln!("listening on http://{}", a.addr);
        crate::service::serve(a.addr, lobby).await
    })?;
    Ok(())
}

fn replay(a: ReplayArgs) -> Result<()> {
    let mut found = None;
    read_records(std::slice::from_ref(&a.log), |r| {
        if found.is_none() && a.match_id.as_ref().is_none_or(|id| *id == r.match_id) {
            found = Some(r);
        }
        Ok(())
    })?;
    let record = found.ok_or_else(|| anyhow!("no matching record in {}", a.log.display()))?;
    println!("{} ruleset {} seed {}", record.match_id, record.ruleset_id, record.seed);
    for (i, e) in record.events.iter().enumerate() {
        let tiles: Vec<String> = e.tiles.iter().map(Tile::to_string).collect();
        println!("{i:>4}  seat {}  {:<20} {}", e.seat + 1, e.action.to_string(), tiles.join(" "));
    }
    let r = &record.result;
    match r.winner {
        Some(w) => println!("seat {} wins by {:?} for {} points", w + 1, r.win_by.expect("winner has a method"), r.fan_total),
        None if r.forfeit.is_some() => println!("seat {} forfeits", r.forfeit.unwrap_or_default() + 1),
        None => println!("draw"),
    }
    for f in &r.fan_list {
        println!("  {:<32} {:>3}", f.name, f.points);
    }
    println!("scores {:?}", r.scores);
    if let Some(c) = r.compensated_scores {
        println!("compensated {c:?}");
    }
    if a.verify {
        let config = MatchConfig::new(record.match_id.clone(), record.seed, ruleset(&record.ruleset_id)?);
        let mut agents = Scripted::from_record(&record);
        let again = run_match(&config, Wall::from_tiles(record.wall.clone()), &mut agents)?;
        if again.to_json_line() != record.to_json_line() {
            bail!("replay diverges from the record");
        }
        println!("verified: replay reproduces the record");
    }
    Ok(())
}

fn agent(a: AgentArgs) -> Result<()> {
    let rules = ruleset(&a.ruleset)?;
    let handle = AgentHandle::new("agent", AgentPolicy::parse(&a.policy).map_err(flag)?);
    let mut current: Option<(String, usize, Box<dyn crate::agents::Agent>)> = None;
    let stdin = io::stdin();
    let mut stdout = io::stdout().lock();
    for line in stdin.lock().lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let req: crate::agents::protocol::Request = serde_json::from_str(&line).context("bad request line")?;
        let fresh = current.as_ref().is_none_or(|(m, s, _)| *m != req.match_id || *s != req.seat);
        if fresh {
            let seed = crate::rng::split(a.seed, req.seat as u64);
            let mut built = handle.build(seed, &rules);
            built.begin_match(&req.match_id, req.seat);
            current = Some((req.match_id.clone(), req.seat, built));
        }
        let (_, _, bot) = current.as_mut().expect("agent built");
        let action = bot.act(&req.observation)?;
        writeln!(stdout, "{}", action.to_protocol())?;
        stdout.flush()?;
    }
    Ok(())
}
