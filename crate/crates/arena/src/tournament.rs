//! Round-robin schedules: every pair of agents plays every seed, each seed
//! repeated, each game mirrored. Matches run on a pool of worker threads.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use locm_core::agents::{self, BUILTIN_NAMES};
use locm_core::referee::{self, AgentSeat, MatchSetup, Seat};
use locm_core::rng::{derive, tag};
use locm_core::state::EndReason;
use locm_core::{CardSet, GeneratorParams, Policy, RulesetConfig};

use crate::runtime::{stderr_log_path, AgentProcess, Limits, ProcessSeat, SpawnError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgentSpec {
    Builtin(String),
    Command(String),
}

impl AgentSpec {
    /// Builtin names win; anything else is an external command line.
    pub fn parse(text: &str) -> AgentSpec {
        let t = text.trim();
        if BUILTIN_NAMES.contains(&t) {
            AgentSpec::Builtin(t.to_string())
        } else {
            AgentSpec::Command(t.to_string())
        }
    }

    pub fn text(&self) -> &str {
        match self {
            AgentSpec::Builtin(s) | AgentSpec::Command(s) => s,
        }
    }

    fn short_name(&self) -> String {
        match self {
            AgentSpec::Builtin(name) => name.clone(),
            AgentSpec::Command(cmd) => {
                let words = shlex::split(cmd).unwrap_or_default();
                let last = words.last().map(String::as_str).unwrap_or("agent");
                Path::new(last).file_name().map_or(last.to_string(), |f| f.to_string_lossy().into_owned())
            }
        }
    }
}

impl fmt::Display for AgentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.text())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    AFirst,
    BFirst,
}

#[derive(Clone, Debug)]
pub struct Schedule {
    pub id: String,
    pub master_seed: u64,
    pub agents: Vec<AgentSpec>,
    pub seeds: u32,
    pub repeats: u32,
    pub config: RulesetConfig,
    pub policy: Policy,
    pub card_set: Option<Arc<CardSet>>,
    pub generator: GeneratorParams,
}

impl Schedule {
    pub fn new(agents: Vec<AgentSpec>, seeds: u32, repeats: u32, config: RulesetConfig, master_seed: u64) -> Self {
        let mut s = Schedule {
            id: String::new(),
            master_seed,
            agents,
            seeds,
            repeats,
            config,
            policy: Policy::Lenient,
            card_set: None,
            generator: GeneratorParams::default(),
        };
        s.id = s.default_id();
        s
    }

    /// `v<version>-m<master>-<hash of the agent list and sizes>`.
    pub fn default_id(&self) -> String {
        let mut h = derive(self.master_seed, &[self.seeds as u64, self.repeats as u64]);
        for a in &self.agents {
            for b in a.text().bytes() {
                h = derive(h, &[b as u64]);
            }
            h = derive(h, &[u64::MAX]);
        }
        format!("v{}-m{}-{:08x}", self.config.version, self.master_seed, h as u32)
    }

    /// Display names, unique within the schedule.
    pub fn labels(&self) -> Vec<String> {
        let names: Vec<String> = self.agents.iter().map(AgentSpec::short_name).collect();
        names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let total = names.iter().filter(|m| *m == n).count();
                if total > 1 {
                    let k = names[..i].iter().filter(|m| *m == n).count() + 1;
                    format!("{n}#{k}")
                } else {
                    n.clone()
                }
            })
            .collect()
    }

    pub fn game_seed(&self, seed_index: u32) -> u64 {
        derive(self.master_seed, &[seed_index as u64, tag::GAME])
    }

    /// Stochastic agents get one stream per agent side, independent of seat,
    /// so both orientations of a mirrored pair see the same agent seeds.
    pub fn agent_seed(&self, spec: &MatchSpec, side: usize) -> u64 {
        derive(
            self.master_seed,
            &[spec.pair as u64, spec.seed_index as u64, spec.repeat as u64, side as u64, tag::AGENT],
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatchSpec {
    pub index: usize,
    pub pair: usize,
    pub a: usize,
    pub b: usize,
    pub seed_index: u32,
    pub repeat: u32,
    pub orientation: Orientation,
}

impl MatchSpec {
    pub fn match_id(&self) -> String {
        let o = match self.orientation {
            Orientation::AFirst => "ab",
            Orientation::BFirst => "ba",
        };
        format!("p{}-s{}-r{}-{o}", self.pair, self.seed_index, self.repeat)
    }

    /// Agent index in each seat.
    pub fn seats(&self) -> [usize; 2] {
        match self.orientation {
            Orientation::AFirst => [self.a, self.b],
            Orientation::BFirst => [self.b, self.a],
        }
    }
}

/// Pairs in index order, then seeds, repeats and the two orientations.
pub fn build_schedule(schedule: &Schedule) -> Vec<MatchSpec> {
    let n = schedule.agents.len();
    let mut out = Vec::new();
    let mut pair = 0;
    for a in 0..n {
        for b in a + 1..n {
            for seed_index in 0..schedule.seeds {
                for repeat in 0..schedule.repeats {
                    for orientation in [Orientation::AFirst, Orientation::BFirst] {
                        out.push(MatchSpec { index: out.len(), pair, a, b, seed_index, repeat, orientation });
                    }
                }
            }
            pair += 1;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Winner {
    A,
    B,
    Draw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub schedule_id: String,
    pub match_id: String,
    pub index: usize,
    pub agent_a: usize,
    pub agent_b: usize,
    pub name_a: String,
    pub name_b: String,
    pub seed_index: u32,
    pub seed: u64,
    pub repeat: u32,
    pub orientation: Orientation,
    pub winner: Winner,
    pub reason: EndReason,
    pub turns: u32,
    pub duration_ms: u64,
    /// Which agent forfeited, and why.
    pub forfeit: Option<(Winner, String)>,
    pub ignored: [u32; 2],
    pub memory_warnings: [u32; 2],
    /// Per agent (A, B): responses, mean and max response time in ms.
    pub timings: [TurnTimings; 2],
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TurnTimings {
    pub responses: u32,
    pub mean_ms: f64,
    pub max_ms: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum InfraError {
    #[error("match {match_id}: agent {agent:?} could not be started: {source}")]
    Spawn { match_id: String, agent: String, source: SpawnError },
    #[error("match {match_id}: unknown builtin agent {agent:?}")]
    UnknownAgent { match_id: String, agent: String },
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("schedule needs at least two agents")]
    TooFewAgents,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub workers: usize,
    /// Root for `<scheduleId>/<matchId>/transcript.jsonl`; no transcripts when unset.
    pub transcripts: Option<PathBuf>,
    /// Root for agent stderr logs; `LOCM_LOG_DIR` overrides it.
    pub logs: Option<PathBuf>,
    pub limits: Option<Limits>,
}

/// A seat backed by a builtin agent or an external process.
pub enum SeatHandle {
    Builtin(AgentSeat),
    Process(ProcessSeat),
}

impl SeatHandle {
    /// Creates the agent. Commands get one retry before the failure is
    /// reported; `match_id` only labels errors.
    pub fn open(
        agent: &AgentSpec,
        label: &str,
        seed: u64,
        stderr_log: Option<&Path>,
        limits: Limits,
        match_id: &str,
    ) -> Result<SeatHandle, InfraError> {
        match agent {
            AgentSpec::Builtin(name) => agents::by_name(name, seed)
                .map(|a| SeatHandle::Builtin(AgentSeat(a)))
                .ok_or_else(|| InfraError::UnknownAgent { match_id: match_id.to_string(), agent: name.clone() }),
            AgentSpec::Command(cmd) => {
                let mut attempt = AgentProcess::spawn(cmd, stderr_log, limits);
                if attempt.is_err() {
                    attempt = AgentProcess::spawn(cmd, stderr_log, limits);
                }
                let process = attempt.map_err(|source| InfraError::Spawn {
                    match_id: match_id.to_string(),
                    agent: cmd.clone(),
                    source,
                })?;
                Ok(SeatHandle::Process(ProcessSeat { name: label.to_string(), process }))
            }
        }
    }

    pub fn as_seat(&mut self) -> &mut dyn Seat {
        match self {
            SeatHandle::Builtin(s) => s,
            SeatHandle::Process(s) => s,
        }
    }

    /// Stops the process, if any, and returns its soft memory warnings.
    pub fn finish(self) -> u32 {
        match self {
            SeatHandle::Builtin(_) => 0,
            SeatHandle::Process(mut s) => {
                s.process.shutdown();
                s.process.soft_warnings
            }
        }
    }
}

fn make_seat(
    schedule: &Schedule,
    spec: &MatchSpec,
    side: usize,
    label: &str,
    opts: &RunOptions,
) -> Result<SeatHandle, InfraError> {
    let agent = &schedule.agents[if side == 0 { spec.a } else { spec.b }];
    let limits = opts.limits.unwrap_or_else(|| Limits::from_config(&schedule.config));
    let prefix = if side == 0 { "A" } else { "B" };
    let log = stderr_log_path(
        opts.logs.as_deref(),
        &format!("{}/{}", schedule.id, spec.match_id()),
        &format!("{prefix}.{label}"),
    );
    SeatHandle::open(agent, label, schedule.agent_seed(spec, side), Some(&log), limits, &spec.match_id())
}

fn timings(stats: &referee::SeatStats) -> TurnTimings {
    let total = stats.total.as_secs_f64() * 1000.0;
    let round = |x: f64| (x * 1000.0).round() / 1000.0;
    TurnTimings {
        responses: stats.responses,
        mean_ms: if stats.responses == 0 { 0.0 } else { round(total / stats.responses as f64) },
        max_ms: round(stats.max.as_secs_f64() * 1000.0),
    }
}

/// Plays one scheduled match. Agent forfeits are ordinary results; only
/// failures to start an agent or write output are errors.
pub fn run_match(schedule: &Schedule, spec: &MatchSpec, opts: &RunOptions) -> Result<MatchResult, InfraError> {
    let labels = schedule.labels();
    let started = Instant::now();
    let mut setup = MatchSetup::new(schedule.config, schedule.game_seed(spec.seed_index));
    setup.policy = schedule.policy;
    setup.card_set = schedule.card_set.clone();
    setup.generator = schedule.generator.clone();
    setup.record = opts.transcripts.is_some();

    let mut a = make_seat(schedule, spec, 0, &labels[spec.a], opts)?;
    let mut b = make_seat(schedule, spec, 1, &labels[spec.b], opts)?;
    let outcome = match spec.orientation {
        Orientation::AFirst => referee::play_match(&setup, [a.as_seat(), b.as_seat()]),
        Orientation::BFirst => referee::play_match(&setup, [b.as_seat(), a.as_seat()]),
    };
    let duration_ms = started.elapsed().as_millis() as u64;
    let memory_warnings = [a.finish(), b.finish()];

    // Seat index -> agent side.
    let side_of_seat = |seat: usize| match (spec.orientation, seat) {
        (Orientation::AFirst, 0) | (Orientation::BFirst, 1) => Winner::A,
        _ => Winner::B,
    };
    let by_side = |v: [u32; 2]| match spec.orientation {
        Orientation::AFirst => v,
        Orientation::BFirst => [v[1], v[0]],
    };
    let winner = outcome.winner().map_or(Winner::Draw, side_of_seat);
    let forfeit = outcome.forfeit.clone().map(|(seat, detail)| (side_of_seat(seat), detail));
    let mut t = [timings(&outcome.stats[0]), timings(&outcome.stats[1])];
    if spec.orientation == Orientation::BFirst {
        t.swap(0, 1);
    }

    if let (Some(root), Some(transcript)) = (&opts.transcripts, &outcome.transcript) {
        let dir = root.join(&schedule.id).join(spec.match_id());
        let io = |path: &Path, e| InfraError::Io { path: path.to_path_buf(), source: e };
        std::fs::create_dir_all(&dir).map_err(|e| io(&dir, e))?;
        let path = dir.join("transcript.jsonl");
        std::fs::write(&path, transcript.to_jsonl()).map_err(|e| io(&path, e))?;
        let path = dir.join("timings.json");
        let json = serde_json::to_string(&t).expect("timings serialize");
        std::fs::write(&path, json + "\n").map_err(|e| io(&path, e))?;
    }

    Ok(MatchResult {
        schedule_id: schedule.id.clone(),
        match_id: spec.match_id(),
        index: spec.index,
        agent_a: spec.a,
        agent_b: spec.b,
        name_a: labels[spec.a].clone(),
        name_b: labels[spec.b].clone(),
        seed_index: spec.seed_index,
        seed: setup.seed,
        repeat: spec.repeat,
        orientation: spec.orientation,
        winner,
        reason: outcome.reason,
        turns: outcome.turns,
        duration_ms,
        forfeit,
        ignored: by_side(outcome.ignored),
        memory_warnings,
        timings: t,
    })
}

/// Runs the whole schedule on `opts.workers` threads. Worker `w` plays the
/// matches whose index is `w` modulo the worker count; results come back in
/// schedule order. The first infrastructure error stops all workers.
pub fn run_tournament(
    schedule: &Schedule,
    opts: &RunOptions,
    progress: Option<&(dyn Fn(&MatchResult) + Sync)>,
) -> Result<Vec<MatchResult>, InfraError> {
    if schedule.agents.len() < 2 {
        return Err(InfraError::TooFewAgents);
    }
    let specs = build_schedule(schedule);
    let workers = opts.workers.clamp(1, specs.len().max(1));
    let stop = AtomicBool::new(false);
    let failure: Mutex<Option<InfraError>> = Mutex::new(None);
    let mut per_worker: Vec<Vec<MatchResult>> = Vec::new();
    thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (specs, stop, failure) = (&specs, &stop, &failure);
                scope.spawn(move || {
                    let mut done = Vec::new();
                    for spec in specs.iter().skip(w).step_by(workers) {
                        if stop.load(AtomicOrdering::Relaxed) {
                            break;
                        }
                        match run_match(schedule, spec, opts) {
                            Ok(r) => {
                                if let Some(p) = progress {
                                    p(&r);
                                }
                                done.push(r);
                            }
                            Err(e) => {
                                stop.store(true, AtomicOrdering::Relaxed);
                                failure.lock().unwrap().get_or_insert(e);
                                break;
                            }
                        }
                    }
                    done
                })
            })
            .collect();
        per_worker = handles.into_iter().map(|h| h.join().expect("worker panicked")).collect();
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let mut all: Vec<MatchResult> = per_worker.into_iter().flatten().collect();
    all.sort_by_key(|r| r.index);
    Ok(all)
}
