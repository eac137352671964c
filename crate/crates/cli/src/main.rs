use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use locm_arena::aggregate::{aggregate, Ordering};
use locm_arena::export::export;
use locm_arena::runtime::{stderr_log_path, Limits};
use locm_arena::tournament::{run_tournament, AgentSpec, RunOptions, Schedule, SeatHandle};
use locm_core::agents;
use locm_core::cards::{generate_cards, load_card_set, CardSet, GeneratorParams};
use locm_core::referee::{play_match, MatchSetup, Response, Seat, SeatTurn, Forfeit};
use locm_core::rng::derive;
use locm_core::transcript::{self, Record, Transcript};
use locm_core::{Policy, RulesetConfig, Version};

const MB: u64 = 1024 * 1024;

#[derive(Parser)]
#[command(name = "locm", version, about = "Legends of Code and Magic engine and tournament runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Lenient,
    Strict,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Policy {
        match p {
            PolicyArg::Lenient => Policy::Lenient,
            PolicyArg::Strict => Policy::Strict,
        }
    }
}

#[derive(clap::Args, Default)]
struct Rules {
    /// Ruleset version: 1.0, 1.2 or 1.5 (default 1.2).
    #[arg(long)]
    version: Option<Version>,
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Card set file replacing the builtin draft set (or the generated pool in 1.5).
    #[arg(long)]
    cards: Option<PathBuf>,
    #[arg(long)]
    battle_turn_ms: Option<u64>,
    /// Root directory for agent stderr logs (LOCM_LOG_DIR takes precedence).
    #[arg(long)]
    logs: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Play one match and print the result.
    RunMatch {
        #[command(flatten)]
        rules: Rules,
        /// Builtin agent name or external command line for seat 1.
        #[arg(long)]
        p1: String,
        #[arg(long)]
        p2: String,
        /// Match seed (default 0).
        #[arg(long)]
        seed: Option<u64>,
        /// Where to write the transcript.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Run a mirrored round robin and write raw results and summaries.
    Tournament {
        #[command(flatten)]
        rules: Rules,
        /// Agents: builtin names or command lines (at least two).
        #[arg(long, num_args = 1..)]
        agents: Vec<String>,
        /// Number of seeds (required here or in the config file).
        #[arg(long)]
        seeds: Option<u32>,
        /// Repeats per seed (default 10).
        #[arg(long)]
        repeats: Option<u32>,
        /// Worker threads (default 1).
        #[arg(long)]
        workers: Option<usize>,
        /// Master seed (default 0).
        #[arg(long)]
        master_seed: Option<u64>,
        /// Output directory (default `results`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Gzip the raw results.
        #[arg(long)]
        compress: bool,
        /// Skip writing per-match transcripts.
        #[arg(long)]
        no_transcripts: bool,
        /// Schedule id (default derived from the parameters).
        #[arg(long)]
        id: Option<String>,
    },
    /// Generate a card pool file.
    GenCards {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
        /// TOML file overriding generator parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 120)]
        count: usize,
        #[arg(long, default_value = "1.5")]
        version: Version,
    },
    /// Re-simulate a transcript and check it matches.
    Replay {
        transcript: PathBuf,
        /// Print the exact per-turn agent inputs instead of the summary.
        #[arg(long)]
        dump_protocol: bool,
    },
    /// Measure in-process random-vs-random throughput.
    Bench {
        #[arg(long, default_value_t = 3.0)]
        seconds: f64,
        /// Version to measure (default: all three).
        #[arg(long)]
        version: Option<Version>,
        /// Random agent to use on both seats.
        #[arg(long, default_value = "random")]
        agent: String,
    },
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct RunConfigFile {
    version: Option<String>,
    policy: Option<String>,
    cards: Option<PathBuf>,
    budgets: BudgetsFile,
    limits: LimitsFile,
    rules: RulesFile,
    schedule: ScheduleFile,
    output: OutputFile,
    generator: Option<GeneratorParams>,
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct BudgetsFile {
    battle_turn_ms: Option<u64>,
    draft_turn_ms: Option<u64>,
    first_turn_ms: Option<u64>,
    construction_ms: Option<u64>,
    grace_first_battle_turn: Option<bool>,
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct LimitsFile {
    mem_soft_mb: Option<u64>,
    mem_hard_mb: Option<u64>,
    os_hard_limit: Option<bool>,
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct RulesFile {
    max_turns: Option<u32>,
    deck_empty_turn: Option<u32>,
    initial_draw: Option<[u32; 2]>,
    second_player_bonus: Option<bool>,
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct ScheduleFile {
    agents: Vec<String>,
    seeds: Option<u32>,
    repeats: Option<u32>,
    workers: Option<usize>,
    master_seed: Option<u64>,
    id: Option<String>,
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct OutputFile {
    dir: Option<PathBuf>,
    compress: Option<bool>,
    transcripts: Option<bool>,
    logs: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Infra(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Infra(e)
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Everything a match needs, after merging the config file and flags.
struct Resolved {
    file: RunConfigFile,
    config: RulesetConfig,
    policy: Policy,
    card_set: Option<Arc<CardSet>>,
    generator: GeneratorParams,
    limits: Limits,
    logs: Option<PathBuf>,
}

fn resolve(rules: &Rules) -> Result<Resolved, Failure> {
    let file: RunConfigFile = match &rules.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => RunConfigFile::default(),
    };
    let version = match (rules.version, &file.version) {
        (Some(v), _) => v,
        (None, Some(v)) => v.parse().map_err(|e| usage(format!("{e}")))?,
        (None, None) => Version::V12,
    };
    let policy = match (rules.policy, file.policy.as_deref()) {
        (Some(p), _) => p.into(),
        (None, Some("strict")) => Policy::Strict,
        (None, Some("lenient") | None) => Policy::Lenient,
        (None, Some(other)) => return Err(usage(format!("unknown policy {other:?}"))),
    };
    let mut config = RulesetConfig::new(version);
    let b = &file.budgets;
    config.battle_turn_ms = rules.battle_turn_ms.or(b.battle_turn_ms).unwrap_or(config.battle_turn_ms);
    config.draft_turn_ms = b.draft_turn_ms.unwrap_or(config.draft_turn_ms);
    config.first_turn_ms = b.first_turn_ms.unwrap_or(config.first_turn_ms);
    config.construction_ms = b.construction_ms.unwrap_or(config.construction_ms);
    config.grace_first_battle_turn = b.grace_first_battle_turn.unwrap_or(config.grace_first_battle_turn);
    config.mem_soft_bytes = file.limits.mem_soft_mb.map_or(config.mem_soft_bytes, |m| m * MB);
    config.mem_hard_bytes = file.limits.mem_hard_mb.map_or(config.mem_hard_bytes, |m| m * MB);
    let r = &file.rules;
    config.max_turns = r.max_turns.unwrap_or(config.max_turns);
    config.deck_empty_turn = r.deck_empty_turn.unwrap_or(config.deck_empty_turn);
    config.initial_draw = r.initial_draw.unwrap_or(config.initial_draw);
    config.second_player_bonus = r.second_player_bonus.unwrap_or(config.second_player_bonus);
    config.check().map_err(usage)?;

    let card_set = match rules.cards.as_ref().or(file.cards.as_ref()) {
        Some(path) => Some(Arc::new(load_card_set(path).with_context(|| format!("loading {}", path.display()))?)),
        None => None,
    };
    let generator = file.generator.clone().unwrap_or_default();
    generator.check().map_err(usage)?;
    let limits = Limits {
        os_hard_limit: file.limits.os_hard_limit.unwrap_or(false),
        ..Limits::from_config(&config)
    };
    let logs = rules.logs.clone().or(file.output.logs.clone());
    Ok(Resolved { file, config, policy, card_set, generator, limits, logs })
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn cmd_run_match(rules: Rules, p1: String, p2: String, seed: Option<u64>, transcript: Option<PathBuf>) -> CmdResult {
    let r = resolve(&rules)?;
    let seed_note = if seed.is_none() { " (default)" } else { "" };
    let seed = seed.unwrap_or(0);
    let mut setup = MatchSetup::new(r.config, seed);
    setup.policy = r.policy;
    setup.card_set = r.card_set.clone();
    setup.generator = r.generator.clone();
    setup.record = true;

    let specs = [AgentSpec::parse(&p1), AgentSpec::parse(&p2)];
    let match_id = format!("match-v{}-s{seed}", r.config.version);
    let mut seats = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let label = format!("p{}", i + 1);
        let log = stderr_log_path(r.logs.as_deref(), &match_id, &label);
        let agent_seed = derive(seed, &[i as u64, locm_core::rng::tag::AGENT]);
        let handle = SeatHandle::open(spec, spec.text(), agent_seed, Some(&log), r.limits, &match_id)
            .map_err(|e| Failure::Infra(e.into()))?;
        seats.push(handle);
    }
    let [mut a, mut b]: [SeatHandle; 2] = seats.try_into().ok().expect("two seats");
    let outcome = play_match(&setup, [a.as_seat(), b.as_seat()]);
    a.finish();
    b.finish();

    let path = transcript.unwrap_or_else(|| PathBuf::from("transcripts").join(&match_id).join("transcript.jsonl"));
    if let Some(t) = &outcome.transcript {
        write_file(&path, t.to_jsonl())?;
    }
    let winner = match outcome.winner() {
        Some(w) => format!("p{} ({})", w + 1, specs[w]),
        None => "draw".to_string(),
    };
    print!(
        "winner {winner} reason {:?} turns {} version {} seed {seed}{seed_note}",
        outcome.reason, outcome.turns, r.config.version
    );
    if let Some((seat, detail)) = &outcome.forfeit {
        print!(" forfeit p{}: {detail}", seat + 1);
    }
    println!();
    println!("transcript {}", path.display());
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_tournament(
    rules: Rules,
    agents: Vec<String>,
    seeds: Option<u32>,
    repeats: Option<u32>,
    workers: Option<usize>,
    master_seed: Option<u64>,
    out: Option<PathBuf>,
    compress: bool,
    no_transcripts: bool,
    id: Option<String>,
) -> CmdResult {
    let r = resolve(&rules)?;
    let sf = &r.file.schedule;
    let agents = if agents.is_empty() { sf.agents.clone() } else { agents };
    if agents.len() < 2 {
        return Err(usage("a tournament needs at least two agents (--agents)"));
    }
    let seeds = seeds.or(sf.seeds).ok_or_else(|| usage("the number of seeds is required (--seeds)"))?;
    if seeds == 0 {
        return Err(usage("--seeds must be positive"));
    }
    let repeats = repeats.or(sf.repeats).unwrap_or(10).max(1);
    let workers = workers.or(sf.workers).unwrap_or(1).max(1);
    let master_seed = master_seed.or(sf.master_seed).unwrap_or(0);
    let out = out.or(r.file.output.dir.clone()).unwrap_or_else(|| PathBuf::from("results"));
    let compress = compress || r.file.output.compress.unwrap_or(false);
    let transcripts = !no_transcripts && r.file.output.transcripts.unwrap_or(true);

    let specs: Vec<AgentSpec> = agents.iter().map(|a| AgentSpec::parse(a)).collect();
    let mut schedule = Schedule::new(specs, seeds, repeats, r.config, master_seed);
    schedule.policy = r.policy;
    schedule.card_set = r.card_set.clone();
    schedule.generator = r.generator.clone();
    if let Some(id) = id.or(sf.id.clone()) {
        schedule.id = id;
    }
    // Fail fast on agents that cannot start at all, naming each one.
    let mut bad = Vec::new();
    for spec in &schedule.agents {
        if let AgentSpec::Command(cmd) = spec {
            if let Err(e) = locm_arena::AgentProcess::spawn(cmd, None, r.limits) {
                bad.push(format!("  {cmd}: {e}"));
            }
        }
    }
    if !bad.is_empty() {
        return Err(Failure::Infra(anyhow::anyhow!("agents failed to start:\n{}", bad.join("\n"))));
    }

    let total = locm_arena::build_schedule(&schedule).len();
    eprintln!("schedule {}: {total} matches on {workers} worker(s)", schedule.id);
    let opts = RunOptions {
        workers,
        transcripts: transcripts.then(|| out.join("transcripts")),
        logs: r.logs.clone().or_else(|| Some(out.join("logs"))),
        limits: Some(r.limits),
    };
    let done = AtomicUsize::new(0);
    let step = (total / 20).max(1);
    let progress = |_: &locm_arena::MatchResult| {
        let n = done.fetch_add(1, AtomicOrdering::Relaxed) + 1;
        if n % step == 0 || n == total {
            eprintln!("  {n}/{total}");
        }
    };
    let results = run_tournament(&schedule, &opts, Some(&progress)).map_err(|e| Failure::Infra(e.into()))?;
    let table = aggregate(&results, Ordering::Interleaved, None).map_err(|e| Failure::Infra(e.into()))?;
    let files = export(&out, &results, &table, compress).map_err(|e| Failure::Infra(e.into()))?;
    print!("{table}");
    println!("results {}", files.results.display());
    println!("summary {}", files.summary.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen_cards(seed: u64, output: PathBuf, params: Option<PathBuf>, count: usize, version: Version) -> CmdResult {
    let params: GeneratorParams = match params {
        Some(path) => {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => GeneratorParams::default(),
    };
    params.check().map_err(usage)?;
    let set = generate_cards(&params, seed, count, version);
    let body: String = set.render().lines().filter(|l| !l.starts_with('#')).flat_map(|l| [l, "\n"]).collect();
    write_file(&output, body)?;
    println!("wrote {} cards to {}", set.len(), output.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_replay(path: PathBuf, dump_protocol: bool) -> CmdResult {
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let t = Transcript::from_jsonl(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if dump_protocol {
        for (player, input) in transcript::inputs(&t) {
            println!("# player {player}");
            print!("{input}");
        }
    } else {
        for rec in &t.records {
            if let Record::Turn { phase, player, turn, output, forfeit, events, .. } = rec {
                let said = output.as_deref().unwrap_or("-");
                match forfeit {
                    Some(reason) => println!("{phase:?} turn {turn} player {player}: forfeit {reason:?}"),
                    None => println!("{phase:?} turn {turn} player {player}: {said} ({} events)", events.len()),
                }
            }
        }
    }
    match transcript::replay(&t).map_err(|e| usage(format!("{}: {e}", path.display())))? {
        Err(d) => {
            println!("divergence at {d}");
            return Ok(ExitCode::from(1));
        }
        Ok(outcome) => {
            if let Err(e) = t.check_digest() {
                println!("divergence: {e}");
                return Ok(ExitCode::from(1));
            }
            println!("verified: {:?} {:?} after {} turns", outcome.outcome, outcome.reason, outcome.turns);
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Counts actions passing through an in-process seat.
struct Counting<'a> {
    seat: locm_core::referee::AgentSeat,
    actions: &'a mut u64,
}

impl Seat for Counting<'_> {
    fn name(&self) -> &str {
        self.seat.name()
    }

    fn respond(&mut self, turn: &SeatTurn<'_>) -> Result<Response, Forfeit> {
        let r = self.seat.respond(turn)?;
        if let Response::Actions(a) = &r {
            *self.actions += a.len().max(1) as u64;
        }
        Ok(r)
    }
}

fn cmd_bench(seconds: f64, version: Option<Version>, agent: String) -> CmdResult {
    if agents::by_name(&agent, 0).is_none() {
        return Err(usage(format!("unknown builtin agent {agent:?}")));
    }
    let versions = version.map_or(Version::ALL.to_vec(), |v| vec![v]);
    let budget = Duration::from_secs_f64(seconds.max(0.01));
    for v in versions {
        let config = RulesetConfig::new(v);
        let (mut games, mut actions) = (0u64, [0u64, 0u64]);
        let start = Instant::now();
        while start.elapsed() < budget {
            let setup = MatchSetup::new(config, games);
            let [x, y] = &mut actions;
            let mut a = Counting { seat: locm_core::referee::AgentSeat(agents::by_name(&agent, 2 * games).unwrap()), actions: x };
            let mut b = Counting { seat: locm_core::referee::AgentSeat(agents::by_name(&agent, 2 * games + 1).unwrap()), actions: y };
            play_match(&setup, [&mut a, &mut b]);
            games += 1;
        }
        let secs = start.elapsed().as_secs_f64();
        let total_actions = actions[0] + actions[1];
        println!(
            "v{v} {agent}: {games} games in {secs:.2}s, {:.0} games/s, {:.0} actions/s",
            games as f64 / secs,
            total_actions as f64 / secs
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::RunMatch { rules, p1, p2, seed, transcript } => cmd_run_match(rules, p1, p2, seed, transcript),
        Command::Tournament { rules, agents, seeds, repeats, workers, master_seed, out, compress, no_transcripts, id } => {
            cmd_tournament(rules, agents, seeds, repeats, workers, master_seed, out, compress, no_transcripts, id)
        }
        Command::GenCards { seed, output, params, count, version } => cmd_gen_cards(seed, output, params, count, version),
        Command::Replay { transcript, dump_protocol } => cmd_replay(transcript, dump_protocol),
        Command::Bench { seconds, version, agent } => cmd_bench(seconds, version, agent),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Infra(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
