use std::collections::HashSet;
use std::path::Path;

use locm_arena::aggregate::{aggregate, ordered, AggregateError, Ordering};
use locm_arena::export::{export, read_results, summary_tsv};
use locm_arena::tournament::{build_schedule, run_match, run_tournament, AgentSpec, InfraError, Orientation};
use locm_arena::{MatchResult, RunOptions, Schedule, Winner};
use locm_core::state::EndReason;
use locm_core::transcript::Transcript;
use locm_core::{RulesetConfig, Version};

fn builtins(names: &[&str]) -> Vec<AgentSpec> {
    names.iter().map(|n| AgentSpec::parse(n)).collect()
}

fn schedule(names: &[&str], seeds: u32, repeats: u32, version: Version) -> Schedule {
    Schedule::new(builtins(names), seeds, repeats, RulesetConfig::new(version), 11)
}

/// Passes every battle turn, picks option 0, pads construction; after `n`
/// answers it stops responding.
const PASSIVE_AGENT: &str = r#"
import sys, time
limit = int(sys.argv[1])
answered = 0
def line():
    l = sys.stdin.readline()
    if not l:
        sys.exit(0)
    return l.split()
while True:
    me = line(); line()
    _, actions = map(int, line())
    for _ in range(actions):
        line()
    cards = int(line()[0])
    for _ in range(cards):
        line()
    if answered == limit:
        time.sleep(60)
    answered += 1
    if int(me[1]) == 0:
        print("PICK 0" if cards == 3 else "PASS", flush=True)
    else:
        print("PASS", flush=True)
"#;

fn passive(dir: &Path, limit: i64) -> AgentSpec {
    let path = dir.join("passive.py");
    std::fs::write(&path, PASSIVE_AGENT).unwrap();
    AgentSpec::Command(format!("python3 {} {limit}", path.display()))
}

#[test]
fn schedule_arithmetic() {
    let two = schedule(&["greedy", "random"], 5, 10, Version::V12);
    let specs = build_schedule(&two);
    assert_eq!(specs.len(), 100);
    let three = schedule(&["greedy", "random", "baseline2"], 5, 10, Version::V12);
    let specs3 = build_schedule(&three);
    assert_eq!(specs3.len(), 300);
    let mirrored = specs3.iter().filter(|s| s.orientation == Orientation::AFirst).count();
    assert_eq!(mirrored * 2, specs3.len());
    let ids: HashSet<String> = specs3.iter().map(|s| s.match_id()).collect();
    assert_eq!(ids.len(), 300);
    for (i, s) in specs3.iter().enumerate() {
        assert_eq!(s.index, i);
        assert!(s.a < s.b);
    }
    // Mirrored partners sit next to each other and differ only in orientation.
    for w in specs3.chunks(2) {
        assert_eq!((w[0].pair, w[0].seed_index, w[0].repeat), (w[1].pair, w[1].seed_index, w[1].repeat));
        assert_eq!(w[0].seats(), [w[1].seats()[1], w[1].seats()[0]]);
    }
}

#[test]
fn seeds_per_index_and_agent_streams() {
    let s = schedule(&["greedy", "random", "baseline2"], 4, 3, Version::V15);
    let specs = build_schedule(&s);
    let distinct: HashSet<u64> = (0..4).map(|i| s.game_seed(i)).collect();
    assert_eq!(distinct.len(), 4);
    // Agent streams differ per repeat and side, not per orientation.
    let ab = specs[0];
    let ba = specs[1];
    assert_eq!(s.agent_seed(&ab, 0), s.agent_seed(&ba, 0));
    assert_ne!(s.agent_seed(&ab, 0), s.agent_seed(&ab, 1));
    assert_ne!(s.agent_seed(&ab, 0), s.agent_seed(&specs[2], 0));
}

#[test]
fn labels_are_unique() {
    let s = schedule(&["greedy", "greedy", "random"], 1, 1, Version::V12);
    assert_eq!(s.labels(), ["greedy#1", "greedy#2", "random"]);
    let c = Schedule::new(
        vec![AgentSpec::parse("python3 /x/agent.py"), AgentSpec::parse("random")],
        1,
        1,
        RulesetConfig::new(Version::V12),
        0,
    );
    assert_eq!(c.labels(), ["agent.py", "random"]);
}

fn stable(r: &MatchResult) -> MatchResult {
    let mut r = r.clone();
    r.duration_ms = 0;
    r.timings = Default::default();
    r
}

#[test]
fn worker_count_does_not_change_results() {
    let s = schedule(&["greedy", "random2lanes", "random"], 3, 2, Version::V15);
    let one = tempfile::tempdir().unwrap();
    let many = tempfile::tempdir().unwrap();
    let run = |dir: &Path, workers| {
        let opts = RunOptions { workers, transcripts: Some(dir.to_path_buf()), ..RunOptions::default() };
        run_tournament(&s, &opts, None).unwrap()
    };
    let r1 = run(one.path(), 1);
    let r4 = run(many.path(), 4);
    assert_eq!(r1.len(), 36);
    assert_eq!(r1.iter().map(stable).collect::<Vec<_>>(), r4.iter().map(stable).collect::<Vec<_>>());
    let t1 = aggregate(&r1, Ordering::Interleaved, None).unwrap();
    let t4 = aggregate(&r4, Ordering::Interleaved, None).unwrap();
    assert_eq!(summary_tsv(&t1), summary_tsv(&t4));
    for spec in build_schedule(&s) {
        let rel = Path::new(&s.id).join(spec.match_id()).join("transcript.jsonl");
        let a = std::fs::read(one.path().join(&rel)).unwrap();
        let b = std::fs::read(many.path().join(&rel)).unwrap();
        assert_eq!(a, b, "{}", rel.display());
        Transcript::from_jsonl(std::str::from_utf8(&a).unwrap()).unwrap().check_digest().unwrap();
    }
}

#[test]
fn mirrored_copies_split_evenly() {
    for version in Version::ALL {
        let s = schedule(&["greedy", "greedy"], 6, 1, version);
        let results = run_tournament(&s, &RunOptions { workers: 2, ..RunOptions::default() }, None).unwrap();
        let t = aggregate(&results, Ordering::Interleaved, None).unwrap();
        assert_eq!(t.totals[0].wins, t.totals[1].wins, "{version}");
        if t.totals[0].decided() > 0 {
            assert_eq!(t.totals[0].win_rate_text(), "50.00");
        }
    }
}

#[test]
fn mirrored_games_replay_the_same_deal() {
    let s = schedule(&["baseline1", "baseline2"], 2, 1, Version::V12);
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions { workers: 1, transcripts: Some(dir.path().to_path_buf()), ..RunOptions::default() };
    let results = run_tournament(&s, &opts, None).unwrap();
    for pair in results.chunks(2) {
        assert_eq!(pair[0].seed, pair[1].seed);
        let load = |r: &MatchResult| {
            let p = dir.path().join(&s.id).join(&r.match_id).join("transcript.jsonl");
            Transcript::from_jsonl(&std::fs::read_to_string(p).unwrap()).unwrap()
        };
        // The first draft turn shows the same three options to both seats.
        let first_inputs = |t: &Transcript| -> Vec<String> {
            locm_core::transcript::inputs(t).take(2).map(|(_, s)| s.lines().skip(4).collect::<Vec<_>>().join("\n")).collect()
        };
        assert_eq!(first_inputs(&load(&pair[0])), first_inputs(&load(&pair[1])));
    }
}

#[test]
fn timeout_forfeits_to_the_opponent() {
    let dir = tempfile::tempdir().unwrap();
    let config = RulesetConfig { draft_turn_ms: 2000, first_turn_ms: 4000, battle_turn_ms: 300, ..RulesetConfig::new(Version::V12) };
    // 30 draft answers, then two battle turns; the third battle turn times out.
    let agents = vec![passive(dir.path(), 32), AgentSpec::parse("baseline1")];
    let s = Schedule::new(agents, 1, 1, config, 5);
    let spec = build_schedule(&s)[0];
    let opts = RunOptions { logs: Some(dir.path().join("logs")), ..RunOptions::default() };
    let r = run_match(&s, &spec, &opts).unwrap();
    assert_eq!(r.reason, EndReason::Timeout);
    assert_eq!(r.winner, Winner::B);
    assert_eq!(r.turns, 3);
    assert!(matches!(&r.forfeit, Some((Winner::A, _))));
}

#[test]
fn external_agent_completes_a_match() {
    let dir = tempfile::tempdir().unwrap();
    for version in [Version::V12, Version::V15] {
        let agents = vec![AgentSpec::parse("random"), passive(dir.path(), -1)];
        let mut s = Schedule::new(agents, 1, 1, RulesetConfig::new(version), 3);
        s.policy = locm_core::Policy::Strict;
        let results = run_tournament(&s, &RunOptions { workers: 2, ..RunOptions::default() }, None).unwrap();
        for r in &results {
            assert!(matches!(r.reason, EndReason::HealthZero | EndReason::HardCap), "{version} {r:?}");
            assert!(r.forfeit.is_none());
            assert_eq!(r.ignored, [0, 0]);
            assert!(r.timings[1].responses > 1);
        }
    }
}

#[test]
fn spawn_failure_is_an_infrastructure_error() {
    let agents = vec![AgentSpec::parse("/nonexistent/agent"), AgentSpec::parse("random")];
    let s = Schedule::new(agents, 2, 1, RulesetConfig::new(Version::V12), 0);
    let err = run_tournament(&s, &RunOptions { workers: 2, ..RunOptions::default() }, None).unwrap_err();
    assert!(matches!(err, InfraError::Spawn { .. }), "{err}");
    let s = schedule(&["random"], 1, 1, Version::V12);
    assert!(matches!(run_tournament(&s, &RunOptions::default(), None), Err(InfraError::TooFewAgents)));
}

fn fake(index: usize, a: usize, b: usize, winner: Winner) -> MatchResult {
    MatchResult {
        schedule_id: "s".into(),
        match_id: format!("m{index}"),
        index,
        agent_a: a,
        agent_b: b,
        name_a: format!("agent{a}"),
        name_b: format!("agent{b}"),
        seed_index: 0,
        seed: 0,
        repeat: 0,
        orientation: Orientation::AFirst,
        winner,
        reason: EndReason::HealthZero,
        turns: 10,
        duration_ms: 1,
        forfeit: None,
        ignored: [0, 0],
        memory_warnings: [0, 0],
        timings: Default::default(),
    }
}

#[test]
fn win_rates() {
    let mut results: Vec<MatchResult> =
        (0..100).map(|i| fake(i, 0, 1, if i < 94 { Winner::A } else { Winner::B })).collect();
    results.extend((100..110).map(|i| fake(i, 0, 1, Winner::Draw)));
    let t = aggregate(&results, Ordering::Interleaved, None).unwrap();
    assert_eq!(t.totals[0].win_rate_text(), "94.00");
    assert_eq!(t.totals[1].win_rate_text(), "6.00");
    assert_eq!((t.totals[0].games(), t.totals[0].draws, t.totals[0].decided()), (110, 10, 100));
    let wins: u32 = t.totals.iter().map(|r| r.wins).sum();
    let losses: u32 = t.totals.iter().map(|r| r.losses).sum();
    assert_eq!(wins, losses);

    let draws: Vec<MatchResult> = (0..4).map(|i| fake(i, 0, 1, Winner::Draw)).collect();
    let t = aggregate(&draws, Ordering::Interleaved, None).unwrap();
    assert_eq!(t.totals[0].win_rate_text(), "0.00");
    assert_eq!(t.totals[1].win_rate_text(), "0.00");
}

#[test]
fn aggregation_ignores_order() {
    let results: Vec<MatchResult> = (0..60)
        .map(|i| fake(i, i % 3, 3 + i % 2, [Winner::A, Winner::B, Winner::Draw][(i * 7) % 3]))
        .collect();
    let base = aggregate(&results, Ordering::Interleaved, None).unwrap();
    let mut shuffled = results.clone();
    shuffled.reverse();
    shuffled.rotate_left(17);
    assert_eq!(aggregate(&shuffled, Ordering::Interleaved, None).unwrap(), base);
    assert_eq!(aggregate(&shuffled, Ordering::Concatenated { workers: 4 }, None).unwrap(), base);
}

#[test]
fn orderings_differ_only_in_truncated_views() {
    let results: Vec<MatchResult> = (0..8).map(|i| fake(i, 0, 1, Winner::A)).collect();
    let inter: Vec<usize> = ordered(&results, Ordering::Interleaved).iter().map(|r| r.index).collect();
    let concat: Vec<usize> = ordered(&results, Ordering::Concatenated { workers: 2 }).iter().map(|r| r.index).collect();
    assert_eq!(inter, [0, 1, 2, 3, 4, 5, 6, 7]);
    assert_eq!(concat, [0, 2, 4, 6, 1, 3, 5, 7]);
    let mut skewed = results.clone();
    for r in skewed.iter_mut().filter(|r| r.index % 2 == 1) {
        r.winner = Winner::B;
    }
    let head = |o| aggregate(&skewed, o, Some(4)).unwrap().totals[0].wins;
    assert_eq!(head(Ordering::Interleaved), 2);
    assert_eq!(head(Ordering::Concatenated { workers: 2 }), 4);
}

#[test]
fn mixed_schedules_are_rejected() {
    let mut results = vec![fake(0, 0, 1, Winner::A), fake(1, 0, 1, Winner::B)];
    results[1].schedule_id = "other".into();
    assert!(matches!(aggregate(&results, Ordering::Interleaved, None), Err(AggregateError::MixedSchedules(..))));
}

#[test]
fn export_round_trips_and_is_stable() {
    let s = schedule(&["baseline2", "random"], 5, 10, Version::V12);
    let results = run_tournament(&s, &RunOptions { workers: 1, ..RunOptions::default() }, None).unwrap();
    assert_eq!(results.len(), 100);
    let table = aggregate(&results, Ordering::Interleaved, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for compress in [false, true] {
        let first = export(&dir.path().join("a"), &results, &table, compress).unwrap();
        let again = export(&dir.path().join("b"), &results, &table, compress).unwrap();
        for (x, y) in [(&first.results, &again.results), (&first.summary, &again.summary), (&first.pairwise, &again.pairwise)] {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
        assert_eq!(read_results(&first.results).unwrap(), results);
        let summary = std::fs::read_to_string(&first.summary).unwrap();
        assert_eq!(summary.lines().count(), 3);
        assert!(summary.starts_with("agent\tgames\twins\tlosses\tdraws\tdecided\twin_rate\n"));
    }
    let plain = std::fs::read_to_string(dir.path().join("a/results.jsonl")).unwrap();
    assert_eq!(plain.lines().count(), 100);
    let gz = std::fs::read(dir.path().join("a/results.jsonl.gz")).unwrap();
    assert_eq!(&gz[..2], &[0x1f, 0x8b]);
}
