use proptest::prelude::*;

use locm_core::agents::{by_name, Agent, BUILTIN_NAMES};
use locm_core::config::{RulesetConfig, Version};
use locm_core::deck::{finalize_deck, shuffle_seed};
use locm_core::event::{apply_events, Event};
use locm_core::protocol::AgentView;
use locm_core::referee::{play_agents, MatchSetup};
use locm_core::state::GameState;
use locm_core::{CardSet, Policy};

fn version(i: u8) -> Version {
    Version::ALL[i as usize % 3]
}

fn random_decks(seed: u64, version: Version) -> [Vec<locm_core::Card>; 2] {
    let cards = if version.has_draft() {
        CardSet::builtin().cards.clone()
    } else {
        locm_core::cards::generate_pool(&Default::default(), seed).cards
    };
    [0, 1].map(|p| finalize_deck(cards[..30].to_vec(), shuffle_seed(seed, p)))
}

/// Plays a whole battle with two random agents, checking at every step that
/// the state audits clean, the log replays onto the pre-state, and opponent
/// face damage in the log equals the health delta.
fn checked_battle(seed: u64, version: Version) -> GameState {
    let mut s = GameState::new_battle(RulesetConfig::new(version), random_decks(seed, version));
    let mut agents: [Box<dyn Agent>; 2] = [by_name("random", seed).unwrap(), by_name("random2lanes", seed ^ 1).unwrap()];
    let mut log = Vec::new();
    s.deal_initial(&mut log);
    while !s.is_over() {
        let pre = s.clone();
        log.clear();
        s.begin_turn(&mut log);
        check_step(&pre, &s, &log);
        if s.is_over() {
            break;
        }
        let p = s.active;
        let actions = agents[p].act(&AgentView::battle(&s, p, &[]));
        for a in actions.iter().chain(std::iter::once(&locm_core::Action::Pass)) {
            if s.is_over() {
                break;
            }
            let pre = s.clone();
            log.clear();
            s.apply_action(a, Policy::Lenient, &mut log).unwrap();
            check_step(&pre, &s, &log);
            assert!(!log.iter().any(|e| matches!(e, Event::Ignored { .. })), "{a} ignored");
        }
        let pre = s.clone();
        log.clear();
        s.end_turn(&mut log);
        check_step(&pre, &s, &log);
    }
    s
}

fn check_step(pre: &GameState, post: &GameState, log: &[Event]) {
    post.audit().unwrap();
    let mut replayed = pre.clone();
    apply_events(&mut replayed, log).unwrap();
    assert_eq!(&replayed, post);
    for p in 0..2 {
        let delta: i32 = log
            .iter()
            .map(|e| match e {
                Event::HealthChanged { player, before, after } if *player == p => after - before,
                _ => 0,
            })
            .sum();
        assert_eq!(delta, post.players[p].health - pre.players[p].health);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn battles_keep_invariants_and_replay(seed in any::<u64>(), v in 0u8..3) {
        let end = checked_battle(seed, version(v));
        prop_assert!(end.outcome.is_some());
    }

    #[test]
    fn battles_are_deterministic(seed in any::<u64>(), v in 0u8..3) {
        prop_assert_eq!(checked_battle(seed, version(v)), checked_battle(seed, version(v)));
    }

    #[test]
    fn view_hides_opponent_hand_and_decks(seed in any::<u64>(), shift in 1usize..30) {
        let mut s = GameState::new_battle(RulesetConfig::new(Version::V12), random_decks(seed, Version::V12));
        let mut log = Vec::new();
        for _ in 0..6 {
            s.begin_turn(&mut log);
            s.end_turn(&mut log);
        }
        s.begin_turn(&mut log);
        let p = s.active;
        let text = AgentView::battle(&s, p, &[]).render();
        let mut t = s.clone();
        let opp = &mut t.players[1 - p];
        let cards: Vec<_> = opp.hand.iter().map(|h| h.card).collect();
        for (i, h) in opp.hand.iter_mut().enumerate() {
            h.card = cards[(i + 1) % cards.len()];
        }
        for player in &mut t.players {
            let n = player.deck.len().max(1);
            player.deck.rotate_left(shift % n);
        }
        prop_assert_eq!(AgentView::battle(&t, p, &[]).render(), text);
    }
}

#[test]
fn builtin_agents_never_emit_ignored_actions() {
    let fast = ["baseline1", "baseline2", "random2lanes", "random"];
    let mut games = 0;
    let mut seed = 0u64;
    while games < 10_000 {
        let v = Version::ALL[(seed % 3) as usize];
        let (a, b) = (fast[(seed % 4) as usize], fast[((seed / 4) % 4) as usize]);
        let m = play_agents(&MatchSetup::new(RulesetConfig::new(v), seed), by_name(a, seed).unwrap(), by_name(b, !seed).unwrap());
        assert_eq!(m.ignored, [0, 0], "{a} vs {b} {v} seed {seed}");
        games += 1;
        seed += 1;
    }
    for seed in 0..150u64 {
        let v = Version::ALL[(seed % 3) as usize];
        let other = BUILTIN_NAMES[(seed % 5) as usize];
        let m = play_agents(&MatchSetup::new(RulesetConfig::new(v), seed), by_name("greedy", 0).unwrap(), by_name(other, seed).unwrap());
        assert_eq!(m.ignored, [0, 0], "greedy vs {other} {v} seed {seed}");
    }
}
