use locm_core::card::{Area, Card, CardType, Keyword, KeywordSet};
use locm_core::config::{RulesetConfig, Version};
use locm_core::event::{apply_events, Event, Illegal};
use locm_core::rules::GameStatus;
use locm_core::state::{Creature, EndReason, GameState, HandCard, Outcome};
use locm_core::{Action, Policy, Target};

fn kws(ks: &[Keyword]) -> KeywordSet {
    ks.iter().copied().collect()
}

fn filler(n: i32) -> Vec<Card> {
    (0..n).map(|i| Card::creature(100 + i, 1, 1, 1, KeywordSet::EMPTY)).collect()
}

fn fresh(version: Version) -> GameState {
    let mut s = GameState::new_battle(RulesetConfig::new(version), [filler(20), filler(20)]);
    s.players[0].mana = 10;
    s.players[0].max_mana = 10;
    s
}

fn issue(s: &mut GameState) -> i32 {
    let id = s.next_instance_id;
    s.next_instance_id += 1;
    id
}

fn give(s: &mut GameState, p: usize, card: Card) -> i32 {
    let id = issue(s);
    s.players[p].hand.push(HandCard { instance_id: id, card });
    id
}

fn put(s: &mut GameState, p: usize, card: Card, lane: usize) -> i32 {
    let id = issue(s);
    let mut c = Creature::from_card(id, card, lane);
    c.summoned_this_turn = false;
    s.players[p].lanes[lane].push(c);
    id
}

fn plain(a: i32, d: i32) -> Card {
    Card::creature(1, 1, a, d, KeywordSet::EMPTY)
}

/// Applies the action, checks the event log replays onto the pre-state, and
/// returns the log.
fn act(s: &mut GameState, a: Action) -> Vec<Event> {
    let pre = s.clone();
    let mut log = Vec::new();
    let _ = s.apply_action(&a, Policy::Lenient, &mut log);
    let mut replayed = pre;
    apply_events(&mut replayed, &log).unwrap();
    assert_eq!(&replayed, s, "event replay diverged for {a}");
    log
}

fn turn_start(s: &mut GameState) -> Vec<Event> {
    let pre = s.clone();
    let mut log = Vec::new();
    s.begin_turn(&mut log);
    let mut replayed = pre;
    apply_events(&mut replayed, &log).unwrap();
    assert_eq!(&replayed, s);
    log
}

fn turn_end(s: &mut GameState) -> Vec<Event> {
    let pre = s.clone();
    let mut log = Vec::new();
    s.end_turn(&mut log);
    let mut replayed = pre;
    apply_events(&mut replayed, &log).unwrap();
    assert_eq!(&replayed, s);
    log
}

#[test]
fn max_mana_grows_by_one() {
    let mut s = fresh(Version::V12);
    s.players[0].max_mana = 4;
    s.players[0].mana = 0;
    turn_start(&mut s);
    assert_eq!((s.players[0].max_mana, s.players[0].mana), (5, 5));
}

#[test]
fn max_mana_caps_at_12() {
    let mut s = fresh(Version::V12);
    s.players[0].max_mana = 12;
    turn_start(&mut s);
    assert_eq!(s.players[0].max_mana, 12);
    assert_eq!(s.config.max_mana, 12);
}

#[test]
fn second_player_bonus_until_spent() {
    let mut s = fresh(Version::V12);
    s.active = 1;
    turn_start(&mut s);
    assert_eq!((s.players[1].max_mana, s.players[1].mana), (1, 2));
    // spend everything: bonus expires
    s.players[1].mana = 0;
    let log = turn_end(&mut s);
    assert!(log.contains(&Event::BonusManaExpired { player: 1 }));
    s.active = 1;
    turn_start(&mut s);
    assert_eq!((s.players[1].max_mana, s.players[1].mana), (2, 2));
}

#[test]
fn second_player_bonus_kept_when_not_spent() {
    let mut s = fresh(Version::V12);
    s.active = 1;
    turn_start(&mut s);
    s.players[1].mana = 1;
    turn_end(&mut s);
    s.active = 1;
    turn_start(&mut s);
    assert_eq!(s.players[1].mana, 3);
}

#[test]
fn v15_bonus_draw_is_floor_of_lost_over_five() {
    let mut s = fresh(Version::V15);
    s.players[0].health_lost_enemy_turn = 12;
    turn_start(&mut s);
    assert_eq!(s.players[0].hand.len(), 3);
    assert_eq!(s.players[0].health_lost_enemy_turn, 0);
    let mut s = fresh(Version::V15);
    s.players[0].health_lost_enemy_turn = 4;
    turn_start(&mut s);
    assert_eq!(s.players[0].hand.len(), 1);
}

#[test]
fn v15_damage_on_enemy_turn_counts_toward_bonus() {
    let mut s = fresh(Version::V15);
    let a = put(&mut s, 0, plain(7, 7), 0);
    act(&mut s, Action::Attack { id: a, target: Target::Face });
    assert_eq!(s.players[1].health, 23);
    assert_eq!(s.players[1].health_lost_enemy_turn, 7);
    turn_end(&mut s);
    turn_start(&mut s);
    assert_eq!(s.players[1].hand.len(), 2);
}

#[test]
fn empty_deck_breaks_highest_rune() {
    let mut s = GameState::new_battle(RulesetConfig::new(Version::V12), [Vec::new(), Vec::new()]);
    s.players[0].rune_count = 4;
    s.players[0].health = 23;
    turn_start(&mut s);
    assert!(s.players[0].hand.is_empty());
    assert_eq!(s.players[0].health, 20);
    assert_eq!(s.players[0].runes(), &[15, 10, 5]);
}

#[test]
fn empty_deck_without_runes_kills() {
    let mut s = GameState::new_battle(RulesetConfig::new(Version::V12), [Vec::new(), Vec::new()]);
    s.players[0].rune_count = 0;
    s.players[0].health = 3;
    turn_start(&mut s);
    assert_eq!(s.players[0].health, 0);
    assert_eq!(s.outcome, Some(Outcome::Won(1)));
}

#[test]
fn rune_thresholds_grant_draws() {
    let mut s = fresh(Version::V12);
    assert_eq!(s.players[1].runes(), &[25, 20, 15, 10, 5]);
    let a = put(&mut s, 0, plain(11, 2), 0);
    act(&mut s, Action::Attack { id: a, target: Target::Face });
    assert_eq!(s.players[1].health, 19);
    assert_eq!(s.players[1].runes(), &[15, 10, 5]);
    assert_eq!(s.players[1].next_turn_draw, 3);
}

#[test]
fn full_hand_burns_draw() {
    let mut s = fresh(Version::V12);
    for _ in 0..8 {
        give(&mut s, 0, plain(1, 1));
    }
    let deck = s.players[0].deck.len();
    let log = turn_start(&mut s);
    assert_eq!(s.players[0].hand.len(), 8);
    assert_eq!(s.players[0].deck.len(), deck - 1);
    assert!(log.iter().any(|e| matches!(e, Event::CardBurned { .. })));
    assert_eq!(s.config.hand_limit, 8);
}

#[test]
fn decks_clear_at_turn_50() {
    let mut s = fresh(Version::V12);
    s.turn = 49;
    s.active = 1;
    let log = turn_end(&mut s);
    assert_eq!(s.turn, 50);
    assert!(log.contains(&Event::DecksCleared));
    assert!(s.players.iter().all(|p| p.deck.is_empty()));
}

#[test]
fn hard_cap_uses_health_tiebreak() {
    let mut s = fresh(Version::V12);
    s.turn = s.config.max_turns - 1;
    s.active = 1;
    s.players[0].health = 7;
    s.players[1].health = 4;
    s.players[0].rune_count = 1;
    s.players[1].rune_count = 0;
    turn_end(&mut s);
    assert_eq!(s.outcome, Some(Outcome::Won(0)));
    assert_eq!(s.end_reason, Some(EndReason::HardCap));
}

#[test]
fn hard_cap_equal_health_draws() {
    let mut s = fresh(Version::V15);
    s.turn = s.config.max_turns - 1;
    s.active = 1;
    turn_end(&mut s);
    assert_eq!(s.outcome, Some(Outcome::Draw));
}

#[test]
fn check_end_cases() {
    let mut s = fresh(Version::V15);
    s.players[0].health = 5;
    s.players[1].health = 5;
    assert_eq!(s.check_end(), GameStatus::Ongoing);
    s.players[0].health = 0;
    s.players[1].health = 12;
    assert_eq!(s.check_end(), GameStatus::Won(1));
    s.players[1].health = -1;
    s.active = 1;
    assert_eq!(s.check_end(), GameStatus::Won(1));
}

#[test]
fn summoning_sickness_and_charge() {
    let mut s = fresh(Version::V12);
    let slow = give(&mut s, 0, plain(2, 2));
    let fast = give(&mut s, 0, Card::creature(2, 1, 2, 2, kws(&[Keyword::Charge])));
    act(&mut s, Action::Summon { id: slow, lane: 0 });
    act(&mut s, Action::Summon { id: fast, lane: 1 });
    let legal = s.legal_actions();
    assert!(!legal.iter().any(|a| matches!(a, Action::Attack { id, .. } if *id == slow)));
    assert!(legal.contains(&Action::Attack { id: fast, target: Target::Face }));
    assert_eq!(s.check_action(&Action::Attack { id: slow, target: Target::Face }), Err(Illegal::CannotAttack));
}

#[test]
fn guard_restricts_targets_in_its_lane_only() {
    let mut s = fresh(Version::V12);
    let a0 = put(&mut s, 0, plain(2, 2), 0);
    let a1 = put(&mut s, 0, plain(2, 2), 1);
    let g = put(&mut s, 1, Card::creature(3, 1, 1, 1, kws(&[Keyword::Guard])), 0);
    let other = put(&mut s, 1, plain(1, 1), 0);
    let legal = s.legal_actions();
    let targets: Vec<Target> = legal
        .iter()
        .filter_map(|a| match a {
            Action::Attack { id, target } if *id == a0 => Some(*target),
            _ => None,
        })
        .collect();
    assert_eq!(targets, vec![Target::Creature(g)]);
    assert!(legal.contains(&Action::Attack { id: a1, target: Target::Face }));
    assert_eq!(s.check_action(&Action::Attack { id: a0, target: Target::Creature(other) }), Err(Illegal::GuardFirst));
    assert_eq!(s.check_action(&Action::Attack { id: a1, target: Target::Creature(g) }), Err(Illegal::OtherLane));
}

#[test]
fn full_lane_blocks_summon() {
    let mut s = fresh(Version::V12);
    for _ in 0..3 {
        put(&mut s, 0, plain(1, 1), 1);
    }
    let c = give(&mut s, 0, plain(1, 1));
    let legal = s.legal_actions();
    assert!(legal.contains(&Action::Summon { id: c, lane: 0 }));
    assert!(!legal.contains(&Action::Summon { id: c, lane: 1 }));
    assert_eq!(s.check_action(&Action::Summon { id: c, lane: 1 }), Err(Illegal::LaneFull));
}

#[test]
fn v10_has_one_lane_of_six() {
    let mut s = fresh(Version::V10);
    for _ in 0..5 {
        put(&mut s, 0, plain(1, 1), 0);
    }
    let c = give(&mut s, 0, plain(1, 1));
    assert_eq!(s.legal_actions().iter().filter(|a| matches!(a, Action::Summon { .. })).count(), 1);
    act(&mut s, Action::Summon { id: c, lane: 0 });
    let d = give(&mut s, 0, plain(1, 1));
    assert_eq!(s.check_action(&Action::Summon { id: d, lane: 0 }), Err(Illegal::LaneFull));
    assert_eq!(s.check_action(&Action::Summon { id: d, lane: 1 }), Err(Illegal::BadLane));
}

#[test]
fn mana_gate() {
    let mut s = fresh(Version::V12);
    s.players[0].mana = 5;
    let c = give(&mut s, 0, Card::creature(1, 7, 5, 5, KeywordSet::EMPTY));
    let i = give(&mut s, 0, Card::item(2, CardType::BlueItem, 7, 0, -3));
    let legal = s.legal_actions();
    assert!(!legal.iter().any(|a| matches!(a, Action::Summon { id, .. } | Action::Use { id, .. } if *id == c || *id == i)));
    assert_eq!(legal, vec![Action::Pass]);
}

#[test]
fn summon_applies_card_effects() {
    let mut s = fresh(Version::V12);
    let card = Card::creature(1, 3, 2, 2, KeywordSet::EMPTY).with_effects(2, -1, 1);
    let c = give(&mut s, 0, card);
    act(&mut s, Action::Summon { id: c, lane: 0 });
    assert_eq!(s.players[0].mana, 7);
    assert_eq!(s.players[0].lanes[0].len(), 1);
    assert_eq!(s.players[0].health, 32);
    assert_eq!(s.players[1].health, 29);
    assert_eq!(s.players[0].next_turn_draw, 2);
}

#[test]
fn illegal_lenient_is_ignored_strict_loses() {
    let mut s = fresh(Version::V12);
    let a = put(&mut s, 0, plain(2, 2), 0);
    put(&mut s, 1, Card::creature(3, 1, 1, 1, kws(&[Keyword::Guard])), 0);
    let other = put(&mut s, 1, plain(1, 1), 0);
    let bad = Action::Attack { id: a, target: Target::Creature(other) };
    let before = s.clone();
    let log = act(&mut s, bad.clone());
    assert_eq!(log, vec![Event::Ignored { player: 0, action: bad.clone(), reason: Illegal::GuardFirst }]);
    assert_eq!(s, before);

    let mut log = Vec::new();
    let r = s.apply_action(&bad, Policy::Strict, &mut log);
    assert!(r.is_err());
    assert_eq!(s.outcome, Some(Outcome::Won(1)));
    assert_eq!(s.end_reason, Some(EndReason::InvalidStrict));
}

fn duel(a: Card, d: Card) -> (GameState, i32, i32) {
    let mut s = fresh(Version::V15);
    let ai = put(&mut s, 0, a, 0);
    let di = put(&mut s, 1, d, 0);
    act(&mut s, Action::Attack { id: ai, target: Target::Creature(di) });
    (s, ai, di)
}

#[test]
fn simultaneous_trade() {
    let (s, a, d) = duel(plain(3, 2), plain(2, 3));
    assert!(s.players[0].creature(a).is_none());
    assert!(s.players[1].creature(d).is_none());
}

#[test]
fn breakthrough_excess_hits_face() {
    let (s, _, d) = duel(Card::creature(1, 1, 5, 5, kws(&[Keyword::Breakthrough])), plain(2, 2));
    assert!(s.players[1].creature(d).is_none());
    assert_eq!(s.players[1].health, 27);
}

#[test]
fn lethal_kills_on_any_damage() {
    let (s, _, d) = duel(Card::creature(1, 1, 1, 1, kws(&[Keyword::Lethal])), plain(0, 10));
    assert!(s.players[1].creature(d).is_none());
}

#[test]
fn ward_blocks_one_hit() {
    let (s, a, d) = duel(plain(4, 4), Card::creature(1, 1, 1, 1, kws(&[Keyword::Ward])));
    let d = s.players[1].creature(d).unwrap();
    assert_eq!((d.attack, d.defense, d.has(Keyword::Ward)), (1, 1, false));
    assert_eq!(s.players[0].creature(a).unwrap().defense, 3);
}

#[test]
fn drain_heals_attacker_owner() {
    let (s, _, _) = duel(Card::creature(1, 1, 3, 3, kws(&[Keyword::Drain])), plain(1, 5));
    assert_eq!(s.players[0].health, 33);
    let mut s = fresh(Version::V15);
    let a = put(&mut s, 0, Card::creature(1, 1, 4, 1, kws(&[Keyword::Drain])), 0);
    act(&mut s, Action::Attack { id: a, target: Target::Face });
    assert_eq!((s.players[0].health, s.players[1].health), (34, 26));
}

#[test]
fn zero_attack_attack_is_legal_and_harmless() {
    let (s, a, d) = duel(Card::creature(1, 1, 0, 2, kws(&[Keyword::Lethal])), plain(1, 1));
    assert!(s.players[1].creature(d).is_some());
    assert_eq!(s.players[0].creature(a).unwrap().defense, 1);
}

#[test]
fn green_item_buffs_and_grants() {
    let mut s = fresh(Version::V12);
    let c = put(&mut s, 0, plain(2, 2), 0);
    let item = give(&mut s, 0, Card::item(9, CardType::GreenItem, 1, 1, 1).with_keywords(kws(&[Keyword::Ward])));
    act(&mut s, Action::Use { id: item, target: Target::Creature(c) });
    let c = s.players[0].creature(c).unwrap();
    assert_eq!((c.attack, c.defense, c.has(Keyword::Ward)), (3, 3, true));
}

#[test]
fn red_item_respects_ward_then_strips() {
    let mut s = fresh(Version::V12);
    let e = put(&mut s, 1, Card::creature(1, 1, 3, 3, kws(&[Keyword::Ward, Keyword::Guard])), 0);
    let item = give(&mut s, 0, Card::item(9, CardType::RedItem, 1, -1, -2).with_keywords(kws(&[Keyword::Guard])));
    act(&mut s, Action::Use { id: item, target: Target::Creature(e) });
    let e = s.players[1].creature(e).unwrap();
    assert_eq!((e.attack, e.defense), (2, 3));
    assert!(e.keywords.is_empty());
}

#[test]
fn blue_item_on_face() {
    let mut s = fresh(Version::V12);
    let item = give(&mut s, 0, Card::item(9, CardType::BlueItem, 1, 0, -4));
    act(&mut s, Action::Use { id: item, target: Target::Face });
    assert_eq!(s.players[1].health, 26);
}

#[test]
fn red_item_area_lane1_hits_the_lane() {
    let mut s = fresh(Version::V15);
    let x = put(&mut s, 1, plain(2, 2), 0);
    let y = put(&mut s, 1, plain(2, 5), 0);
    let z = put(&mut s, 1, plain(2, 2), 1);
    let item = give(&mut s, 0, Card::item(9, CardType::RedItem, 1, 0, -2).with_area(Area::Lane1));
    act(&mut s, Action::Use { id: item, target: Target::Creature(x) });
    assert!(s.players[1].creature(x).is_none());
    assert_eq!(s.players[1].creature(y).unwrap().defense, 3);
    assert_eq!(s.players[1].creature(z).unwrap().defense, 2);
}

#[test]
fn area_lane2_item_hits_the_whole_side_effects_once() {
    let mut s = fresh(Version::V15);
    let x = put(&mut s, 0, plain(1, 1), 0);
    let z = put(&mut s, 0, plain(1, 1), 1);
    let item =
        give(&mut s, 0, Card::item(9, CardType::GreenItem, 1, 1, 0).with_area(Area::Lane2).with_effects(3, 0, 0));
    act(&mut s, Action::Use { id: item, target: Target::Creature(x) });
    assert_eq!(s.players[0].creature(x).unwrap().attack, 2);
    assert_eq!(s.players[0].creature(z).unwrap().attack, 2);
    assert_eq!(s.players[0].health, 33);
}

#[test]
fn area_lane1_creature_copies_into_same_lane() {
    let mut s = fresh(Version::V15);
    put(&mut s, 0, plain(1, 1), 0);
    let c = give(&mut s, 0, plain(2, 2).with_area(Area::Lane1));
    act(&mut s, Action::Summon { id: c, lane: 0 });
    assert_eq!(s.players[0].lanes[0].len(), 3);
    let ids: Vec<i32> = s.players[0].lanes[0].iter().map(|c| c.instance_id).collect();
    assert!(ids.contains(&c));
    assert_eq!(ids.iter().filter(|&&i| i > c).count(), 1);
}

#[test]
fn area_lane2_creature_needs_space_in_other_lane() {
    let mut s = fresh(Version::V15);
    for _ in 0..3 {
        put(&mut s, 0, plain(1, 1), 1);
    }
    let c = give(&mut s, 0, plain(2, 2).with_area(Area::Lane2));
    act(&mut s, Action::Summon { id: c, lane: 0 });
    assert_eq!(s.players[0].lanes[0].len(), 1);
    assert_eq!(s.players[0].lanes[1].len(), 3);

    let mut s = fresh(Version::V15);
    let c = give(&mut s, 0, plain(2, 2).with_area(Area::Lane2));
    act(&mut s, Action::Summon { id: c, lane: 0 });
    assert_eq!((s.players[0].lanes[0].len(), s.players[0].lanes[1].len()), (1, 1));
}

#[test]
fn v12_creature_is_a_single_copy() {
    let mut s = fresh(Version::V12);
    let c = give(&mut s, 0, plain(2, 2));
    act(&mut s, Action::Summon { id: c, lane: 1 });
    assert_eq!(s.players[0].creatures().count(), 1);
}

#[test]
fn turn_handoff() {
    let mut s = fresh(Version::V12);
    turn_end(&mut s);
    assert_eq!((s.active, s.turn), (1, 1));
    turn_end(&mut s);
    assert_eq!((s.active, s.turn), (0, 2));
}

#[test]
fn double_ko_favors_the_active_player() {
    let mut s = fresh(Version::V15);
    s.players[0].health = 2;
    s.players[1].health = 2;
    let item = give(&mut s, 0, Card::item(9, CardType::BlueItem, 1, 0, -2).with_effects(-2, 0, 0));
    act(&mut s, Action::Use { id: item, target: Target::Face });
    assert_eq!(s.outcome, Some(Outcome::Won(0)));
}

#[test]
fn face_damage_matches_health_events() {
    let mut s = fresh(Version::V15);
    let a = put(&mut s, 0, Card::creature(1, 1, 6, 3, kws(&[Keyword::Breakthrough])), 0);
    let d = put(&mut s, 1, plain(1, 2), 0);
    let before = s.players[1].health;
    let log = act(&mut s, Action::Attack { id: a, target: Target::Creature(d) });
    let recorded: i32 = log
        .iter()
        .map(|e| match e {
            Event::HealthChanged { player: 1, before, after } => before - after,
            _ => 0,
        })
        .sum();
    assert_eq!(recorded, before - s.players[1].health);
    assert_eq!(recorded, 4);
}
