//! Generators for protocol values, shared with the acceptance run.

use proptest::prelude::*;

use locm_core::card::{Area, Card, CardType, KeywordSet};
use locm_core::config::Version;
use locm_core::protocol::{AgentView, CardView, Location, PlayerSummary};
use locm_core::state::Phase;
use locm_core::{Action, Target};

pub fn version() -> impl Strategy<Value = Version> {
    prop_oneof![Just(Version::V10), Just(Version::V12), Just(Version::V15)]
}

pub fn target() -> impl Strategy<Value = Target> {
    prop_oneof![Just(Target::Face), any::<i32>().prop_filter("not face", |&t| t != -1).prop_map(Target::Creature)]
}

pub fn battle_action() -> impl Strategy<Value = Action> {
    prop_oneof![
        (any::<i32>(), any::<i32>()).prop_map(|(id, lane)| Action::Summon { id, lane }),
        (any::<i32>(), target()).prop_map(|(id, target)| Action::Attack { id, target }),
        (any::<i32>(), target()).prop_map(|(id, target)| Action::Use { id, target }),
        Just(Action::Pass),
    ]
}

pub fn actions_for(phase: Phase) -> BoxedStrategy<Vec<Action>> {
    match phase {
        Phase::Draft => prop::collection::vec(prop_oneof![any::<i32>().prop_map(Action::Pick), Just(Action::Pass)], 1..4).boxed(),
        Phase::Construction => prop::collection::vec(any::<i32>(), 0..40).prop_map(|c| vec![Action::Choose(c)]).boxed(),
        _ => prop::collection::vec(battle_action(), 1..12).boxed(),
    }
}

pub fn card(v: Version) -> impl Strategy<Value = Card> {
    (any::<i32>(), 0i32..4, any::<[i32; 6]>(), 0u8..64, 0i32..3).prop_map(move |(n, t, x, k, area)| Card {
        number: n,
        card_type: CardType::from_code(t).unwrap(),
        cost: x[0],
        attack: x[1],
        defense: x[2],
        keywords: KeywordSet::from_bits(k).unwrap(),
        my_health_change: x[3],
        opponent_health_change: x[4],
        card_draw: x[5],
        area: if v.has_area() { Area::from_code(area).unwrap() } else { Area::Target },
    })
}

pub fn card_view(v: Version) -> impl Strategy<Value = CardView> {
    (card(v), any::<i32>(), prop_oneof![Just(Location::Hand), Just(Location::MyBoard), Just(Location::EnemyBoard)], any::<i32>())
        .prop_map(|(card, instance_id, location, lane)| CardView { card, instance_id, location, lane })
}

pub fn summary() -> impl Strategy<Value = PlayerSummary> {
    any::<[i32; 4]>().prop_map(|x| PlayerSummary { health: x[0], mana: x[1], deck_count: x[2], extra: x[3] })
}

pub fn view() -> impl Strategy<Value = AgentView> {
    version().prop_flat_map(|v| {
        (
            summary(),
            summary(),
            any::<i32>(),
            prop::collection::vec(battle_action(), 0..8),
            prop::collection::vec(card_view(v), 0..20),
        )
            .prop_map(move |(me, opponent, opponent_hand, opponent_actions, cards)| {
                let phase = match (me.mana, v.has_draft()) {
                    (0, true) => Phase::Draft,
                    (0, false) => Phase::Construction,
                    _ => Phase::Battle,
                };
                AgentView { version: v, phase, me, opponent, opponent_hand, opponent_actions, cards }
            })
    })
}
