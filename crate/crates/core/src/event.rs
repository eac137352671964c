//! Atomic transition events. Every event carries post-values, so a log can be
//! replayed onto the pre-state without re-running any rule.

use serde::{Deserialize, Serialize};

use crate::action::{Action, Target};
use crate::card::{Card, KeywordSet};
use crate::state::{Creature, EndReason, GameState, HandCard, Outcome, Phase};

/// Why an action was refused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, thiserror::Error)]
pub enum Illegal {
    #[error("action not allowed in this phase")]
    WrongPhase,
    #[error("game is over")]
    GameOver,
    #[error("no such card in hand")]
    NotInHand,
    #[error("not enough mana")]
    NotEnoughMana,
    #[error("card cannot be used this way")]
    WrongCardType,
    #[error("no such lane")]
    BadLane,
    #[error("lane is full")]
    LaneFull,
    #[error("no such friendly creature")]
    UnknownAttacker,
    #[error("creature cannot attack now")]
    CannotAttack,
    #[error("invalid target")]
    BadTarget,
    #[error("target is in another lane")]
    OtherLane,
    #[error("a guard must be attacked first")]
    GuardFirst,
    #[error("pick index out of range")]
    BadPick,
    #[error("invalid construction choice")]
    BadChoice,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Event {
    TurnStarted { player: usize, turn: u32 },
    ManaRefilled { player: usize, max_mana: i32, mana: i32, bonus: bool },
    Bookkeeping { player: usize, next_turn_draw: i32, health_lost_enemy_turn: i32 },
    CardDrawn { player: usize, instance_id: i32, card: Card },
    CardBurned { player: usize, card: Card },
    EmptyDeck { player: usize },
    RuneBroken { player: usize, threshold: i32 },
    HealthChanged { player: usize, before: i32, after: i32 },
    CardPlayed { player: usize, instance_id: i32, card: Card, mana_after: i32 },
    Summoned { player: usize, creature: Creature },
    CreatureUpdated { owner: usize, instance_id: i32, attack: i32, defense: i32, keywords: KeywordSet },
    Attacked { owner: usize, attacker: i32, target: Target },
    CreatureDied { owner: usize, instance_id: i32 },
    Ignored { player: usize, action: Action, reason: Illegal },
    BonusManaExpired { player: usize },
    TurnEnded { player: usize, next_active: usize, turn: u32 },
    DecksCleared,
    GameOver { outcome: Outcome, reason: EndReason },
}

/// Ordered events produced by one transition.
pub type TransitionLog = Vec<Event>;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("event {index} ({event:?}) does not apply: {problem}")]
pub struct ReplayError {
    pub index: usize,
    pub event: Event,
    pub problem: &'static str,
}

/// Replays `events` onto `state`.
pub fn apply_events(state: &mut GameState, events: &[Event]) -> Result<(), ReplayError> {
    for (index, event) in events.iter().enumerate() {
        apply_event(state, event).map_err(|problem| ReplayError {
            index,
            event: event.clone(),
            problem,
        })?;
    }
    Ok(())
}

fn apply_event(state: &mut GameState, event: &Event) -> Result<(), &'static str> {
    match *event {
        Event::TurnStarted { player, turn } => {
            state.active = player;
            state.turn = turn;
            for c in state.players[player].lanes.iter_mut().flatten() {
                c.attacked_this_turn = false;
                c.summoned_this_turn = false;
            }
        }
        Event::ManaRefilled { player, max_mana, mana, bonus } => {
            let p = &mut state.players[player];
            p.max_mana = max_mana;
            p.mana = mana;
            p.bonus_this_turn = bonus;
        }
        Event::Bookkeeping { player, next_turn_draw, health_lost_enemy_turn } => {
            let p = &mut state.players[player];
            p.next_turn_draw = next_turn_draw;
            p.health_lost_enemy_turn = health_lost_enemy_turn;
        }
        Event::CardDrawn { player, instance_id, card } => {
            let p = &mut state.players[player];
            if p.deck.pop() != Some(card) {
                return Err("deck top differs from drawn card");
            }
            p.hand.push(HandCard { instance_id, card });
            state.next_instance_id = state.next_instance_id.max(instance_id + 1);
        }
        Event::CardBurned { player, card } => {
            if state.players[player].deck.pop() != Some(card) {
                return Err("deck top differs from burned card");
            }
        }
        Event::EmptyDeck { .. } | Event::Ignored { .. } => {}
        Event::RuneBroken { player, threshold } => {
            let p = &mut state.players[player];
            if p.runes().first() != Some(&threshold) {
                return Err("rune is not the highest remaining");
            }
            p.rune_count -= 1;
        }
        Event::HealthChanged { player, before, after } => {
            let p = &mut state.players[player];
            if p.health != before {
                return Err("health before differs");
            }
            p.health = after;
        }
        Event::CardPlayed { player, instance_id, card, mana_after } => {
            let p = &mut state.players[player];
            let pos = p
                .hand
                .iter()
                .position(|h| h.instance_id == instance_id && h.card == card)
                .ok_or("played card not in hand")?;
            p.hand.remove(pos);
            p.mana = mana_after;
        }
        Event::Summoned { player, creature } => {
            let lane = state.players[player]
                .lanes
                .get_mut(creature.lane)
                .ok_or("lane out of range")?;
            lane.push(creature);
            state.next_instance_id = state.next_instance_id.max(creature.instance_id + 1);
        }
        Event::CreatureUpdated { owner, instance_id, attack, defense, keywords } => {
            let c = state.players[owner]
                .creature_mut(instance_id)
                .ok_or("updated creature missing")?;
            c.attack = attack;
            c.defense = defense;
            c.keywords = keywords;
        }
        Event::Attacked { owner, attacker, .. } => {
            state.players[owner]
                .creature_mut(attacker)
                .ok_or("attacker missing")?
                .attacked_this_turn = true;
        }
        Event::CreatureDied { owner, instance_id } => {
            let lanes = &mut state.players[owner].lanes;
            let lane = lanes
                .iter_mut()
                .find(|l| l.iter().any(|c| c.instance_id == instance_id))
                .ok_or("dead creature missing")?;
            lane.retain(|c| c.instance_id != instance_id);
        }
        Event::BonusManaExpired { player } => state.players[player].bonus_mana = false,
        Event::TurnEnded { next_active, turn, .. } => {
            state.active = next_active;
            state.turn = turn;
        }
        Event::DecksCleared => {
            for p in &mut state.players {
                p.deck.clear();
            }
        }
        Event::GameOver { outcome, reason } => {
            state.outcome = Some(outcome);
            state.end_reason = Some(reason);
            state.phase = Phase::Finished;
        }
    }
    Ok(())
}
