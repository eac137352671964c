//! The forward model: turn lifecycle, legality, action application, combat
//! and end-of-game detection.
//!
//! All transitions mutate the state in place and append the events they
//! caused to a [`TransitionLog`]. Clone the state first when a pure
//! before/after pair is needed.

use crate::action::{Action, Policy, Target};
use crate::card::{Area, Card, CardType, Keyword};
use crate::config::HEALTH_PER_BONUS_DRAW;
use crate::event::{Event, Illegal, TransitionLog};
use crate::state::{Creature, EndReason, GameState, Outcome, Phase};

/// Result of [`GameState::check_end`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GameStatus {
    Ongoing,
    Won(usize),
    Draw,
}

/// An action refused under [`Policy::Strict`]; the actor has lost.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("player {player} played illegal action {action}: {reason}")]
pub struct Rejected {
    pub player: usize,
    pub action: Action,
    pub reason: Illegal,
}

impl GameState {
    /// Draws the configured extra opening cards for both seats.
    pub fn deal_initial(&mut self, log: &mut TransitionLog) {
        for p in 0..2 {
            for _ in 0..self.config.initial_draw[p] {
                self.draw_card(p, log);
            }
        }
        self.update_outcome(log);
    }

    /// Starts the active player's turn: mana growth and refill, creature
    /// readiness, card draws.
    pub fn begin_turn(&mut self, log: &mut TransitionLog) {
        if self.phase != Phase::Battle || self.is_over() {
            return;
        }
        let p = self.active;
        log.push(Event::TurnStarted { player: p, turn: self.turn });
        for c in self.players[p].lanes.iter_mut().flatten() {
            c.attacked_this_turn = false;
            c.summoned_this_turn = false;
        }

        let max_mana_cap = self.config.max_mana;
        let player = &mut self.players[p];
        player.max_mana = (player.max_mana + 1).min(max_mana_cap);
        player.bonus_this_turn = player.bonus_mana;
        player.mana = player.max_mana + i32::from(player.bonus_this_turn);
        log.push(Event::ManaRefilled {
            player: p,
            max_mana: player.max_mana,
            mana: player.mana,
            bonus: player.bonus_this_turn,
        });

        let mut draws = player.next_turn_draw;
        if !self.config.version.uses_runes() {
            draws += player.health_lost_enemy_turn / HEALTH_PER_BONUS_DRAW;
        }
        player.next_turn_draw = 1;
        player.health_lost_enemy_turn = 0;
        log.push(Event::Bookkeeping { player: p, next_turn_draw: 1, health_lost_enemy_turn: 0 });

        for _ in 0..draws {
            self.draw_card(p, log);
        }
        self.update_outcome(log);
        self.debug_audit();
    }

    fn draw_card(&mut self, p: usize, log: &mut TransitionLog) {
        let uses_runes = self.config.version.uses_runes();
        let hand_limit = self.config.hand_limit;
        let player = &mut self.players[p];
        match player.deck.pop() {
            Some(card) if player.hand.len() >= hand_limit => {
                log.push(Event::CardBurned { player: p, card });
            }
            Some(card) => {
                let instance_id = self.next_instance_id;
                self.next_instance_id += 1;
                player.hand.push(crate::state::HandCard { instance_id, card });
                log.push(Event::CardDrawn { player: p, instance_id, card });
            }
            None if uses_runes => {
                let before = player.health;
                let after = match player.runes().first() {
                    Some(&threshold) => {
                        player.rune_count -= 1;
                        log.push(Event::RuneBroken { player: p, threshold });
                        threshold
                    }
                    None => 0,
                };
                let after = after.min(before);
                if after != before {
                    player.health = after;
                    log.push(Event::HealthChanged { player: p, before, after });
                }
            }
            None => log.push(Event::EmptyDeck { player: p }),
        }
    }

    /// Every singly-applicable legal action for the active player. Always
    /// contains [`Action::Pass`] during an ongoing battle.
    pub fn legal_actions(&self) -> Vec<Action> {
        let mut out = Vec::new();
        if self.phase != Phase::Battle || self.is_over() {
            return out;
        }
        let me = self.me();
        let opp = self.opponent();
        let lanes = self.config.lanes();
        let lane_size = self.config.lane_size();

        for h in &me.hand {
            if h.card.cost > me.mana {
                continue;
            }
            let id = h.instance_id;
            match h.card.card_type {
                CardType::Creature => {
                    for lane in 0..lanes {
                        if me.lanes[lane].len() < lane_size {
                            out.push(Action::Summon { id, lane: lane as i32 });
                        }
                    }
                }
                CardType::GreenItem => {
                    for c in me.creatures() {
                        out.push(Action::Use { id, target: Target::Creature(c.instance_id) });
                    }
                }
                CardType::RedItem | CardType::BlueItem => {
                    for c in opp.creatures() {
                        out.push(Action::Use { id, target: Target::Creature(c.instance_id) });
                    }
                    if h.card.card_type == CardType::BlueItem {
                        out.push(Action::Use { id, target: Target::Face });
                    }
                }
            }
        }

        for c in me.creatures().filter(|c| c.can_attack()) {
            let guarded = opp.has_guard_in(c.lane);
            for t in &opp.lanes[c.lane] {
                if !guarded || t.has(Keyword::Guard) {
                    out.push(Action::Attack { id: c.instance_id, target: Target::Creature(t.instance_id) });
                }
            }
            if !guarded {
                out.push(Action::Attack { id: c.instance_id, target: Target::Face });
            }
        }
        out.push(Action::Pass);
        out
    }

    /// Legality of a single battle action for the active player.
    pub fn check_action(&self, action: &Action) -> Result<(), Illegal> {
        if self.is_over() {
            return Err(Illegal::GameOver);
        }
        if self.phase != Phase::Battle || !action.is_battle() {
            return Err(Illegal::WrongPhase);
        }
        let me = self.me();
        let opp = self.opponent();
        match *action {
            Action::Pass => Ok(()),
            Action::Summon { id, lane } => {
                let h = me.hand_card(id).ok_or(Illegal::NotInHand)?;
                if h.card.card_type != CardType::Creature {
                    return Err(Illegal::WrongCardType);
                }
                if h.card.cost > me.mana {
                    return Err(Illegal::NotEnoughMana);
                }
                let lane = usize::try_from(lane)
                    .ok()
                    .filter(|&l| l < self.config.lanes())
                    .ok_or(Illegal::BadLane)?;
                if me.lanes[lane].len() >= self.config.lane_size() {
                    return Err(Illegal::LaneFull);
                }
                Ok(())
            }
            Action::Use { id, target } => {
                let h = me.hand_card(id).ok_or(Illegal::NotInHand)?;
                if h.card.cost > me.mana {
                    return Err(Illegal::NotEnoughMana);
                }
                let ok = match (h.card.card_type, target) {
                    (CardType::Creature, _) => return Err(Illegal::WrongCardType),
                    (CardType::GreenItem, Target::Creature(t)) => me.creature(t).is_some(),
                    (CardType::RedItem | CardType::BlueItem, Target::Creature(t)) => {
                        opp.creature(t).is_some()
                    }
                    (CardType::BlueItem, Target::Face) => true,
                    _ => false,
                };
                ok.then_some(()).ok_or(Illegal::BadTarget)
            }
            Action::Attack { id, target } => {
                let a = me.creature(id).ok_or(Illegal::UnknownAttacker)?;
                if !a.can_attack() {
                    return Err(Illegal::CannotAttack);
                }
                let guarded = opp.has_guard_in(a.lane);
                match target {
                    Target::Face if guarded => Err(Illegal::GuardFirst),
                    Target::Face => Ok(()),
                    Target::Creature(t) => {
                        let d = opp.creature(t).ok_or(Illegal::BadTarget)?;
                        if d.lane != a.lane {
                            Err(Illegal::OtherLane)
                        } else if guarded && !d.has(Keyword::Guard) {
                            Err(Illegal::GuardFirst)
                        } else {
                            Ok(())
                        }
                    }
                }
            }
            Action::Pick(_) | Action::Choose(_) => Err(Illegal::WrongPhase),
        }
    }

    /// Applies one action for the active player. Illegal actions are logged
    /// and skipped under `Lenient`; under `Strict` the actor loses.
    pub fn apply_action(
        &mut self,
        action: &Action,
        policy: Policy,
        log: &mut TransitionLog,
    ) -> Result<(), Rejected> {
        if let Err(reason) = self.check_action(action) {
            let player = self.active;
            log.push(Event::Ignored { player, action: action.clone(), reason });
            if policy == Policy::Strict && !self.is_over() {
                self.finish(Outcome::Won(1 - player), EndReason::InvalidStrict, log);
                return Err(Rejected { player, action: action.clone(), reason });
            }
            return Ok(());
        }
        match *action {
            Action::Summon { id, lane } => self.summon_creature(id, lane as usize, log),
            Action::Use { id, target } => self.apply_item(id, target, log),
            Action::Attack { id, target } => self.resolve_attack(id, target, log),
            _ => {}
        }
        self.update_outcome(log);
        self.debug_audit();
        Ok(())
    }

    fn play_from_hand(&mut self, id: i32, log: &mut TransitionLog) -> Card {
        let p = self.active;
        let player = &mut self.players[p];
        let pos = player
            .hand
            .iter()
            .position(|h| h.instance_id == id)
            .expect("played card must be in hand");
        let card = player.hand.remove(pos).card;
        player.mana -= card.cost;
        log.push(Event::CardPlayed { player: p, instance_id: id, card, mana_after: player.mana });
        card
    }

    fn apply_card_effects(&mut self, card: &Card, log: &mut TransitionLog) {
        let me = self.active;
        self.change_health(me, card.my_health_change, log);
        self.change_health(1 - me, card.opponent_health_change, log);
        if card.card_draw > 0 {
            self.players[me].next_turn_draw += card.card_draw;
            self.log_bookkeeping(me, log);
        }
    }

    /// Places a creature from hand into `lane`, plus area copies (v1.5).
    /// Legality is a precondition.
    pub fn summon_creature(&mut self, id: i32, lane: usize, log: &mut TransitionLog) {
        let p = self.active;
        let card = self.play_from_hand(id, log);
        self.place(p, Creature::from_card(id, card, lane), log);

        let lane_size = self.config.lane_size();
        let copy_lane = match card.area {
            Area::Target => None,
            Area::Lane1 => Some(lane),
            Area::Lane2 if self.config.lanes() > 1 => Some(1 - lane),
            Area::Lane2 => None,
        };
        if let Some(copy_lane) = copy_lane {
            if self.players[p].lanes[copy_lane].len() < lane_size {
                let copy_id = self.next_instance_id;
                self.next_instance_id += 1;
                self.place(p, Creature::from_card(copy_id, card, copy_lane), log);
            }
        }
        self.apply_card_effects(&card, log);
    }

    fn place(&mut self, p: usize, creature: Creature, log: &mut TransitionLog) {
        self.players[p].lanes[creature.lane].push(creature);
        log.push(Event::Summoned { player: p, creature });
    }

    /// Uses an item from hand on `target`. Legality is a precondition.
    pub fn apply_item(&mut self, id: i32, target: Target, log: &mut TransitionLog) {
        let me = self.active;
        let opp = 1 - me;
        let card = self.play_from_hand(id, log);
        match (card.card_type, target) {
            (CardType::GreenItem, Target::Creature(t)) => {
                for cid in self.area_targets(me, t, card.area) {
                    let c = self.players[me].creature_mut(cid).expect("area target");
                    c.attack += card.attack;
                    c.defense += card.defense;
                    c.keywords = c.keywords.union(card.keywords);
                    let c = *c;
                    log_update(me, &c, log);
                }
                self.remove_dead(me, log);
            }
            (CardType::RedItem | CardType::BlueItem, Target::Creature(t)) => {
                for cid in self.area_targets(opp, t, card.area) {
                    let c = self.players[opp].creature_mut(cid).expect("area target");
                    if card.defense < 0 {
                        if c.has(Keyword::Ward) {
                            c.keywords = c.keywords.without(Keyword::Ward);
                        } else {
                            c.defense += card.defense;
                        }
                    }
                    c.attack = (c.attack + card.attack).max(0);
                    c.keywords = c.keywords.difference(card.keywords);
                    let c = *c;
                    log_update(opp, &c, log);
                }
                self.remove_dead(opp, log);
            }
            (CardType::BlueItem, Target::Face) => self.change_health(opp, card.defense, log),
            _ => unreachable!("item legality is a precondition"),
        }
        self.apply_card_effects(&card, log);
    }

    fn area_targets(&self, side: usize, target: i32, area: Area) -> Vec<i32> {
        let player = &self.players[side];
        match area {
            Area::Target => vec![target],
            Area::Lane1 => {
                let lane = player.creature(target).map_or(0, |c| c.lane);
                player.lanes[lane].iter().map(|c| c.instance_id).collect()
            }
            Area::Lane2 => player.creatures().map(|c| c.instance_id).collect(),
        }
    }

    /// Resolves an attack by the active player's creature. Both creatures
    /// strike simultaneously. Legality is a precondition.
    pub fn resolve_attack(&mut self, attacker: i32, target: Target, log: &mut TransitionLog) {
        let me = self.active;
        let opp = 1 - me;
        log.push(Event::Attacked { owner: me, attacker, target });
        let a = {
            let c = self.players[me].creature_mut(attacker).expect("attacker on board");
            c.attacked_this_turn = true;
            *c
        };
        match target {
            Target::Face => {
                if a.attack > 0 {
                    self.change_health(opp, -a.attack, log);
                    if a.has(Keyword::Drain) {
                        self.change_health(me, a.attack, log);
                    }
                }
            }
            Target::Creature(t) => {
                let d = *self.players[opp].creature(t).expect("defender on board");
                let (d_after, to_defender) = strike(&d, a.attack);
                let (a_after, to_attacker) = strike(&a, d.attack);
                let defender_dies =
                    d_after.defense <= 0 || (to_defender > 0 && a.has(Keyword::Lethal));
                let attacker_dies =
                    a_after.defense <= 0 || (to_attacker > 0 && d.has(Keyword::Lethal));

                if d_after != d {
                    *self.players[opp].creature_mut(t).expect("defender") = d_after;
                    log_update(opp, &d_after, log);
                }
                if a_after.keywords != a.keywords || a_after.defense != a.defense {
                    *self.players[me].creature_mut(attacker).expect("attacker") = a_after;
                    log_update(me, &a_after, log);
                }
                if a.has(Keyword::Breakthrough) && to_defender > d.defense {
                    self.change_health(opp, d.defense - to_defender, log);
                }
                if a.has(Keyword::Drain) && to_defender > 0 {
                    self.change_health(me, to_defender, log);
                }
                if defender_dies {
                    self.kill(opp, t, log);
                }
                if attacker_dies {
                    self.kill(me, attacker, log);
                }
            }
        }
    }

    fn kill(&mut self, owner: usize, id: i32, log: &mut TransitionLog) {
        for lane in &mut self.players[owner].lanes {
            lane.retain(|c| c.instance_id != id);
        }
        log.push(Event::CreatureDied { owner, instance_id: id });
    }

    fn remove_dead(&mut self, owner: usize, log: &mut TransitionLog) {
        let dead: Vec<i32> = self.players[owner]
            .creatures()
            .filter(|c| c.defense <= 0)
            .map(|c| c.instance_id)
            .collect();
        for id in dead {
            self.kill(owner, id, log);
        }
    }

    /// Adds `delta` to a player's health, breaking runes (v1.0/1.2) or
    /// counting enemy-turn losses (v1.5).
    pub(crate) fn change_health(&mut self, p: usize, delta: i32, log: &mut TransitionLog) {
        if delta == 0 {
            return;
        }
        let uses_runes = self.config.version.uses_runes();
        let enemy_turn = p != self.active;
        let cap = self.config.health_cap;
        let player = &mut self.players[p];
        let before = player.health;
        let mut after = before.saturating_add(delta);
        if let (Some(cap), true) = (cap, delta > 0) {
            after = after.min(cap.max(before));
        }
        if after == before {
            return;
        }
        player.health = after;
        log.push(Event::HealthChanged { player: p, before, after });
        if after > before {
            return;
        }
        let mut touched = false;
        if uses_runes {
            while let Some(&threshold) = player.runes().first() {
                if after > threshold {
                    break;
                }
                player.rune_count -= 1;
                player.next_turn_draw += 1;
                log.push(Event::RuneBroken { player: p, threshold });
                touched = true;
            }
        } else if enemy_turn {
            player.health_lost_enemy_turn += before - after;
            touched = true;
        }
        if touched {
            self.log_bookkeeping(p, log);
        }
    }

    fn log_bookkeeping(&self, p: usize, log: &mut TransitionLog) {
        let player = &self.players[p];
        log.push(Event::Bookkeeping {
            player: p,
            next_turn_draw: player.next_turn_draw,
            health_lost_enemy_turn: player.health_lost_enemy_turn,
        });
    }

    /// Win/draw detection. When both players are at zero or below, the
    /// active player wins. Draws only come from the hard turn cap.
    pub fn check_end(&self) -> GameStatus {
        if let Some(outcome) = self.outcome {
            return match outcome {
                Outcome::Won(p) => GameStatus::Won(p),
                Outcome::Draw => GameStatus::Draw,
            };
        }
        let dead = [self.players[0].health <= 0, self.players[1].health <= 0];
        match dead {
            [true, true] => GameStatus::Won(self.active),
            [true, false] => GameStatus::Won(1),
            [false, true] => GameStatus::Won(0),
            [false, false] if self.turn >= self.config.max_turns => {
                let (h0, h1) = (self.players[0].health, self.players[1].health);
                match h0.cmp(&h1) {
                    std::cmp::Ordering::Greater => GameStatus::Won(0),
                    std::cmp::Ordering::Less => GameStatus::Won(1),
                    std::cmp::Ordering::Equal => GameStatus::Draw,
                }
            }
            [false, false] => GameStatus::Ongoing,
        }
    }

    fn update_outcome(&mut self, log: &mut TransitionLog) {
        if self.is_over() {
            return;
        }
        let health_zero = self.players.iter().any(|p| p.health <= 0);
        let reason = if health_zero { EndReason::HealthZero } else { EndReason::HardCap };
        match self.check_end() {
            GameStatus::Ongoing => {}
            GameStatus::Won(p) => self.finish(Outcome::Won(p), reason, log),
            GameStatus::Draw => self.finish(Outcome::Draw, reason, log),
        }
    }

    /// Ends the game with the given outcome.
    pub fn finish(&mut self, outcome: Outcome, reason: EndReason, log: &mut TransitionLog) {
        self.outcome = Some(outcome);
        self.end_reason = Some(reason);
        self.phase = Phase::Finished;
        log.push(Event::GameOver { outcome, reason });
    }

    /// Hands the turn to the other player. The round counter advances after
    /// player 1 moves; at the deck-out round both decks are emptied.
    pub fn end_turn(&mut self, log: &mut TransitionLog) {
        if self.phase != Phase::Battle || self.is_over() {
            return;
        }
        let p = self.active;
        let player = &mut self.players[p];
        if player.bonus_this_turn && player.bonus_mana && player.mana == 0 {
            player.bonus_mana = false;
            log.push(Event::BonusManaExpired { player: p });
        }
        let next = 1 - p;
        if next == 0 {
            self.turn += 1;
        }
        self.active = next;
        log.push(Event::TurnEnded { player: p, next_active: next, turn: self.turn });
        if self.turn >= self.config.deck_empty_turn && self.players.iter().any(|p| !p.deck.is_empty()) {
            for player in &mut self.players {
                player.deck.clear();
            }
            log.push(Event::DecksCleared);
        }
        self.update_outcome(log);
        self.debug_audit();
    }

    #[inline]
    fn debug_audit(&self) {
        #[cfg(debug_assertions)]
        if let Err(e) = self.audit() {
            panic!("state invariant broken: {e}\n{self:#?}");
        }
    }
}

/// One creature taking a hit of `attack`. Returns the creature afterwards and
/// the damage that got through Ward.
fn strike(c: &Creature, attack: i32) -> (Creature, i32) {
    let mut out = *c;
    if attack <= 0 {
        return (out, 0);
    }
    if c.has(Keyword::Ward) {
        out.keywords = out.keywords.without(Keyword::Ward);
        return (out, 0);
    }
    out.defense -= attack;
    (out, attack)
}

fn log_update(owner: usize, c: &Creature, log: &mut TransitionLog) {
    log.push(Event::CreatureUpdated {
        owner,
        instance_id: c.instance_id,
        attack: c.attack,
        defense: c.defense,
        keywords: c.keywords,
    });
}
