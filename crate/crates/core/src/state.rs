//! Match state: players, boards, turn bookkeeping.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::card::{Card, Keyword, KeywordSet};
use crate::config::{RulesetConfig, RUNE_THRESHOLDS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Draft,
    Construction,
    Battle,
    Finished,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Won(usize),
    Draw,
}

impl Outcome {
    pub fn winner(self) -> Option<usize> {
        match self {
            Outcome::Won(p) => Some(p),
            Outcome::Draw => None,
        }
    }
}

/// Why a match ended. The last three are agent forfeits reported by the
/// runtime; the engine only produces the first three.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EndReason {
    HealthZero,
    HardCap,
    InvalidStrict,
    Timeout,
    Crash,
    Disqualified,
}

impl EndReason {
    pub fn is_forfeit(self) -> bool {
        matches!(
            self,
            EndReason::InvalidStrict | EndReason::Timeout | EndReason::Crash | EndReason::Disqualified
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandCard {
    pub instance_id: i32,
    pub card: Card,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Creature {
    pub instance_id: i32,
    pub card: Card,
    pub attack: i32,
    pub defense: i32,
    pub keywords: KeywordSet,
    pub lane: usize,
    pub attacked_this_turn: bool,
    pub summoned_this_turn: bool,
}

impl Creature {
    pub fn from_card(instance_id: i32, card: Card, lane: usize) -> Self {
        Creature {
            instance_id,
            card,
            attack: card.attack,
            defense: card.defense,
            keywords: card.keywords,
            lane,
            attacked_this_turn: false,
            summoned_this_turn: true,
        }
    }

    pub fn has(&self, keyword: Keyword) -> bool {
        self.keywords.has(keyword)
    }

    pub fn can_attack(&self) -> bool {
        !self.attacked_this_turn && (!self.summoned_this_turn || self.has(Keyword::Charge))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerState {
    pub health: i32,
    pub mana: i32,
    pub max_mana: i32,
    /// Top of the deck is the last element.
    pub deck: Vec<Card>,
    pub hand: Vec<HandCard>,
    /// Number of unbroken runes; they are always the lowest thresholds.
    pub rune_count: usize,
    pub next_turn_draw: i32,
    pub health_lost_enemy_turn: i32,
    /// Second-player bonus mana still granted at turn start.
    pub bonus_mana: bool,
    /// Bonus mana was granted this turn.
    pub bonus_this_turn: bool,
    pub lanes: [Vec<Creature>; 2],
}

impl PlayerState {
    pub fn new(config: &RulesetConfig, deck: Vec<Card>, bonus_mana: bool) -> Self {
        PlayerState {
            health: config.starting_health,
            mana: 0,
            max_mana: 0,
            deck,
            hand: Vec::new(),
            rune_count: if config.version.uses_runes() { RUNE_THRESHOLDS.len() } else { 0 },
            next_turn_draw: 1,
            health_lost_enemy_turn: 0,
            bonus_mana,
            bonus_this_turn: false,
            lanes: [Vec::new(), Vec::new()],
        }
    }

    /// Remaining rune thresholds, highest first.
    pub fn runes(&self) -> &[i32] {
        &RUNE_THRESHOLDS[RUNE_THRESHOLDS.len() - self.rune_count..]
    }

    pub fn creatures(&self) -> impl Iterator<Item = &Creature> {
        self.lanes.iter().flatten()
    }

    pub fn creature(&self, id: i32) -> Option<&Creature> {
        self.creatures().find(|c| c.instance_id == id)
    }

    pub fn creature_mut(&mut self, id: i32) -> Option<&mut Creature> {
        self.lanes.iter_mut().flatten().find(|c| c.instance_id == id)
    }

    pub fn hand_card(&self, id: i32) -> Option<&HandCard> {
        self.hand.iter().find(|h| h.instance_id == id)
    }

    pub fn has_guard_in(&self, lane: usize) -> bool {
        self.lanes[lane].iter().any(|c| c.has(Keyword::Guard))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameState {
    pub config: RulesetConfig,
    pub phase: Phase,
    pub players: [PlayerState; 2],
    /// Round counter, starting at 1; advances once both players have moved.
    pub turn: u32,
    pub active: usize,
    pub outcome: Option<Outcome>,
    pub end_reason: Option<EndReason>,
    pub next_instance_id: i32,
}

impl GameState {
    /// A state at the start of the battle phase. Nobody has drawn yet; the
    /// first `begin_turn` hands player 0 its cards.
    pub fn new_battle(config: RulesetConfig, decks: [Vec<Card>; 2]) -> Self {
        let [d0, d1] = decks;
        GameState {
            config,
            phase: crate::state::Phase::Battle,
            players: [
                PlayerState::new(&config, d0, false),
                PlayerState::new(&config, d1, config.second_player_bonus),
            ],
            turn: 1,
            active: 0,
            outcome: None,
            end_reason: None,
            next_instance_id: 1,
        }
    }

    pub fn me(&self) -> &PlayerState {
        &self.players[self.active]
    }

    pub fn opponent(&self) -> &PlayerState {
        &self.players[1 - self.active]
    }

    pub fn is_over(&self) -> bool {
        self.outcome.is_some()
    }

    /// Owner and creature for an instance id on either board.
    pub fn find_creature(&self, id: i32) -> Option<(usize, &Creature)> {
        (0..2).find_map(|p| self.players[p].creature(id).map(|c| (p, c)))
    }

    /// Checks every state invariant; returns the first violation found.
    pub fn audit(&self) -> Result<(), String> {
        let cfg = &self.config;
        if (self.phase == Phase::Finished) != self.outcome.is_some() {
            return Err(format!("phase {:?} inconsistent with outcome {:?}", self.phase, self.outcome));
        }
        if self.active > 1 {
            return Err("active player out of range".into());
        }
        let mut ids = HashSet::new();
        for (p, player) in self.players.iter().enumerate() {
            if player.hand.len() > cfg.hand_limit {
                return Err(format!("player {p} holds {} cards", player.hand.len()));
            }
            if player.max_mana > cfg.max_mana || player.max_mana < 0 {
                return Err(format!("player {p} max mana {}", player.max_mana));
            }
            let bonus = i32::from(player.bonus_this_turn);
            if player.mana < 0 || player.mana > player.max_mana + bonus {
                return Err(format!("player {p} mana {} of {}+{bonus}", player.mana, player.max_mana));
            }
            if player.next_turn_draw < 1 || player.health_lost_enemy_turn < 0 {
                return Err(format!("player {p} draw bookkeeping negative"));
            }
            if !cfg.version.uses_runes() && player.rune_count != 0 {
                return Err(format!("player {p} has runes in {}", cfg.version));
            }
            if self.phase != Phase::Finished && player.runes().iter().any(|&t| t >= player.health) {
                return Err(format!("player {p} has an unbroken rune at or above health {}", player.health));
            }
            for (lane, creatures) in player.lanes.iter().enumerate() {
                if lane >= cfg.lanes() && !creatures.is_empty() {
                    return Err(format!("player {p} uses lane {lane}"));
                }
                if creatures.len() > cfg.lane_size() {
                    return Err(format!("player {p} lane {lane} holds {}", creatures.len()));
                }
                for c in creatures {
                    if c.defense <= 0 {
                        return Err(format!("creature {} on board with defense {}", c.instance_id, c.defense));
                    }
                    if c.lane != lane {
                        return Err(format!("creature {} lane tag mismatch", c.instance_id));
                    }
                    if c.attack < 0 {
                        return Err(format!("creature {} negative attack", c.instance_id));
                    }
                    if c.summoned_this_turn && !c.has(Keyword::Charge) && c.can_attack() {
                        return Err(format!("creature {} can attack while summoning sick", c.instance_id));
                    }
                    if !ids.insert(c.instance_id) {
                        return Err(format!("duplicate instance id {}", c.instance_id));
                    }
                }
            }
            for h in &player.hand {
                if !ids.insert(h.instance_id) {
                    return Err(format!("duplicate instance id {}", h.instance_id));
                }
            }
        }
        if ids.iter().any(|&id| id <= 0 || id >= self.next_instance_id) {
            return Err("instance id outside issued range".into());
        }
        Ok(())
    }
}
