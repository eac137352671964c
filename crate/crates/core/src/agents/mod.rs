//! Reference agents. Each one sees only the [`AgentView`] it is handed, so the
//! same code runs in-process or behind the text protocol.

mod baseline;
mod greedy;
mod random;

pub use baseline::{Baseline1, Baseline2};
pub use greedy::{Greedy, GreedyWeights};
pub use random::{RandomAgent, RandomWItems2Lanes};

use crate::action::{Action, Target};
use crate::card::{Card, CardType, Keyword};
use crate::config::{RulesetConfig, HAND_LIMIT};
use crate::event::TransitionLog;
use crate::protocol::{AgentView, Location};
use crate::state::{Creature, GameState, HandCard, Phase, PlayerState};

pub trait Agent: Send {
    fn name(&self) -> &str;
    /// Identical views always produce identical actions.
    fn deterministic(&self) -> bool;
    /// Draft: one `Pick`. Construction: one `Choose`. Battle: the actions of
    /// the whole turn in order.
    fn act(&mut self, view: &AgentView) -> Vec<Action>;
}

pub const BUILTIN_NAMES: [&str; 5] = ["baseline1", "baseline2", "random2lanes", "random", "greedy"];

/// A builtin agent by name; `seed` drives the stochastic ones.
pub fn by_name(name: &str, seed: u64) -> Option<Box<dyn Agent>> {
    Some(match name {
        "baseline1" => Box::new(Baseline1),
        "baseline2" => Box::new(Baseline2),
        "random2lanes" => Box::new(RandomWItems2Lanes::new(seed)),
        "random" => Box::new(RandomAgent::new(seed)),
        "greedy" => Box::new(Greedy::default()),
        _ => return None,
    })
}

impl GameState {
    /// Rebuilds a battle state from the viewpoint's turn input: the viewpoint
    /// is active and its creatures are ready. Hidden zones (decks, opponent
    /// hand) are left empty, which is enough to simulate one's own turn.
    pub fn from_view(view: &AgentView) -> GameState {
        let config = RulesetConfig::new(view.version);
        let mut players = [
            PlayerState::new(&config, Vec::new(), false),
            PlayerState::new(&config, Vec::new(), false),
        ];
        let mut next_id = 1;
        for cv in &view.cards {
            next_id = next_id.max(cv.instance_id + 1);
            match cv.location {
                Location::Hand => {
                    if players[0].hand.len() < HAND_LIMIT {
                        players[0].hand.push(HandCard { instance_id: cv.instance_id, card: cv.card });
                    }
                }
                Location::MyBoard | Location::EnemyBoard => {
                    let owner = usize::from(cv.location == Location::EnemyBoard);
                    let lane = usize::try_from(cv.lane).unwrap_or(0).min(config.lanes() - 1);
                    let mut c = Creature::from_card(cv.instance_id, cv.card, lane);
                    c.summoned_this_turn = false;
                    if c.defense > 0 && players[owner].lanes[lane].len() < config.lane_size() {
                        players[owner].lanes[lane].push(c);
                    }
                }
            }
        }
        for (p, s) in players.iter_mut().zip([&view.me, &view.opponent]) {
            p.health = s.health;
            if config.version.uses_runes() {
                p.rune_count = (s.extra.clamp(0, 5) as usize).min(p.runes().len());
                let below = crate::config::RUNE_THRESHOLDS.iter().filter(|&&t| t < s.health).count();
                p.rune_count = p.rune_count.min(below);
            } else {
                p.next_turn_draw = s.extra.max(1);
            }
        }
        let me = &mut players[0];
        me.max_mana = view.me.mana.clamp(0, config.max_mana);
        me.mana = view.me.mana.clamp(0, config.max_mana + 1);
        me.bonus_this_turn = me.mana > me.max_mana;
        players[1].max_mana = view.opponent.mana.clamp(0, config.max_mana);
        GameState {
            config,
            phase: Phase::Battle,
            players,
            turn: 1,
            active: 0,
            outcome: None,
            end_reason: None,
            next_instance_id: next_id,
        }
    }
}

/// Local simulation of one turn. Actions are applied to the rebuilt state and
/// recorded for output.
#[derive(Clone)]
pub(crate) struct TurnSim {
    pub state: GameState,
    pub actions: Vec<Action>,
    /// Ids issued locally (area copies) are unknown to the real engine.
    first_local_id: i32,
    log: TransitionLog,
}

impl TurnSim {
    pub fn new(view: &AgentView) -> Self {
        let state = GameState::from_view(view);
        let first_local_id = state.next_instance_id;
        TurnSim { state, actions: Vec::new(), first_local_id, log: Vec::new() }
    }

    pub fn known(&self, action: &Action) -> bool {
        match *action {
            Action::Attack { id, target } | Action::Use { id, target } => {
                id < self.first_local_id && target != Target::Creature(id) && match target {
                    Target::Creature(t) => t < self.first_local_id,
                    Target::Face => true,
                }
            }
            _ => true,
        }
    }

    /// Applies `action` if it is legal; returns whether it was.
    pub fn play(&mut self, action: Action) -> bool {
        if self.state.is_over() || !self.known(&action) || self.state.check_action(&action).is_err() {
            return false;
        }
        self.log.clear();
        let _ = self.state.apply_action(&action, crate::action::Policy::Lenient, &mut self.log);
        self.actions.push(action);
        true
    }

    pub fn over(&self) -> bool {
        self.state.is_over()
    }

    pub fn hand_ids(&self) -> Vec<(i32, Card)> {
        self.state.players[0].hand.iter().map(|h| (h.instance_id, h.card)).collect()
    }

    pub fn mana(&self) -> i32 {
        self.state.players[0].mana
    }

    /// Own creatures that may still attack, in board order.
    pub fn ready(&self) -> Vec<Creature> {
        self.state.players[0]
            .creatures()
            .filter(|c| c.can_attack() && c.instance_id < self.first_local_id)
            .copied()
            .collect()
    }

    /// Enemy Guards in `lane`, or all enemies there plus the face when none.
    pub fn attack_targets(&self, lane: usize) -> Vec<Target> {
        let enemy = &self.state.players[1];
        if enemy.has_guard_in(lane) {
            enemy.lanes[lane]
                .iter()
                .filter(|c| c.has(Keyword::Guard))
                .map(|c| Target::Creature(c.instance_id))
                .collect()
        } else {
            let mut out = vec![Target::Face];
            out.extend(enemy.lanes[lane].iter().map(|c| Target::Creature(c.instance_id)));
            out
        }
    }

    pub fn open_lanes(&self) -> Vec<usize> {
        let size = self.state.config.lane_size();
        (0..self.state.config.lanes())
            .filter(|&l| self.state.players[0].lanes[l].len() < size)
            .collect()
    }

    pub fn item_targets(&self, kind: CardType) -> Vec<Target> {
        let side = usize::from(kind != CardType::GreenItem);
        let mut out: Vec<Target> =
            self.state.players[side].creatures().map(|c| Target::Creature(c.instance_id)).collect();
        if kind == CardType::BlueItem {
            out.push(Target::Face);
        }
        out
    }
}

/// Index of the first option satisfying `pred`, else 0.
fn first_index(options: &[Card], pred: impl Fn(&Card) -> bool) -> i32 {
    options.iter().position(pred).unwrap_or(0) as i32
}

/// Construction by preference: walks `order` taking up to two copies each
/// until the deck is full.
fn choose_in_order(pool: &[Card], order: impl IntoIterator<Item = usize>, deck_size: usize) -> Action {
    let mut picks = Vec::with_capacity(deck_size);
    for i in order {
        for _ in 0..crate::config::MAX_COPIES {
            if picks.len() < deck_size {
                picks.push(pool[i].number);
            }
        }
    }
    Action::Choose(picks)
}

fn options(view: &AgentView) -> Vec<Card> {
    view.hand().map(|c| c.card).collect()
}
