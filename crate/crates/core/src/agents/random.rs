use rand::seq::SliceRandom;
use rand::Rng;

use super::{options, Agent, TurnSim};
use crate::action::Action;
use crate::card::CardType;
use crate::config::{DECK_SIZE, DRAFT_OPTIONS, MAX_COPIES};
use crate::protocol::AgentView;
use crate::rng::{self, GameRng};
use crate::state::Phase;

/// `DECK_SIZE` uniform picks from the pool respecting the copy limit.
fn random_choice(rng: &mut GameRng, view: &AgentView) -> Action {
    let pool = options(view);
    let mut left: Vec<(i32, usize)> = pool.iter().map(|c| (c.number, MAX_COPIES)).collect();
    let mut picks = Vec::with_capacity(DECK_SIZE);
    while picks.len() < DECK_SIZE && !left.is_empty() {
        let i = rng.gen_range(0..left.len());
        picks.push(left[i].0);
        left[i].1 -= 1;
        if left[i].1 == 0 {
            left.swap_remove(i);
        }
    }
    Action::Choose(picks)
}

fn random_pick(rng: &mut GameRng, view: &AgentView) -> Action {
    let n = options(view).len().clamp(1, DRAFT_OPTIONS);
    Action::Pick(rng.gen_range(0..n) as i32)
}

/// Uniform over legal actions (Pass included) until it draws Pass.
#[derive(Clone, Debug)]
pub struct RandomAgent {
    rng: GameRng,
}

impl RandomAgent {
    pub fn new(seed: u64) -> Self {
        RandomAgent { rng: rng::stream(seed) }
    }
}

impl Agent for RandomAgent {
    fn name(&self) -> &str {
        "random"
    }

    fn deterministic(&self) -> bool {
        false
    }

    fn act(&mut self, view: &AgentView) -> Vec<Action> {
        match view.phase {
            Phase::Draft => vec![random_pick(&mut self.rng, view)],
            Phase::Construction => vec![random_choice(&mut self.rng, view)],
            _ => {
                let mut sim = TurnSim::new(view);
                loop {
                    let legal: Vec<Action> =
                        sim.state.legal_actions().into_iter().filter(|a| sim.known(a)).collect();
                    match legal.choose(&mut self.rng) {
                        None | Some(Action::Pass) => break,
                        Some(a) => {
                            sim.play(a.clone());
                        }
                    }
                    if sim.over() {
                        break;
                    }
                }
                sim.actions
            }
        }
    }
}

/// Random play in a fixed order: green items, attacks, summons, then red and
/// blue items.
#[derive(Clone, Debug)]
pub struct RandomWItems2Lanes {
    rng: GameRng,
}

impl RandomWItems2Lanes {
    pub fn new(seed: u64) -> Self {
        RandomWItems2Lanes { rng: rng::stream(seed) }
    }

    fn use_items(&mut self, sim: &mut TurnSim, kinds: &[CardType]) {
        for (id, card) in sim.hand_ids() {
            if !kinds.contains(&card.card_type) || card.cost > sim.mana() {
                continue;
            }
            if let Some(&target) = sim.item_targets(card.card_type).choose(&mut self.rng) {
                sim.play(Action::Use { id, target });
            }
        }
    }

    fn battle(&mut self, view: &AgentView) -> Vec<Action> {
        let mut sim = TurnSim::new(view);
        self.use_items(&mut sim, &[CardType::GreenItem]);
        for c in sim.ready() {
            if let Some(&target) = sim.attack_targets(c.lane).choose(&mut self.rng) {
                sim.play(Action::Attack { id: c.instance_id, target });
            }
        }
        for (id, card) in sim.hand_ids() {
            if !card.is_creature() || card.cost > sim.mana() {
                continue;
            }
            if let Some(&lane) = sim.open_lanes().choose(&mut self.rng) {
                sim.play(Action::Summon { id, lane: lane as i32 });
            }
        }
        self.use_items(&mut sim, &[CardType::RedItem, CardType::BlueItem]);
        sim.actions
    }
}

impl Agent for RandomWItems2Lanes {
    fn name(&self) -> &str {
        "random2lanes"
    }

    fn deterministic(&self) -> bool {
        false
    }

    fn act(&mut self, view: &AgentView) -> Vec<Action> {
        match view.phase {
            Phase::Draft => vec![random_pick(&mut self.rng, view)],
            Phase::Construction => vec![random_choice(&mut self.rng, view)],
            _ => self.battle(view),
        }
    }
}
