use super::{choose_in_order, first_index, options, Agent, TurnSim};
use crate::action::{Action, Target};
use crate::card::{CardType, Keyword};
use crate::protocol::AgentView;
use crate::state::Phase;

/// Drafts Guard creatures; plays every affordable card, then attacks the
/// face unless a Guard is in the way.
#[derive(Clone, Copy, Debug, Default)]
pub struct Baseline1;

fn is_guard(c: &crate::card::Card) -> bool {
    c.is_creature() && c.keywords.has(Keyword::Guard)
}

impl Agent for Baseline1 {
    fn name(&self) -> &str {
        "baseline1"
    }

    fn deterministic(&self) -> bool {
        true
    }

    fn act(&mut self, view: &AgentView) -> Vec<Action> {
        match view.phase {
            Phase::Draft => vec![Action::Pick(first_index(&options(view), is_guard))],
            Phase::Construction => {
                let pool = options(view);
                let guards = (0..pool.len()).filter(|&i| is_guard(&pool[i]));
                let rest = (0..pool.len()).filter(|&i| !is_guard(&pool[i]));
                vec![choose_in_order(&pool, guards.chain(rest), crate::config::DECK_SIZE)]
            }
            _ => battle1(view),
        }
    }
}

fn battle1(view: &AgentView) -> Vec<Action> {
    let mut sim = TurnSim::new(view);
    for (id, card) in sim.hand_ids() {
        if card.cost > sim.mana() {
            continue;
        }
        match card.card_type {
            CardType::Creature => {
                if let Some(&lane) = sim.open_lanes().first() {
                    sim.play(Action::Summon { id, lane: lane as i32 });
                }
            }
            kind => {
                let targets = sim.item_targets(kind);
                let target = if kind == CardType::BlueItem { Some(Target::Face) } else { targets.first().copied() };
                if let Some(target) = target {
                    sim.play(Action::Use { id, target });
                }
            }
        }
    }
    attack_all(&mut sim);
    sim.actions
}

/// Every ready creature attacks the face, or the first Guard blocking it.
fn attack_all(sim: &mut TurnSim) {
    for c in sim.ready() {
        if let Some(&target) = sim.attack_targets(c.lane).first() {
            sim.play(Action::Attack { id: c.instance_id, target });
        }
    }
}

/// Drafts the hardest hitters; attacks with everything, then summons every
/// affordable creature into the emptiest lane.
#[derive(Clone, Copy, Debug, Default)]
pub struct Baseline2;

impl Agent for Baseline2 {
    fn name(&self) -> &str {
        "baseline2"
    }

    fn deterministic(&self) -> bool {
        true
    }

    fn act(&mut self, view: &AgentView) -> Vec<Action> {
        match view.phase {
            Phase::Draft => {
                let opts = options(view);
                let best = opts
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.is_creature())
                    .min_by_key(|&(i, c)| (-c.attack, i))
                    .map_or(0, |(i, _)| i as i32);
                vec![Action::Pick(best)]
            }
            Phase::Construction => {
                let pool = options(view);
                let mut order: Vec<usize> = (0..pool.len()).filter(|&i| pool[i].is_creature()).collect();
                order.sort_by_key(|&i| (-pool[i].attack, i));
                order.extend((0..pool.len()).filter(|&i| !pool[i].is_creature()));
                vec![choose_in_order(&pool, order, crate::config::DECK_SIZE)]
            }
            _ => {
                let mut sim = TurnSim::new(view);
                attack_all(&mut sim);
                for (id, card) in sim.hand_ids() {
                    if !card.is_creature() || card.cost > sim.mana() {
                        continue;
                    }
                    let lanes = sim.open_lanes();
                    let emptiest = lanes.iter().min_by_key(|&&l| (sim.state.players[0].lanes[l].len(), l));
                    if let Some(&lane) = emptiest {
                        sim.play(Action::Summon { id, lane: lane as i32 });
                    }
                }
                sim.actions
            }
        }
    }
}
