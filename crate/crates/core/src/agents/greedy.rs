use serde::{Deserialize, Serialize};

use super::{choose_in_order, options, Agent, TurnSim};
use crate::action::{Action, Target};
use crate::card::{Card, Keyword};
use crate::protocol::AgentView;
use crate::state::{Creature, GameState, Outcome, Phase};

/// Linear evaluation weights of [`Greedy`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GreedyWeights {
    pub my_health: f64,
    pub enemy_health: f64,
    pub attack: f64,
    pub defense: f64,
    pub creature: f64,
    pub guard: f64,
    pub ward: f64,
    pub lethal: f64,
    pub drain: f64,
    pub breakthrough: f64,
    pub hand_card: f64,
    /// Value a card must bring per mana of cost.
    pub mana_cost: f64,
    /// Deck slots per cost bucket 0-1, 2, 3, 4, 5, 6, 7+.
    pub curve: [usize; 7],
    /// Draft score shift for filling (or overfilling) a curve bucket.
    pub curve_bonus: f64,
    /// Per card the opponent will draw beyond the usual one.
    pub enemy_draw: f64,
    /// Nodes explored by the lethal search before giving up.
    pub lethal_budget: usize,
}

impl Default for GreedyWeights {
    fn default() -> Self {
        GreedyWeights {
            my_health: 1.0,
            enemy_health: 1.0,
            attack: 1.5,
            defense: 1.0,
            creature: 2.0,
            guard: 1.0,
            ward: 1.5,
            lethal: 1.5,
            drain: 0.5,
            breakthrough: 0.5,
            hand_card: 0.25,
            mana_cost: 2.5,
            curve: [3, 5, 6, 5, 4, 3, 4],
            curve_bonus: 6.0,
            enemy_draw: 2.0,
            lethal_budget: 20_000,
        }
    }
}

const WIN: f64 = 1e9;

impl GreedyWeights {
    pub fn creature_value(&self, c: &Creature) -> f64 {
        let kw = |k: Keyword, w: f64| if c.has(k) { w } else { 0.0 };
        self.attack * f64::from(c.attack)
            + self.defense * f64::from(c.defense)
            + self.creature
            + kw(Keyword::Guard, self.guard)
            + kw(Keyword::Ward, self.ward)
            + kw(Keyword::Lethal, self.lethal)
            + kw(Keyword::Drain, self.drain)
            + kw(Keyword::Breakthrough, self.breakthrough)
    }

    /// Score of `state` from player `me`'s side.
    pub fn evaluate(&self, state: &GameState, me: usize) -> f64 {
        match state.outcome {
            Some(Outcome::Won(p)) if p == me => return WIN,
            Some(Outcome::Won(_)) => return -WIN,
            Some(Outcome::Draw) => return 0.0,
            None => {}
        }
        let (mine, theirs) = (&state.players[me], &state.players[1 - me]);
        self.my_health * f64::from(mine.health) - self.enemy_health * f64::from(theirs.health)
            + mine.creatures().map(|c| self.creature_value(c)).sum::<f64>()
            - theirs.creatures().map(|c| self.creature_value(c)).sum::<f64>()
            + self.hand_card * mine.hand.len() as f64
            - self.enemy_draw * f64::from(pending_draws(state, 1 - me) - 1)
    }

    /// Cost bucket of the mana curve.
    pub fn bucket(cost: i32) -> usize {
        (cost.max(1) - 1).min(6) as usize
    }

    /// Pre-battle worth of a card net of its cost.
    pub fn card_value(&self, card: &Card) -> f64 {
        let mut c = Creature::from_card(0, *card, 0);
        let raw = if card.is_creature() {
            self.creature_value(&c)
        } else {
            c.attack = card.attack.abs();
            c.defense = card.defense.abs();
            0.8 * (self.creature_value(&c) - self.creature)
        };
        let effects = f64::from(card.my_health_change.max(0) - card.opponent_health_change.min(0))
            + 2.0 * f64::from(card.card_draw);
        raw + effects - self.mana_cost * f64::from(card.cost)
    }
}

fn pending_draws(state: &GameState, p: usize) -> i32 {
    let player = &state.players[p];
    let mut draws = player.next_turn_draw;
    if !state.config.version.uses_runes() {
        draws += player.health_lost_enemy_turn / crate::config::HEALTH_PER_BONUS_DRAW;
    }
    draws
}

/// One-step lookahead: applies the best-scoring legal action until passing
/// scores best. Checks for a winning sequence first.
#[derive(Clone, Debug, Default)]
pub struct Greedy {
    pub weights: GreedyWeights,
    /// Draft picks so far per cost bucket.
    drafted: [usize; 7],
}

impl Greedy {
    pub fn new(weights: GreedyWeights) -> Self {
        Greedy { weights, drafted: [0; 7] }
    }

    fn candidates(sim: &TurnSim) -> Vec<Action> {
        sim.state
            .legal_actions()
            .into_iter()
            .filter(|a| *a != Action::Pass && sim.known(a))
            .collect()
    }

    /// A sequence of actions that wins this turn, if one is found within the
    /// node budget. Face attacks are tried first.
    pub fn find_lethal(&self, view: &AgentView) -> Option<Vec<Action>> {
        let sim = TurnSim::new(view);
        let mut budget = self.weights.lethal_budget;
        let mut path = Vec::new();
        lethal_dfs(&sim, &mut path, &mut budget).then_some(path)
    }

    fn battle(&self, view: &AgentView) -> Vec<Action> {
        if let Some(line) = self.find_lethal(view) {
            return line;
        }
        let mut sim = TurnSim::new(view);
        while !sim.over() {
            let current = self.weights.evaluate(&sim.state, 0);
            let mut best: Option<(f64, Action)> = None;
            for a in Self::candidates(&sim) {
                let mut s = sim.state.clone();
                let mut log = Vec::new();
                let _ = s.apply_action(&a, crate::action::Policy::Lenient, &mut log);
                let score = self.weights.evaluate(&s, 0);
                if best.as_ref().map_or(true, |(b, _)| score > *b) {
                    best = Some((score, a));
                }
            }
            match best {
                Some((score, a)) if score > current + 1e-9 => {
                    sim.play(a);
                }
                _ => break,
            }
        }
        sim.actions
    }
}

fn lethal_dfs(sim: &TurnSim, path: &mut Vec<Action>, budget: &mut usize) -> bool {
    let mut moves = Greedy::candidates(sim);
    moves.sort_by_key(|a| match a {
        Action::Attack { target: Target::Face, .. } => 0,
        Action::Attack { .. } => 1,
        Action::Use { target: Target::Face, .. } => 0,
        Action::Use { .. } => 2,
        _ => 3,
    });
    for a in moves {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let mut next = sim.clone();
        next.play(a.clone());
        path.push(a);
        match next.state.outcome {
            Some(Outcome::Won(0)) => return true,
            Some(_) => {}
            None => {
                if lethal_dfs(&next, path, budget) {
                    return true;
                }
            }
        }
        path.pop();
    }
    false
}

impl Greedy {
    /// Pool indices best first: each cost bucket filled up to its quota in
    /// value order, then everything else by value.
    fn curve_order(&self, pool: &[Card]) -> Vec<usize> {
        let mut by_value: Vec<usize> = (0..pool.len()).collect();
        by_value.sort_by(|&a, &b| {
            let (va, vb) = (self.weights.card_value(&pool[a]), self.weights.card_value(&pool[b]));
            vb.total_cmp(&va).then(a.cmp(&b))
        });
        let mut slots = self.weights.curve;
        let mut first = Vec::new();
        let mut rest = Vec::new();
        for i in by_value {
            let b = GreedyWeights::bucket(pool[i].cost);
            let copies = crate::config::MAX_COPIES.min(slots[b]);
            if copies > 0 {
                slots[b] -= copies;
                first.push(i);
            } else {
                rest.push(i);
            }
        }
        first.extend(rest);
        first
    }
}

impl Agent for Greedy {
    fn name(&self) -> &str {
        "greedy"
    }

    fn deterministic(&self) -> bool {
        true
    }

    fn act(&mut self, view: &AgentView) -> Vec<Action> {
        match view.phase {
            Phase::Draft => {
                let opts = options(view);
                if view.me.deck_count == 0 {
                    self.drafted = [0; 7];
                }
                let score = |c: &Card| {
                    let b = GreedyWeights::bucket(c.cost);
                    let open = self.drafted[b] < self.weights.curve[b];
                    self.weights.card_value(c) + if open { self.weights.curve_bonus } else { -self.weights.curve_bonus }
                };
                let best = (0..opts.len())
                    .max_by(|&a, &b| score(&opts[a]).total_cmp(&score(&opts[b])).then(b.cmp(&a)))
                    .unwrap_or(0);
                if let Some(c) = opts.get(best) {
                    self.drafted[GreedyWeights::bucket(c.cost)] += 1;
                }
                vec![Action::Pick(best as i32)]
            }
            Phase::Construction => {
                let pool = options(view);
                vec![choose_in_order(&pool, self.curve_order(&pool), crate::config::DECK_SIZE)]
            }
            _ => self.battle(view),
        }
    }
}
