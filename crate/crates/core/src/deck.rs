//! Pre-battle phases: the shared 30-turn draft (v1.0/1.2), the single-turn
//! construction from a 120-card pool (v1.5), and deck shuffling.

use std::collections::HashMap;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::action::Policy;
use crate::card::Card;
use crate::cards::CardSet;
use crate::config::{RulesetConfig, DRAFT_OPTIONS};
use crate::event::Illegal;
use crate::rng::{self, tag};

/// The three options of draft turn `turn`. Pure in `(set, seed, turn)`;
/// sampled uniformly without replacement within the turn.
pub fn draft_options(set: &[Card], seed: u64, turn: usize) -> [Card; DRAFT_OPTIONS] {
    assert!(set.len() >= DRAFT_OPTIONS, "card set too small to draft from");
    let mut rng = rng::stream(rng::derive(seed, &[turn as u64, tag::DRAFT]));
    let picked = index::sample(&mut rng, set.len(), DRAFT_OPTIONS);
    std::array::from_fn(|i| set[picked.index(i)])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DraftPick {
    pub card: Card,
    /// The requested index was invalid and option 0 was taken instead.
    pub fallback: bool,
}

/// Draft progress. Both players see the same options each turn; the turn
/// advances once both have picked.
#[derive(Clone, Debug)]
pub struct DraftState {
    set: Vec<Card>,
    seed: u64,
    pub turns: usize,
    pub turn: usize,
    pub options: [Card; DRAFT_OPTIONS],
    pub picks: [Vec<Card>; 2],
}

impl DraftState {
    pub fn new(set: &CardSet, seed: u64, turns: usize) -> Self {
        DraftState {
            set: set.cards.clone(),
            seed,
            turns,
            turn: 0,
            options: draft_options(&set.cards, seed, 0),
            picks: [Vec::with_capacity(turns), Vec::with_capacity(turns)],
        }
    }

    pub fn is_complete(&self) -> bool {
        self.turn >= self.turns
    }

    /// Records `player`'s pick for the current turn. An out-of-range index
    /// takes option 0 under `Lenient` and is refused under `Strict`.
    pub fn apply_pick(&mut self, player: usize, index: i32, policy: Policy) -> Result<DraftPick, Illegal> {
        if self.is_complete() || self.picks[player].len() > self.turn {
            return Err(Illegal::WrongPhase);
        }
        let chosen = usize::try_from(index).ok().filter(|&i| i < DRAFT_OPTIONS);
        let pick = match (chosen, policy) {
            (Some(i), _) => DraftPick { card: self.options[i], fallback: false },
            (None, Policy::Lenient) => DraftPick { card: self.options[0], fallback: true },
            (None, Policy::Strict) => return Err(Illegal::BadPick),
        };
        self.picks[player].push(pick.card);
        if self.picks.iter().all(|p| p.len() > self.turn) {
            self.turn += 1;
            if !self.is_complete() {
                self.options = draft_options(&self.set, self.seed, self.turn);
            }
        }
        Ok(pick)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoiceReport {
    pub deck: Vec<Card>,
    /// Requested card numbers refused under `Lenient`.
    pub dropped: Vec<i32>,
    /// Cards added at random to reach the deck size.
    pub padded: usize,
}

/// v1.5 construction over a fixed pool.
#[derive(Clone, Debug)]
pub struct ConstructionState {
    pub pool: Vec<Card>,
    pub deck_size: usize,
    pub max_copies: usize,
}

impl ConstructionState {
    pub fn new(pool: &CardSet, config: &RulesetConfig) -> Self {
        ConstructionState {
            pool: pool.cards.clone(),
            deck_size: config.deck_size,
            max_copies: config.max_copies,
        }
    }

    /// Validates a player's picks and pads them to a full deck with uniformly
    /// random legal picks drawn from `pad_seed`.
    ///
    /// Under `Strict`, any unknown card, any card over the copy limit, or more
    /// than `deck_size` picks is refused. Under `Lenient` the offending entries
    /// are dropped first.
    pub fn apply_choice(&self, picks: &[i32], policy: Policy, pad_seed: u64) -> Result<ChoiceReport, Illegal> {
        let by_number: HashMap<i32, &Card> = self.pool.iter().map(|c| (c.number, c)).collect();
        let mut counts: HashMap<i32, usize> = HashMap::new();
        let mut deck = Vec::with_capacity(self.deck_size);
        let mut dropped = Vec::new();
        for &number in picks {
            let ok = match by_number.get(&number) {
                Some(card) if deck.len() < self.deck_size => {
                    let n = counts.entry(number).or_default();
                    if *n < self.max_copies {
                        *n += 1;
                        deck.push(**card);
                        true
                    } else {
                        false
                    }
                }
                _ => false,
            };
            if !ok {
                if policy == Policy::Strict {
                    return Err(Illegal::BadChoice);
                }
                dropped.push(number);
            }
        }

        let mut rng = rng::stream(pad_seed);
        let mut padded = 0;
        while deck.len() < self.deck_size {
            let open: Vec<&Card> = self
                .pool
                .iter()
                .filter(|c| counts.get(&c.number).copied().unwrap_or(0) < self.max_copies)
                .collect();
            let Some(card) = open.get(rng.gen_range(0..open.len().max(1))).copied() else {
                break;
            };
            *counts.entry(card.number).or_default() += 1;
            deck.push(*card);
            padded += 1;
        }
        Ok(ChoiceReport { deck, dropped, padded })
    }
}

/// Deterministic shuffle. The last element is the top of the deck.
pub fn finalize_deck(mut deck: Vec<Card>, seed: u64) -> Vec<Card> {
    deck.shuffle(&mut rng::stream(seed));
    deck
}

/// Subseeds of a match's pre-battle streams.
pub fn shuffle_seed(game_seed: u64, seat: usize) -> u64 {
    rng::derive(game_seed, &[seat as u64, tag::SHUFFLE])
}

pub fn pad_seed(game_seed: u64, seat: usize) -> u64 {
    rng::derive(game_seed, &[seat as u64, tag::PAD])
}

pub fn pool_seed(game_seed: u64) -> u64 {
    rng::derive(game_seed, &[tag::POOL])
}
