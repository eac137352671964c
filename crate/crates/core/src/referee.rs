//! Runs one match between two seats: draft or construction, deck shuffles,
//! then the battle loop.

use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use crate::action::{Action, Policy};
use crate::agents::Agent;
use crate::cards::{generate_pool, CardSet, GeneratorParams};
use crate::config::RulesetConfig;
use crate::deck::{finalize_deck, pad_seed, pool_seed, shuffle_seed, ConstructionState, DraftState};
use crate::event::{Event, TransitionLog};
use crate::protocol::{parse_agent_output, render_actions, AgentView};
use crate::state::{EndReason, GameState, Outcome};
use crate::transcript::{Record, Transcript};

/// A seat's answer to one turn.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Response {
    /// Raw agent output line, parsed by the referee.
    Text(String),
    /// Already-structured actions from an in-process agent.
    Actions(Vec<Action>),
}

/// A seat lost the match outside the rules: timeout, crash, disqualification.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{reason:?}: {detail}")]
pub struct Forfeit {
    pub reason: EndReason,
    pub detail: String,
}

pub struct SeatTurn<'a> {
    pub view: &'a AgentView,
    pub budget: Duration,
}

pub trait Seat {
    fn name(&self) -> &str;
    fn respond(&mut self, turn: &SeatTurn<'_>) -> Result<Response, Forfeit>;
}

/// An in-process agent occupying a seat.
pub struct AgentSeat(pub Box<dyn Agent>);

impl Seat for AgentSeat {
    fn name(&self) -> &str {
        self.0.name()
    }

    fn respond(&mut self, turn: &SeatTurn<'_>) -> Result<Response, Forfeit> {
        Ok(Response::Actions(self.0.act(turn.view)))
    }
}

#[derive(Clone, Debug)]
pub struct MatchSetup {
    pub config: RulesetConfig,
    pub seed: u64,
    pub policy: Policy,
    /// Draft set for v1.0/1.2; `None` uses the builtin set. For v1.5 a set
    /// here replaces the generated pool.
    pub card_set: Option<Arc<CardSet>>,
    pub generator: GeneratorParams,
    pub record: bool,
}

impl MatchSetup {
    pub fn new(config: RulesetConfig, seed: u64) -> Self {
        MatchSetup {
            config,
            seed,
            policy: Policy::Lenient,
            card_set: None,
            generator: GeneratorParams::default(),
            record: false,
        }
    }

    /// The card pool both seats pick from.
    pub fn pool(&self) -> Arc<CardSet> {
        match (&self.card_set, self.config.version.has_draft()) {
            (Some(set), _) => set.clone(),
            (None, true) => {
                static BUILTIN: OnceLock<Arc<CardSet>> = OnceLock::new();
                BUILTIN.get_or_init(|| Arc::new(CardSet::builtin().clone())).clone()
            }
            (None, false) => Arc::new(generate_pool(&self.generator, pool_seed(self.seed))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SeatStats {
    pub responses: u32,
    pub total: Duration,
    pub max: Duration,
}

#[derive(Clone, Debug)]
pub struct MatchOutcome {
    pub outcome: Outcome,
    pub reason: EndReason,
    /// Round counter when the match ended; 0 if it ended before battle.
    pub turns: u32,
    /// Offending seat and detail for forfeits.
    pub forfeit: Option<(usize, String)>,
    /// Ignored illegal actions per seat.
    pub ignored: [u32; 2],
    pub transcript: Option<Transcript>,
    /// Response times, kept apart from the transcript.
    pub stats: [SeatStats; 2],
    pub final_state: Option<GameState>,
}

impl MatchOutcome {
    pub fn winner(&self) -> Option<usize> {
        self.outcome.winner()
    }
}

struct Run<'a, 's> {
    setup: &'a MatchSetup,
    seats: [&'s mut dyn Seat; 2],
    transcript: Option<Transcript>,
    stats: [SeatStats; 2],
}

struct Lost {
    player: usize,
    reason: EndReason,
    detail: String,
}

impl Run<'_, '_> {
    fn ask(
        &mut self,
        p: usize,
        view: &AgentView,
        budget: Duration,
        turn: u32,
    ) -> Result<Vec<Action>, Lost> {
        let started = Instant::now();
        let response = self.seats[p].respond(&SeatTurn { view, budget });
        let elapsed = started.elapsed();
        let s = &mut self.stats[p];
        s.responses += 1;
        s.total += elapsed;
        s.max = s.max.max(elapsed);

        let version = self.setup.config.version;
        let (output, parsed) = match response {
            Err(f) => {
                self.record_turn(view, p, turn, None, Some(&f));
                return Err(Lost { player: p, reason: f.reason, detail: f.detail });
            }
            Ok(Response::Actions(actions)) => {
                let text = self.transcript.is_some().then(|| render_actions(&actions, version));
                (text, Ok(actions))
            }
            Ok(Response::Text(text)) => {
                let parsed = parse_agent_output(text.as_bytes(), view.phase, version, self.setup.policy);
                let text = text.trim_end_matches(['\r', '\n']).to_string();
                (Some(text), parsed)
            }
        };
        self.record_turn(view, p, turn, output, None);
        match parsed {
            Ok(actions) => Ok(actions),
            Err(e) if self.setup.policy == Policy::Strict => {
                Err(Lost { player: p, reason: EndReason::InvalidStrict, detail: format!("parse error {e}") })
            }
            Err(_) => Ok(Vec::new()),
        }
    }

    fn record_turn(&mut self, view: &AgentView, player: usize, turn: u32, output: Option<String>, forfeit: Option<&Forfeit>) {
        if let Some(t) = &mut self.transcript {
            t.records.push(Record::Turn {
                phase: view.phase,
                player,
                turn,
                input: view.render(),
                output,
                forfeit: forfeit.map(|f| f.reason),
                events: Vec::new(),
            });
        }
    }

    fn attach_events(&mut self, log: &mut TransitionLog) {
        if let Some(t) = &mut self.transcript {
            if let Some(Record::Turn { events, .. }) = t.records.last_mut() {
                events.append(log);
            }
        }
        log.clear();
    }

    fn draft(&mut self, pool: &CardSet) -> Result<[Vec<crate::card::Card>; 2], Lost> {
        let cfg = &self.setup.config;
        let mut draft = DraftState::new(pool, self.setup.seed, cfg.draft_turns);
        while !draft.is_complete() {
            let turn = draft.turn as u32 + 1;
            let ms = if turn == 1 { cfg.first_turn_ms } else { cfg.draft_turn_ms };
            let budget = Duration::from_millis(ms);
            for p in 0..2 {
                let counts = [draft.picks[p].len(), draft.picks[1 - p].len()];
                let view = AgentView::draft(cfg, &draft.options, counts);
                let actions = self.ask(p, &view, budget, turn)?;
                let index = match actions.first() {
                    Some(Action::Pick(k)) => *k,
                    _ => 0,
                };
                draft.apply_pick(p, index, self.setup.policy).map_err(|e| Lost {
                    player: p,
                    reason: EndReason::InvalidStrict,
                    detail: format!("PICK {index}: {e}"),
                })?;
            }
        }
        Ok(draft.picks)
    }

    fn construct(&mut self, pool: &CardSet) -> Result<[Vec<crate::card::Card>; 2], Lost> {
        let cfg = &self.setup.config;
        let budget = Duration::from_millis(cfg.construction_ms);
        let construction = ConstructionState::new(pool, cfg);
        let view = AgentView::construction(cfg, &pool.cards);
        let mut decks: [Vec<crate::card::Card>; 2] = Default::default();
        for (p, deck) in decks.iter_mut().enumerate() {
            let actions = self.ask(p, &view, budget, 1)?;
            let picks: Vec<i32> = actions
                .iter()
                .flat_map(|a| match a {
                    Action::Choose(c) => c.clone(),
                    _ => Vec::new(),
                })
                .collect();
            let report = construction
                .apply_choice(&picks, self.setup.policy, pad_seed(self.setup.seed, p))
                .map_err(|e| Lost { player: p, reason: EndReason::InvalidStrict, detail: e.to_string() })?;
            *deck = report.deck;
        }
        Ok(decks)
    }

    fn battle(&mut self, state: &mut GameState, ignored: &mut [u32; 2]) -> Result<(), Lost> {
        let cfg = self.setup.config;
        let mut log = TransitionLog::new();
        let mut echo: [Vec<Action>; 2] = Default::default();
        let mut first = [true, true];
        state.deal_initial(&mut log);
        while !state.is_over() {
            state.begin_turn(&mut log);
            if state.is_over() {
                self.attach_events(&mut log);
                break;
            }
            let p = state.active;
            let view = AgentView::battle(state, p, &echo[1 - p]);
            let ms = if first[p] && cfg.grace_first_battle_turn { cfg.first_turn_ms } else { cfg.battle_turn_ms };
            first[p] = false;
            let actions = match self.ask(p, &view, Duration::from_millis(ms), state.turn) {
                Ok(a) => a,
                Err(lost) => {
                    self.attach_events(&mut log);
                    return Err(lost);
                }
            };
            echo[p].clear();
            for a in &actions {
                if state.is_over() {
                    break;
                }
                let legal = state.check_action(a).is_ok();
                if let Err(r) = state.apply_action(a, self.setup.policy, &mut log) {
                    self.attach_events(&mut log);
                    return Err(Lost { player: p, reason: EndReason::InvalidStrict, detail: r.to_string() });
                }
                if legal {
                    if *a != Action::Pass {
                        echo[p].push(a.clone());
                    }
                } else {
                    ignored[p] += 1;
                }
            }
            state.end_turn(&mut log);
            self.attach_events(&mut log);
        }
        Ok(())
    }
}

/// Plays one full match. Seat 0 moves first.
pub fn play_match(setup: &MatchSetup, seats: [&mut dyn Seat; 2]) -> MatchOutcome {
    let names = [seats[0].name().to_string(), seats[1].name().to_string()];
    let mut run = Run {
        setup,
        seats,
        transcript: setup.record.then(|| Transcript::start(setup, names)),
        stats: Default::default(),
    };
    let pool = setup.pool();
    let decks = if setup.config.version.has_draft() { run.draft(&pool) } else { run.construct(&pool) };
    let mut ignored = [0; 2];
    let mut state = None;
    let result = decks.and_then(|[d0, d1]| {
        let decks = [finalize_deck(d0, shuffle_seed(setup.seed, 0)), finalize_deck(d1, shuffle_seed(setup.seed, 1))];
        let s = state.insert(GameState::new_battle(setup.config, decks));
        run.battle(s, &mut ignored)
    });
    let (outcome, reason, forfeit) = match result {
        Ok(()) => {
            let s = state.as_ref().expect("battle ran");
            (s.outcome.expect("battle ends"), s.end_reason.expect("battle ends"), None)
        }
        Err(lost) => {
            if let Some(s) = &mut state {
                if !s.is_over() {
                    let mut log = Vec::new();
                    s.finish(Outcome::Won(1 - lost.player), lost.reason, &mut log);
                    run.attach_events(&mut log);
                }
            }
            (Outcome::Won(1 - lost.player), lost.reason, Some((lost.player, lost.detail)))
        }
    };
    let turns = state.as_ref().map_or(0, |s| s.turn);
    let mut transcript = run.transcript.take();
    if let Some(t) = &mut transcript {
        t.finish(outcome, reason, turns);
    }
    MatchOutcome { outcome, reason, turns, forfeit, ignored, transcript, stats: run.stats, final_state: state }
}

/// Convenience: two in-process agents.
pub fn play_agents(setup: &MatchSetup, a: Box<dyn Agent>, b: Box<dyn Agent>) -> MatchOutcome {
    let (mut a, mut b) = (AgentSeat(a), AgentSeat(b));
    play_match(setup, [&mut a, &mut b])
}

/// Whether any recorded event is an ignored action.
pub fn has_ignored(transcript: &Transcript) -> bool {
    transcript.records.iter().any(|r| match r {
        Record::Turn { events, .. } => events.iter().any(|e| matches!(e, Event::Ignored { .. })),
        _ => false,
    })
}
