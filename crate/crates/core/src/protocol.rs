//! Text protocol between referee and agents.
//!
//! Turn input (all integers base-10, single spaces, `\n` endings):
//!
//! ```text
//! health mana deckCount extra          # viewpoint player
//! health mana deckCount extra          # opponent
//! opponentHandCount opponentActionCount
//! <opponentActionCount lines, one command each>
//! cardCount
//! cardNumber instanceId location type cost attack defense abilities myHealthChange opponentHealthChange cardDraw [area] lane
//! ...
//! ```
//!
//! `extra` is the unbroken rune count (v1.0/1.2) or the next-turn draw count
//! (v1.5). The viewpoint's `mana` is its current mana; the opponent's is its
//! max mana. `location` is 0 for hand or options, 1 for own board, -1 for
//! enemy board; `lane` is -1 off the board. `area` appears only in v1.5.
//! Mana 0 marks a draft turn (v1.0/1.2) or the construction turn (v1.5).
//!
//! Agent output is one line of `;`-separated commands:
//! `SUMMON id lane` (v1.0: `SUMMON id`), `ATTACK id target`, `USE id target`,
//! `PASS` in battle; `PICK k` in draft; `CHOOSE cardNumber` repeated in
//! construction. Target -1 is the opponent's face.

use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::action::{Action, Policy, Target};
use crate::card::{Area, Card, CardType, KeywordSet};
use crate::config::{RulesetConfig, Version};
use crate::state::{GameState, Phase};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Location {
    Hand,
    MyBoard,
    EnemyBoard,
}

impl Location {
    pub fn code(self) -> i32 {
        match self {
            Location::Hand => 0,
            Location::MyBoard => 1,
            Location::EnemyBoard => -1,
        }
    }

    pub fn from_code(code: i32) -> Option<Self> {
        match code {
            0 => Some(Location::Hand),
            1 => Some(Location::MyBoard),
            -1 => Some(Location::EnemyBoard),
            _ => None,
        }
    }
}

/// One visible card. For board creatures, `card` carries current stats and
/// keywords.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardView {
    pub card: Card,
    pub instance_id: i32,
    pub location: Location,
    pub lane: i32,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerSummary {
    pub health: i32,
    pub mana: i32,
    pub deck_count: i32,
    pub extra: i32,
}

/// Everything one player may observe at the start of its turn.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentView {
    pub version: Version,
    pub phase: Phase,
    pub me: PlayerSummary,
    pub opponent: PlayerSummary,
    pub opponent_hand: i32,
    pub opponent_actions: Vec<Action>,
    pub cards: Vec<CardView>,
}

fn projected_draws(state: &GameState, p: usize) -> i32 {
    let player = &state.players[p];
    if state.config.version.uses_runes() {
        player.rune_count as i32
    } else {
        player.next_turn_draw + player.health_lost_enemy_turn / crate::config::HEALTH_PER_BONUS_DRAW
    }
}

impl AgentView {
    /// Battle view for `viewpoint`. Hidden information (opponent hand
    /// contents, deck order) is never read.
    pub fn battle(state: &GameState, viewpoint: usize, opponent_actions: &[Action]) -> Self {
        let me = &state.players[viewpoint];
        let opp = &state.players[1 - viewpoint];
        let mut cards = Vec::with_capacity(me.hand.len() + 12);
        for h in &me.hand {
            cards.push(CardView { card: h.card, instance_id: h.instance_id, location: Location::Hand, lane: -1 });
        }
        for (player, location) in [(me, Location::MyBoard), (opp, Location::EnemyBoard)] {
            for c in player.creatures() {
                let card = Card { attack: c.attack, defense: c.defense, keywords: c.keywords, ..c.card };
                cards.push(CardView { card, instance_id: c.instance_id, location, lane: c.lane as i32 });
            }
        }
        AgentView {
            version: state.config.version,
            phase: Phase::Battle,
            me: PlayerSummary {
                health: me.health,
                mana: me.mana,
                deck_count: me.deck.len() as i32,
                extra: projected_draws(state, viewpoint),
            },
            opponent: PlayerSummary {
                health: opp.health,
                mana: opp.max_mana,
                deck_count: opp.deck.len() as i32,
                extra: projected_draws(state, 1 - viewpoint),
            },
            opponent_hand: opp.hand.len() as i32,
            opponent_actions: opponent_actions.to_vec(),
            cards,
        }
    }

    fn pre_battle(config: &RulesetConfig, phase: Phase, options: &[Card], decks: [usize; 2]) -> Self {
        let extra = if config.version.uses_runes() { crate::config::RUNE_THRESHOLDS.len() as i32 } else { 1 };
        let summary = |deck: usize| PlayerSummary {
            health: config.starting_health,
            mana: 0,
            deck_count: deck as i32,
            extra,
        };
        AgentView {
            version: config.version,
            phase,
            me: summary(decks[0]),
            opponent: summary(decks[1]),
            opponent_hand: 0,
            opponent_actions: Vec::new(),
            cards: options
                .iter()
                .map(|&card| CardView { card, instance_id: -1, location: Location::Hand, lane: -1 })
                .collect(),
        }
    }

    /// Draft view; `decks` holds (own, opponent) pick counts so far.
    pub fn draft(config: &RulesetConfig, options: &[Card], decks: [usize; 2]) -> Self {
        Self::pre_battle(config, Phase::Draft, options, decks)
    }

    pub fn construction(config: &RulesetConfig, pool: &[Card]) -> Self {
        Self::pre_battle(config, Phase::Construction, pool, [0, 0])
    }

    pub fn hand(&self) -> impl Iterator<Item = &CardView> {
        self.cards.iter().filter(|c| c.location == Location::Hand)
    }

    /// Renders the turn input text.
    pub fn render(&self) -> String {
        use fmt::Write as _;
        let mut out = String::with_capacity(64 + 40 * self.cards.len());
        for p in [&self.me, &self.opponent] {
            let _ = writeln!(out, "{} {} {} {}", p.health, p.mana, p.deck_count, p.extra);
        }
        let _ = writeln!(out, "{} {}", self.opponent_hand, self.opponent_actions.len());
        for a in &self.opponent_actions {
            let _ = writeln!(out, "{}", render_action(a, self.version));
        }
        let _ = writeln!(out, "{}", self.cards.len());
        for c in &self.cards {
            let k = &c.card;
            let _ = write!(
                out,
                "{} {} {} {} {} {} {} {} {} {} {} ",
                k.number,
                c.instance_id,
                c.location.code(),
                k.card_type.code(),
                k.cost,
                k.attack,
                k.defense,
                k.keywords.mask(),
                k.my_health_change,
                k.opponent_health_change,
                k.card_draw,
            );
            if self.version.has_area() {
                let _ = write!(out, "{} ", k.area.code());
            }
            let _ = writeln!(out, "{}", c.lane);
        }
        out
    }

    /// Parses a complete turn input.
    pub fn parse(text: &str, version: Version) -> Result<Self, ViewError> {
        let mut lines = text.lines();
        let mut line_no = 0;
        Self::read_with(
            || {
                line_no += 1;
                Ok(lines.next().map(str::to_string))
            },
            version,
        )?
        .ok_or(ViewError { line: 1, message: "empty input".into() })
    }

    /// Reads one turn input from a stream. `Ok(None)` on clean end of input.
    pub fn read_from<R: BufRead>(reader: &mut R, version: Version) -> Result<Option<Self>, ViewError> {
        Self::read_with(
            || {
                let mut line = String::new();
                match reader.read_line(&mut line) {
                    Ok(0) => Ok(None),
                    Ok(_) => Ok(Some(line)),
                    Err(e) => Err(e.to_string()),
                }
            },
            version,
        )
    }

    fn read_with(
        mut next_line: impl FnMut() -> Result<Option<String>, String>,
        version: Version,
    ) -> Result<Option<Self>, ViewError> {
        let mut line_no = 0usize;
        let mut next = |required: bool| -> Result<Option<String>, ViewError> {
            line_no += 1;
            let at = line_no;
            match next_line() {
                Ok(Some(l)) => Ok(Some(l)),
                Ok(None) if !required => Ok(None),
                Ok(None) => Err(ViewError { line: at, message: "unexpected end of input".into() }),
                Err(message) => Err(ViewError { line: at, message }),
            }
            .map(|l| l.map(|s| s.trim_end_matches(['\r', '\n']).to_string()))
        };
        let Some(first) = next(false)? else { return Ok(None) };
        let mut line = 1usize;
        let me = parse_summary(&first, line)?;
        line += 1;
        let opponent = parse_summary(&next(true)?.unwrap_or_default(), line)?;
        line += 1;
        let counts = ints(&next(true)?.unwrap_or_default(), 2, line)?;
        let (opponent_hand, action_count) = (counts[0], counts[1]);
        if !(0..=10_000).contains(&action_count) {
            return Err(ViewError { line, message: format!("bad action count {action_count}") });
        }
        let mut opponent_actions = Vec::with_capacity(action_count as usize);
        for _ in 0..action_count {
            line += 1;
            let text = next(true)?.unwrap_or_default();
            let parsed = parse_commands(text.as_bytes(), Phase::Battle, version);
            if let Some(e) = parsed.error {
                return Err(ViewError { line, message: e.to_string() });
            }
            opponent_actions.extend(parsed.actions);
        }
        line += 1;
        let card_count = ints(&next(true)?.unwrap_or_default(), 1, line)?[0];
        if !(0..=10_000).contains(&card_count) {
            return Err(ViewError { line, message: format!("bad card count {card_count}") });
        }
        let mut cards = Vec::with_capacity(card_count as usize);
        for _ in 0..card_count {
            line += 1;
            cards.push(parse_card_line(&next(true)?.unwrap_or_default(), version, line)?);
        }
        let phase = match (me.mana, version.has_draft()) {
            (0, true) => Phase::Draft,
            (0, false) => Phase::Construction,
            _ => Phase::Battle,
        };
        Ok(Some(AgentView { version, phase, me, opponent, opponent_hand, opponent_actions, cards }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("turn input line {line}: {message}")]
pub struct ViewError {
    pub line: usize,
    pub message: String,
}

fn ints(text: &str, n: usize, line: usize) -> Result<Vec<i32>, ViewError> {
    let values: Result<Vec<i32>, _> = text.split_whitespace().map(str::parse::<i32>).collect();
    match values {
        Ok(v) if v.len() == n => Ok(v),
        _ => Err(ViewError { line, message: format!("expected {n} integers, found {text:?}") }),
    }
}

fn parse_summary(text: &str, line: usize) -> Result<PlayerSummary, ViewError> {
    let v = ints(text, 4, line)?;
    Ok(PlayerSummary { health: v[0], mana: v[1], deck_count: v[2], extra: v[3] })
}

fn parse_card_line(text: &str, version: Version, line: usize) -> Result<CardView, ViewError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    let expected = if version.has_area() { 13 } else { 12 };
    let bad = |message: String| ViewError { line, message };
    if fields.len() != expected {
        return Err(bad(format!("expected {expected} card fields, found {}", fields.len())));
    }
    let int = |i: usize| fields[i].parse::<i32>().map_err(|_| bad(format!("field {} not an integer", i + 1)));
    let card_type = CardType::from_code(int(3)?).ok_or_else(|| bad("bad card type".into()))?;
    let keywords = KeywordSet::parse_mask(fields[7]).ok_or_else(|| bad("bad abilities mask".into()))?;
    let (area, lane_field) = if version.has_area() {
        (Area::from_code(int(11)?).ok_or_else(|| bad("bad area".into()))?, 12)
    } else {
        (Area::Target, 11)
    };
    Ok(CardView {
        card: Card {
            number: int(0)?,
            card_type,
            cost: int(4)?,
            attack: int(5)?,
            defense: int(6)?,
            keywords,
            my_health_change: int(8)?,
            opponent_health_change: int(9)?,
            card_draw: int(10)?,
            area,
        },
        instance_id: int(1)?,
        location: Location::from_code(int(2)?).ok_or_else(|| bad("bad location".into()))?,
        lane: int(lane_field)?,
    })
}

/// Canonical text of one action (a `Choose` renders as several commands).
pub fn render_action(action: &Action, version: Version) -> String {
    match action {
        Action::Summon { id, lane: 0 } if version.laneless_summon() => format!("SUMMON {id}"),
        Action::Choose(cards) if cards.is_empty() => "PASS".to_string(),
        other => other.to_string(),
    }
}

/// Canonical agent output line for a list of actions (no trailing newline).
pub fn render_actions(actions: &[Action], version: Version) -> String {
    if actions.is_empty() {
        return "PASS".to_string();
    }
    actions
        .iter()
        .map(|a| render_action(a, version))
        .collect::<Vec<_>>()
        .join(";")
}

/// Where and why agent output stopped parsing.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<&'static str>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: expected {}", self.offset, self.expected.join(" or "))
    }
}

/// Actions parsed before the first error, plus that error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedOutput {
    pub actions: Vec<Action>,
    pub error: Option<ParseError>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b' ' | b'\t' | b'\r' | b'\n') {
            self.pos += 1;
        }
    }

    fn at_command_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.bytes.len() || self.bytes[self.pos] == b';'
    }

    fn word(&mut self) -> &[u8] {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        &self.bytes[start..self.pos]
    }

    fn int(&mut self) -> Result<i32, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let err = ParseError { offset: start, expected: vec!["integer"] };
        let mut end = start;
        if end < self.bytes.len() && self.bytes[end] == b'-' {
            end += 1;
        }
        let digits = end;
        while end < self.bytes.len() && self.bytes[end].is_ascii_digit() {
            end += 1;
        }
        if end == digits {
            return Err(err);
        }
        let text = std::str::from_utf8(&self.bytes[start..end]).map_err(|_| err.clone())?;
        let value = text.parse::<i32>().map_err(|_| err)?;
        self.pos = end;
        Ok(value)
    }
}

fn keywords_for(phase: Phase) -> Vec<&'static str> {
    match phase {
        Phase::Draft => vec!["PICK", "PASS"],
        Phase::Construction => vec!["CHOOSE", "PASS"],
        Phase::Battle | Phase::Finished => vec!["SUMMON", "ATTACK", "USE", "PASS"],
    }
}

/// Parses agent output. Total over arbitrary bytes: returns every command
/// before the first error together with that error.
///
/// In construction, all `CHOOSE` commands fold into one [`Action::Choose`].
pub fn parse_commands(input: &[u8], phase: Phase, version: Version) -> ParsedOutput {
    let mut cur = Cursor { bytes: input, pos: 0 };
    let mut actions = Vec::new();
    let mut chosen = Vec::new();
    let mut error = None;
    let allowed = keywords_for(phase);
    loop {
        if cur.at_command_end() {
            if cur.pos >= input.len() {
                break;
            }
            cur.pos += 1; // ';'
            continue;
        }
        let start = cur.pos;
        let word = cur.word();
        let keyword = allowed.iter().copied().find(|k| k.as_bytes() == word);
        let parsed: Result<Option<Action>, ParseError> = match keyword {
            None => Err(ParseError { offset: start, expected: vec!["command keyword"] }),
            Some("PASS") => Ok(Some(Action::Pass)),
            Some("PICK") => cur.int().map(|k| Some(Action::Pick(k))),
            Some("CHOOSE") => cur.int().map(|n| {
                chosen.push(n);
                None
            }),
            Some("SUMMON") => cur.int().and_then(|id| {
                let lane = if version.laneless_summon() && cur.at_command_end() { Ok(0) } else { cur.int() };
                lane.map(|lane| Some(Action::Summon { id, lane }))
            }),
            Some(k) => cur.int().and_then(|id| {
                let target = Target::from_wire(cur.int()?);
                Ok(Some(if k == "ATTACK" { Action::Attack { id, target } } else { Action::Use { id, target } }))
            }),
        };
        match parsed {
            Ok(action) => {
                if !cur.at_command_end() {
                    error = Some(ParseError { offset: cur.pos, expected: vec!["';'", "end of line"] });
                    break;
                }
                actions.extend(action);
            }
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }
    if phase == Phase::Construction {
        actions.retain(|a| *a != Action::Pass);
        actions.insert(0, Action::Choose(chosen));
    }
    ParsedOutput { actions, error }
}

/// Policy-aware wrapper over [`parse_commands`]. `Strict` fails on any error;
/// `Lenient` keeps the valid prefix and fails only when nothing before the
/// error parsed.
pub fn parse_agent_output(
    input: &[u8],
    phase: Phase,
    version: Version,
    policy: Policy,
) -> Result<Vec<Action>, ParseError> {
    let parsed = parse_commands(input, phase, version);
    let nothing_parsed = match phase {
        Phase::Construction => matches!(parsed.actions.as_slice(), [Action::Choose(c)] if c.is_empty()),
        _ => parsed.actions.is_empty(),
    };
    match parsed.error {
        Some(e) if policy == Policy::Strict || nothing_parsed => Err(e),
        _ => Ok(parsed.actions),
    }
}
