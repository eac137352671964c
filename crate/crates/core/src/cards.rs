//! Card sets: the line-oriented card file format, loading with validation,
//! and the per-match pool generator used by v1.5.
//!
//! File format, one card per line, `#` starts a comment:
//!
//! ```text
//! cardNumber;name;type;cost;attack;defense;abilities;myHealthChange;opponentHealthChange;cardDraw[;area]
//! ```
//!
//! `type` is one of `creature`, `itemGreen`, `itemRed`, `itemBlue`;
//! `abilities` is the six-character `BCDGLW` mask; `area` (0/1/2 for
//! Target/Lane1/Lane2) is present only in v1.5 sets.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::card::{validate_card, Area, Card, CardType, Keyword, KeywordSet};
use crate::config::{Version, POOL_SIZE};
use crate::rng::{self, GameRng};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardSet {
    pub name: String,
    /// `V15` when the set carries the area column; `V12` otherwise (usable
    /// by both v1.0 and v1.2).
    pub version: Version,
    pub cards: Vec<Card>,
    pub names: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CardIssue {
    pub card_number: i32,
    pub problem: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CardSetError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, field {field}: {message}")]
    Parse { line: usize, field: usize, message: String },
    #[error("invalid cards: {}", format_issues(.0))]
    Invalid(Vec<CardIssue>),
}

fn format_issues(issues: &[CardIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("#{} {}", i.card_number, i.problem))
        .collect::<Vec<_>>()
        .join("; ")
}

const BUILTIN_CLASSIC: &str = include_str!("../data/cards_v12.txt");

impl CardSet {
    /// The fixed 160-card set shipped for v1.0 and v1.2.
    pub fn builtin() -> &'static CardSet {
        static SET: OnceLock<CardSet> = OnceLock::new();
        SET.get_or_init(|| parse_card_set(BUILTIN_CLASSIC, "builtin").expect("bundled card set is valid"))
    }

    pub fn len(&self) -> usize {
        self.cards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }

    pub fn get(&self, number: i32) -> Option<&Card> {
        self.cards.iter().find(|c| c.number == number)
    }

    /// Every card invariant, plus uniqueness of card numbers.
    pub fn validate(&self) -> Result<(), CardSetError> {
        let mut issues = Vec::new();
        let mut seen = HashSet::new();
        for card in &self.cards {
            if !seen.insert(card.number) {
                issues.push(CardIssue {
                    card_number: card.number,
                    problem: "duplicate card number".into(),
                });
            }
            for v in validate_card(card, self.version) {
                issues.push(CardIssue { card_number: card.number, problem: v.to_string() });
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(CardSetError::Invalid(issues))
        }
    }

    /// Renders the set in the card file format.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} ({} cards, v{})", self.name, self.cards.len(), self.version);
        for (card, name) in self.cards.iter().zip(&self.names) {
            out.push_str(&render_card_line(card, name, self.version.has_area()));
            out.push('\n');
        }
        out
    }
}

pub fn render_card_line(card: &Card, name: &str, with_area: bool) -> String {
    let mut line = format!(
        "{};{};{};{};{};{};{};{};{};{}",
        card.number,
        name,
        card.card_type.file_name(),
        card.cost,
        card.attack,
        card.defense,
        card.keywords.mask(),
        card.my_health_change,
        card.opponent_health_change,
        card.card_draw,
    );
    if with_area {
        let _ = write!(line, ";{}", card.area.code());
    }
    line
}

pub fn load_card_set(path: impl AsRef<Path>) -> Result<CardSet, CardSetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| CardSetError::Io { path: path.to_path_buf(), source })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_card_set(&text, &name)
}

/// Parses and validates card set text.
pub fn parse_card_set(text: &str, name: &str) -> Result<CardSet, CardSetError> {
    let mut cards = Vec::new();
    let mut names = Vec::new();
    let mut with_area: Option<bool> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(';').map(str::trim).collect();
        let has_area = match fields.len() {
            10 => false,
            11 => true,
            n => {
                return Err(CardSetError::Parse {
                    line: line_no,
                    field: n,
                    message: format!("expected 10 or 11 fields, found {n}"),
                })
            }
        };
        if *with_area.get_or_insert(has_area) != has_area {
            return Err(CardSetError::Parse {
                line: line_no,
                field: fields.len(),
                message: "area column present on some lines only".into(),
            });
        }
        let err = |field: usize, message: String| CardSetError::Parse { line: line_no, field: field + 1, message };
        let int = |field: usize| -> Result<i32, CardSetError> {
            fields[field]
                .parse::<i32>()
                .map_err(|_| err(field, format!("expected integer, found {:?}", fields[field])))
        };
        let card_type = CardType::from_file_name(fields[2])
            .ok_or_else(|| err(2, format!("unknown card type {:?}", fields[2])))?;
        let keywords = KeywordSet::parse_mask(fields[6])
            .ok_or_else(|| err(6, format!("bad abilities mask {:?}", fields[6])))?;
        let area = if has_area {
            Area::from_code(int(10)?).ok_or_else(|| err(10, format!("bad area {:?}", fields[10])))?
        } else {
            Area::Target
        };
        cards.push(Card {
            number: int(0)?,
            card_type,
            cost: int(3)?,
            attack: int(4)?,
            defense: int(5)?,
            keywords,
            my_health_change: int(7)?,
            opponent_health_change: int(8)?,
            card_draw: int(9)?,
            area,
        });
        names.push(fields[1].to_string());
    }
    let set = CardSet {
        name: name.to_string(),
        version: if with_area == Some(true) { Version::V15 } else { Version::V12 },
        cards,
        names,
    };
    set.validate()?;
    Ok(set)
}

/// Knobs of the pool generator. Every probability is in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    pub cost_min: i32,
    pub cost_max: i32,
    /// Creature stat budget is `stat_base + stat_per_cost * cost ± stat_noise`.
    pub stat_base: f64,
    pub stat_per_cost: f64,
    pub stat_noise: i32,
    /// Chance of the first keyword; each further keyword is multiplied by
    /// `keyword_decay`.
    pub keyword_probability: f64,
    pub keyword_decay: f64,
    /// Weights for creature, green, red, blue.
    pub type_weights: [f64; 4],
    /// Weights for Target, Lane1, Lane2.
    pub area_weights: [f64; 3],
    pub allow_area: bool,
    /// Independent chance of each of the three side effects.
    pub effect_probability: f64,
    pub max_card_draw: i32,
    pub max_heal: i32,
    pub max_opponent_damage: i32,
    /// Chance of a degenerate item whose defense delta is drawn up to
    /// `tail_max`.
    pub tail_probability: f64,
    pub tail_max: i32,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            cost_min: 0,
            cost_max: 12,
            stat_base: 1.0,
            stat_per_cost: 2.0,
            stat_noise: 1,
            keyword_probability: 0.35,
            keyword_decay: 0.5,
            type_weights: [0.6, 0.15, 0.15, 0.1],
            area_weights: [0.8, 0.1, 0.1],
            allow_area: true,
            effect_probability: 0.12,
            max_card_draw: 2,
            max_heal: 5,
            max_opponent_damage: 4,
            tail_probability: 0.01,
            tail_max: 99,
        }
    }
}

impl GeneratorParams {
    /// Parameters for a fixed v1.0/v1.2 set: no area, no degenerate tail.
    pub fn classic() -> Self {
        GeneratorParams { allow_area: false, tail_probability: 0.0, ..Self::default() }
    }

    pub fn check(&self) -> Result<(), String> {
        let probs = [
            ("keyword_probability", self.keyword_probability),
            ("keyword_decay", self.keyword_decay),
            ("effect_probability", self.effect_probability),
            ("tail_probability", self.tail_probability),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} = {p} is not a probability"));
            }
        }
        if self.cost_min < 0 || self.cost_min > self.cost_max {
            return Err(format!("empty cost range {}..={}", self.cost_min, self.cost_max));
        }
        let weights_ok = |w: &[f64]| w.iter().all(|x| *x >= 0.0 && x.is_finite()) && w.iter().sum::<f64>() > 0.0;
        if !weights_ok(&self.type_weights) || !weights_ok(&self.area_weights) {
            return Err("weights must be non-negative with a positive sum".into());
        }
        if self.stat_noise < 0 || self.max_card_draw < 0 || self.max_heal < 0 || self.max_opponent_damage < 0 {
            return Err("ranges must be non-empty".into());
        }
        if self.tail_max < 1 {
            return Err("tail_max must be at least 1".into());
        }
        Ok(())
    }
}

/// A v1.5 pool: exactly 120 fresh cards, deterministic in `(params, seed)`.
pub fn generate_pool(params: &GeneratorParams, seed: u64) -> CardSet {
    generate_cards(params, seed, POOL_SIZE, Version::V15)
}

/// Generates `count` cards numbered from 1. With `version` other than v1.5
/// the area column is dropped regardless of `params.allow_area`.
pub fn generate_cards(params: &GeneratorParams, seed: u64, count: usize, version: Version) -> CardSet {
    let mut rng = rng::stream(seed);
    let allow_area = params.allow_area && version.has_area();
    let mut cards = Vec::with_capacity(count);
    let mut names = Vec::with_capacity(count);
    for number in 1..=count as i32 {
        let card = generate_card(params, &mut rng, number, allow_area);
        names.push(card_name(&mut rng, card.card_type));
        cards.push(card);
    }
    CardSet {
        name: format!("generated-{seed:016x}"),
        version: if version.has_area() { Version::V15 } else { Version::V12 },
        cards,
        names,
    }
}

fn weighted<const N: usize>(rng: &mut GameRng, weights: &[f64; N]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

fn generate_card(p: &GeneratorParams, rng: &mut GameRng, number: i32, allow_area: bool) -> Card {
    let cost = rng.gen_range(p.cost_min..=p.cost_max);
    let card_type = CardType::ALL[weighted(rng, &p.type_weights)];
    let noise = if p.stat_noise > 0 { rng.gen_range(-p.stat_noise..=p.stat_noise) } else { 0 };
    let mut budget = ((p.stat_base + p.stat_per_cost * f64::from(cost)).round() as i32 + noise).max(0);

    let mut keywords = KeywordSet::EMPTY;
    if card_type != CardType::BlueItem || rng.gen_bool(0.5) {
        let mut order = Keyword::ALL;
        order.shuffle(rng);
        let mut chance = p.keyword_probability;
        for kw in order {
            if rng.gen_bool(chance) {
                keywords = keywords.with(kw);
                budget -= 1;
                chance *= p.keyword_decay;
            }
        }
    }

    let mut card = Card::creature(number, cost, 0, 0, keywords);
    card.card_type = card_type;
    if p.max_card_draw > 0 && rng.gen_bool(p.effect_probability) {
        card.card_draw = rng.gen_range(1..=p.max_card_draw);
        budget -= 2 * card.card_draw;
    }
    if p.max_heal > 0 && rng.gen_bool(p.effect_probability) {
        card.my_health_change = rng.gen_range(1..=p.max_heal);
        budget -= (card.my_health_change + 1) / 2;
    }
    if p.max_opponent_damage > 0 && rng.gen_bool(p.effect_probability) {
        card.opponent_health_change = -rng.gen_range(1..=p.max_opponent_damage);
        budget += card.opponent_health_change;
    }
    let budget = budget.max(0);

    match card_type {
        CardType::Creature => {
            let attack = rng.gen_range(0..=budget);
            card.attack = attack;
            card.defense = (budget - attack).max(1);
        }
        CardType::GreenItem => {
            let half = budget / 2 + 1;
            card.attack = rng.gen_range(0..=half);
            card.defense = half - card.attack;
        }
        CardType::RedItem => {
            let half = budget / 2 + 1;
            let atk = rng.gen_range(0..=half);
            card.attack = -atk;
            card.defense = -(half - atk);
        }
        CardType::BlueItem => {
            card.defense = -(budget / 2 + 1);
            if rng.gen_bool(0.25) {
                card.attack = -rng.gen_range(0..=budget / 3);
            }
        }
    }
    if card_type.is_item() && rng.gen_bool(p.tail_probability) {
        let extreme = rng.gen_range(1..=p.tail_max);
        card.defense = if card_type == CardType::GreenItem { extreme } else { -extreme };
    }
    if allow_area {
        card.area = Area::ALL[weighted(rng, &p.area_weights)];
    }
    card
}

const ADJECTIVES: [&str; 16] = [
    "Ashen", "Brazen", "Cinder", "Dusk", "Ember", "Frost", "Gilded", "Hollow", "Iron", "Jade",
    "Lunar", "Mire", "Night", "Obsidian", "Pale", "Rune",
];
const CREATURES: [&str; 12] = [
    "Drake", "Golem", "Wisp", "Knight", "Hound", "Wyrm", "Sentinel", "Shade", "Ogre", "Harpy",
    "Serpent", "Warden",
];
const ITEMS: [&str; 8] = ["Blade", "Tonic", "Hex", "Bolt", "Charm", "Shard", "Sigil", "Brand"];

fn card_name(rng: &mut GameRng, card_type: CardType) -> String {
    let adjective = ADJECTIVES[rng.gen_range(0..ADJECTIVES.len())];
    let noun = if card_type == CardType::Creature {
        CREATURES[rng.gen_range(0..CREATURES.len())]
    } else {
        ITEMS[rng.gen_range(0..ITEMS.len())]
    };
    format!("{adjective} {noun}")
}

/// Seed of the bundled classic set.
pub const BUILTIN_SEED: u64 = 2018;
