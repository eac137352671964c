//! Card definitions: keywords, card types, area modes and construction-time
//! validation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::Version;

/// The six creature abilities, in protocol mask order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Keyword {
    Breakthrough,
    Charge,
    Drain,
    Guard,
    Lethal,
    Ward,
}

impl Keyword {
    pub const ALL: [Keyword; 6] = [
        Keyword::Breakthrough,
        Keyword::Charge,
        Keyword::Drain,
        Keyword::Guard,
        Keyword::Lethal,
        Keyword::Ward,
    ];

    const fn bit(self) -> u8 {
        1 << self as u8
    }

    pub fn letter(self) -> char {
        match self {
            Keyword::Breakthrough => 'B',
            Keyword::Charge => 'C',
            Keyword::Drain => 'D',
            Keyword::Guard => 'G',
            Keyword::Lethal => 'L',
            Keyword::Ward => 'W',
        }
    }
}

/// A subset of the six keywords, stored as a bit mask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct KeywordSet(u8);

impl KeywordSet {
    pub const EMPTY: KeywordSet = KeywordSet(0);
    const MASK: u8 = 0b11_1111;

    pub fn from_bits(bits: u8) -> Option<Self> {
        (bits & !Self::MASK == 0).then_some(KeywordSet(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn has(self, keyword: Keyword) -> bool {
        self.0 & keyword.bit() != 0
    }

    pub fn with(self, keyword: Keyword) -> Self {
        KeywordSet(self.0 | keyword.bit())
    }

    pub fn without(self, keyword: Keyword) -> Self {
        KeywordSet(self.0 & !keyword.bit())
    }

    pub fn union(self, other: Self) -> Self {
        KeywordSet(self.0 | other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        KeywordSet(self.0 & !other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Keyword> {
        Keyword::ALL.into_iter().filter(move |k| self.has(*k))
    }

    /// Six-character `BCDGLW` mask with `-` for absent keywords.
    pub fn mask(self) -> String {
        Keyword::ALL
            .iter()
            .map(|k| if self.has(*k) { k.letter() } else { '-' })
            .collect()
    }

    /// Parses a six-character mask. Each position accepts its letter or `-`.
    pub fn parse_mask(text: &str) -> Option<Self> {
        let bytes = text.as_bytes();
        if bytes.len() != 6 {
            return None;
        }
        let mut set = KeywordSet::EMPTY;
        for (keyword, &b) in Keyword::ALL.iter().zip(bytes) {
            if b == keyword.letter() as u8 {
                set = set.with(*keyword);
            } else if b != b'-' {
                return None;
            }
        }
        Some(set)
    }
}

impl FromIterator<Keyword> for KeywordSet {
    fn from_iter<I: IntoIterator<Item = Keyword>>(iter: I) -> Self {
        iter.into_iter().fold(KeywordSet::EMPTY, KeywordSet::with)
    }
}

impl fmt::Debug for KeywordSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.mask())
    }
}

impl fmt::Display for KeywordSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.mask())
    }
}

impl Serialize for KeywordSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.mask())
    }
}

impl<'de> Deserialize<'de> for KeywordSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        KeywordSet::parse_mask(&text)
            .ok_or_else(|| serde::de::Error::custom(format!("bad keyword mask {text:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CardType {
    Creature,
    GreenItem,
    RedItem,
    BlueItem,
}

impl CardType {
    pub const ALL: [CardType; 4] = [
        CardType::Creature,
        CardType::GreenItem,
        CardType::RedItem,
        CardType::BlueItem,
    ];

    /// Numeric code used on the wire.
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn from_code(code: i32) -> Option<Self> {
        Self::ALL.get(usize::try_from(code).ok()?).copied()
    }

    /// Name used in card set files.
    pub fn file_name(self) -> &'static str {
        match self {
            CardType::Creature => "creature",
            CardType::GreenItem => "itemGreen",
            CardType::RedItem => "itemRed",
            CardType::BlueItem => "itemBlue",
        }
    }

    pub fn from_file_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.file_name() == name)
    }

    pub fn is_item(self) -> bool {
        self != CardType::Creature
    }
}

/// Area ability (v1.5). `Target` has no special behavior.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Area {
    #[default]
    Target,
    Lane1,
    Lane2,
}

impl Area {
    pub const ALL: [Area; 3] = [Area::Target, Area::Lane1, Area::Lane2];

    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn from_code(code: i32) -> Option<Self> {
        Self::ALL.get(usize::try_from(code).ok()?).copied()
    }
}

/// Immutable card definition. Item attack/defense are signed deltas applied
/// to the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Card {
    pub number: i32,
    pub card_type: CardType,
    pub cost: i32,
    pub attack: i32,
    pub defense: i32,
    pub keywords: KeywordSet,
    pub my_health_change: i32,
    pub opponent_health_change: i32,
    pub card_draw: i32,
    pub area: Area,
}

impl Card {
    pub fn creature(number: i32, cost: i32, attack: i32, defense: i32, keywords: KeywordSet) -> Self {
        Card {
            number,
            card_type: CardType::Creature,
            cost,
            attack,
            defense,
            keywords,
            my_health_change: 0,
            opponent_health_change: 0,
            card_draw: 0,
            area: Area::Target,
        }
    }

    pub fn item(number: i32, card_type: CardType, cost: i32, attack: i32, defense: i32) -> Self {
        Card {
            card_type,
            ..Card::creature(number, cost, attack, defense, KeywordSet::EMPTY)
        }
    }

    pub fn with_keywords(mut self, keywords: KeywordSet) -> Self {
        self.keywords = keywords;
        self
    }

    pub fn with_area(mut self, area: Area) -> Self {
        self.area = area;
        self
    }

    pub fn with_effects(mut self, my_health: i32, opponent_health: i32, draw: i32) -> Self {
        self.my_health_change = my_health;
        self.opponent_health_change = opponent_health;
        self.card_draw = draw;
        self
    }

    pub fn is_creature(&self) -> bool {
        self.card_type == CardType::Creature
    }
}

/// A broken card invariant.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("cost must be ≥ 0")]
    NegativeCost,
    #[error("creature attack must be ≥ 0")]
    CreatureAttack,
    #[error("creature defense must be ≥ 0")]
    CreatureDefense,
    #[error("green item attack must be ≥ 0")]
    GreenAttack,
    #[error("green item defense must be ≥ 0")]
    GreenDefense,
    #[error("red item attack must be ≤ 0")]
    RedAttack,
    #[error("red item defense must be ≤ 0")]
    RedDefense,
    #[error("blue item attack must be ≤ 0")]
    BlueAttack,
    #[error("blue item defense must be ≤ 0")]
    BlueDefense,
    #[error("card draw must be ≥ 0")]
    NegativeDraw,
    #[error("opponent health change must be ≤ 0")]
    OpponentHeal,
    #[error("area requires v1.5")]
    AreaNeedsV15,
    #[error("card number must be positive")]
    CardNumber,
}

/// Returns every invariant the card violates under `version`; empty means valid.
pub fn validate_card(card: &Card, version: Version) -> Vec<Violation> {
    let mut out = Vec::new();
    if card.number <= 0 {
        out.push(Violation::CardNumber);
    }
    if card.cost < 0 {
        out.push(Violation::NegativeCost);
    }
    let (atk, def) = match card.card_type {
        CardType::Creature => (
            (card.attack < 0).then_some(Violation::CreatureAttack),
            (card.defense < 0).then_some(Violation::CreatureDefense),
        ),
        CardType::GreenItem => (
            (card.attack < 0).then_some(Violation::GreenAttack),
            (card.defense < 0).then_some(Violation::GreenDefense),
        ),
        CardType::RedItem => (
            (card.attack > 0).then_some(Violation::RedAttack),
            (card.defense > 0).then_some(Violation::RedDefense),
        ),
        CardType::BlueItem => (
            (card.attack > 0).then_some(Violation::BlueAttack),
            (card.defense > 0).then_some(Violation::BlueDefense),
        ),
    };
    out.extend(atk);
    out.extend(def);
    if card.card_draw < 0 {
        out.push(Violation::NegativeDraw);
    }
    if card.opponent_health_change > 0 {
        out.push(Violation::OpponentHeal);
    }
    if card.area != Area::Target && !version.has_area() {
        out.push(Violation::AreaNeedsV15);
    }
    out
}

impl FromStr for KeywordSet {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        KeywordSet::parse_mask(s).ok_or(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_creature_is_valid() {
        let card = Card::creature(1, 1, 2, 1, KeywordSet::EMPTY);
        assert!(validate_card(&card, Version::V12).is_empty());
    }

    #[test]
    fn red_item_positive_attack_rejected() {
        let card = Card::item(2, CardType::RedItem, 1, 3, 0);
        let v = validate_card(&card, Version::V12);
        assert_eq!(v, vec![Violation::RedAttack]);
        assert_eq!(v[0].to_string(), "red item attack must be ≤ 0");
    }

    #[test]
    fn area_is_gated_on_version() {
        let card = Card::creature(3, 2, 2, 2, KeywordSet::EMPTY).with_area(Area::Lane1);
        assert_eq!(validate_card(&card, Version::V12), vec![Violation::AreaNeedsV15]);
        assert!(validate_card(&card, Version::V15).is_empty());
    }

    #[test]
    fn blue_item_99_damage_is_representable() {
        let card = Card::item(4, CardType::BlueItem, 0, 0, -99);
        assert!(validate_card(&card, Version::V15).is_empty());
    }

    #[test]
    fn keyword_mask_order() {
        let set: KeywordSet = [Keyword::Charge, Keyword::Ward].into_iter().collect();
        assert_eq!(set.mask(), "-C---W");
        assert_eq!(KeywordSet::parse_mask("-C---W"), Some(set));
        assert_eq!(KeywordSet::parse_mask("C-----"), None);
        assert_eq!(KeywordSet::parse_mask("BCDGLW").unwrap().len(), 6);
    }

    #[test]
    fn exactly_six_keywords() {
        assert_eq!(Keyword::ALL.len(), 6);
        assert_eq!(KeywordSet::from_bits(0b100_0000), None);
    }
}
