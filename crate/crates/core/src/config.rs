use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Ruleset version. Determines board shape, pre-battle phase, runes and the
/// bonus-draw rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Version {
    #[serde(rename = "1.0")]
    V10,
    #[serde(rename = "1.2")]
    V12,
    #[serde(rename = "1.5")]
    V15,
}

impl Version {
    pub const ALL: [Version; 3] = [Version::V10, Version::V12, Version::V15];

    pub fn lanes(self) -> usize {
        match self {
            Version::V10 => 1,
            Version::V12 | Version::V15 => 2,
        }
    }

    pub fn lane_size(self) -> usize {
        match self {
            Version::V10 => 6,
            Version::V12 | Version::V15 => 3,
        }
    }

    /// v1.0 and v1.2 open with a draft; v1.5 with a construction turn.
    pub fn has_draft(self) -> bool {
        self != Version::V15
    }

    pub fn uses_runes(self) -> bool {
        self != Version::V15
    }

    pub fn has_area(self) -> bool {
        self == Version::V15
    }

    /// v1.0 writes `SUMMON id` without a lane.
    pub fn laneless_summon(self) -> bool {
        self == Version::V10
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Version::V10 => "1.0",
            Version::V12 => "1.2",
            Version::V15 => "1.5",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown ruleset version {0:?} (expected 1.0, 1.2 or 1.5)")]
pub struct UnknownVersion(pub String);

impl FromStr for Version {
    type Err = UnknownVersion;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "1.0" | "10" | "v1.0" => Ok(Version::V10),
            "1.2" | "12" | "v1.2" => Ok(Version::V12),
            "1.5" | "15" | "v1.5" => Ok(Version::V15),
            other => Err(UnknownVersion(other.to_string())),
        }
    }
}

pub const STARTING_HEALTH: i32 = 30;
pub const MAX_MANA: i32 = 12;
pub const HAND_LIMIT: usize = 8;
/// Rune thresholds, highest first.
pub const RUNE_THRESHOLDS: [i32; 5] = [25, 20, 15, 10, 5];
pub const DRAFT_TURNS: usize = 30;
pub const DRAFT_OPTIONS: usize = 3;
pub const POOL_SIZE: usize = 120;
pub const DECK_SIZE: usize = 30;
pub const MAX_COPIES: usize = 2;
pub const DECK_EMPTY_TURN: u32 = 50;
/// v1.5: one extra draw per this much health lost during the enemy turn.
pub const HEALTH_PER_BONUS_DRAW: i32 = 5;

/// Version selector plus every tunable limit of a match.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RulesetConfig {
    pub version: Version,
    pub max_mana: i32,
    pub hand_limit: usize,
    pub starting_health: i32,
    /// `None` means health is uncapped.
    pub health_cap: Option<i32>,
    pub draft_turns: usize,
    pub pool_size: usize,
    pub deck_size: usize,
    pub max_copies: usize,
    pub deck_empty_turn: u32,
    pub max_turns: u32,
    /// Extra cards drawn by each seat before its first battle turn.
    pub initial_draw: [u32; 2],
    pub second_player_bonus: bool,
    pub battle_turn_ms: u64,
    pub draft_turn_ms: u64,
    pub first_turn_ms: u64,
    pub construction_ms: u64,
    pub grace_first_battle_turn: bool,
    pub mem_soft_bytes: u64,
    pub mem_hard_bytes: u64,
}

const MB: u64 = 1024 * 1024;

impl RulesetConfig {
    pub fn new(version: Version) -> Self {
        RulesetConfig {
            version,
            max_mana: MAX_MANA,
            hand_limit: HAND_LIMIT,
            starting_health: STARTING_HEALTH,
            health_cap: None,
            draft_turns: DRAFT_TURNS,
            pool_size: POOL_SIZE,
            deck_size: DECK_SIZE,
            max_copies: MAX_COPIES,
            deck_empty_turn: DECK_EMPTY_TURN,
            max_turns: 100,
            initial_draw: [0, 0],
            second_player_bonus: true,
            battle_turn_ms: 200,
            draft_turn_ms: 200,
            first_turn_ms: if version == Version::V15 { 4000 } else { 1000 },
            construction_ms: 4000,
            grace_first_battle_turn: false,
            mem_soft_bytes: 256 * MB,
            mem_hard_bytes: 1024 * MB,
        }
    }

    pub fn lanes(&self) -> usize {
        self.version.lanes()
    }

    pub fn lane_size(&self) -> usize {
        self.version.lane_size()
    }

    /// Checks the relations between limits; returns a description of the first
    /// inconsistency.
    pub fn check(&self) -> Result<(), String> {
        if self.first_turn_ms < self.battle_turn_ms {
            return Err("first turn budget must be ≥ battle turn budget".into());
        }
        if self.mem_hard_bytes <= self.mem_soft_bytes {
            return Err("hard memory limit must exceed soft limit".into());
        }
        if self.max_mana < 1 || self.hand_limit == 0 || self.deck_size == 0 {
            return Err("max mana, hand limit and deck size must be positive".into());
        }
        if self.max_copies == 0 || self.pool_size * self.max_copies < self.deck_size {
            return Err("pool too small to build a deck".into());
        }
        Ok(())
    }
}

impl Default for RulesetConfig {
    fn default() -> Self {
        RulesetConfig::new(Version::V12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_determines_board_shape() {
        assert_eq!((Version::V10.lanes(), Version::V10.lane_size()), (1, 6));
        assert_eq!((Version::V12.lanes(), Version::V12.lane_size()), (2, 3));
        assert_eq!((Version::V15.lanes(), Version::V15.lane_size()), (2, 3));
        assert!(Version::V12.uses_runes() && !Version::V15.uses_runes());
    }

    #[test]
    fn defaults_hold_rule_constants() {
        let c = RulesetConfig::new(Version::V15);
        assert_eq!(c.max_mana, 12);
        assert_eq!(c.hand_limit, 8);
        assert_eq!(c.pool_size, 120);
        assert_eq!(c.deck_size, 30);
        assert_eq!(c.max_copies, 2);
        assert_eq!(c.deck_empty_turn, 50);
        assert_eq!(c.construction_ms, 4000);
        assert_eq!(c.mem_soft_bytes, 256 * MB);
        assert_eq!(c.mem_hard_bytes, 1024 * MB);
        assert_eq!(RUNE_THRESHOLDS, [25, 20, 15, 10, 5]);
        assert!(c.check().is_ok());
    }

    #[test]
    fn version_parses() {
        assert_eq!("1.2".parse::<Version>(), Ok(Version::V12));
        assert!("2.0".parse::<Version>().is_err());
    }
}
