//! Legends of Code and Magic: rules engine, deck phases, card sets, wire
//! protocol and reference agents.

pub mod action;
pub mod agents;
pub mod card;
pub mod cards;
pub mod config;
pub mod deck;
pub mod event;
pub mod protocol;
pub mod referee;
pub mod rng;
pub mod rules;
pub mod state;
pub mod transcript;

pub use action::{Action, Policy, Target};
pub use card::{Area, Card, CardType, Keyword, KeywordSet};
pub use cards::{CardSet, GeneratorParams};
pub use config::{RulesetConfig, Version};
pub use event::{Event, Illegal, TransitionLog};
pub use protocol::AgentView;
pub use state::{EndReason, GameState, Outcome, Phase};
