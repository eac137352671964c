use std::fmt;

use serde::{Deserialize, Serialize};

/// Target of an attack or item use. `Face` is the opposing player (`-1` on
/// the wire).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    Face,
    Creature(i32),
}

impl Target {
    pub fn from_wire(id: i32) -> Self {
        if id == -1 {
            Target::Face
        } else {
            Target::Creature(id)
        }
    }

    pub fn wire(self) -> i32 {
        match self {
            Target::Face => -1,
            Target::Creature(id) => id,
        }
    }
}

/// One agent command. Indices, ids and lanes are kept as raw integers so that
/// malformed but parseable commands reach the engine and are judged there.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Pick(i32),
    Choose(Vec<i32>),
    Summon { id: i32, lane: i32 },
    Attack { id: i32, target: Target },
    Use { id: i32, target: Target },
    Pass,
}

impl Action {
    pub fn is_battle(&self) -> bool {
        matches!(
            self,
            Action::Summon { .. } | Action::Attack { .. } | Action::Use { .. } | Action::Pass
        )
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Pick(k) => write!(f, "PICK {k}"),
            Action::Choose(cards) => {
                for (i, n) in cards.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "CHOOSE {n}")?;
                }
                Ok(())
            }
            Action::Summon { id, lane } => write!(f, "SUMMON {id} {lane}"),
            Action::Attack { id, target } => write!(f, "ATTACK {id} {}", target.wire()),
            Action::Use { id, target } => write!(f, "USE {id} {}", target.wire()),
            Action::Pass => f.write_str("PASS"),
        }
    }
}

/// How the engine treats an illegal action.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Policy {
    /// Skip the action and log it.
    #[default]
    Lenient,
    /// The acting player loses immediately.
    Strict,
}
