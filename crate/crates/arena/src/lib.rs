//! Process runtime and tournament runner on top of `locm-core`.

pub mod aggregate;
pub mod export;
pub mod runtime;
pub mod tournament;

pub use aggregate::{aggregate, AggregateError, Ordering, Record, WinRateTable};
pub use runtime::{AgentProcess, Limits, MemoryCheck, MoveError, ProcessSeat};
pub use tournament::{
    build_schedule, run_match, run_tournament, AgentSpec, InfraError, MatchResult, MatchSpec, Orientation, RunOptions, Schedule,
    SeatHandle,
    TurnTimings, Winner,
};
