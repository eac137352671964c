//! Win-rate tables. Draws count as games played but not as decided games.

use std::collections::BTreeMap;
use std::fmt;

use crate::tournament::{MatchResult, Winner};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ordering {
    /// Schedule order. With striped workers this takes results from each
    /// worker in turn.
    Interleaved,
    /// All of worker 0's results, then worker 1's, and so on.
    Concatenated { workers: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Record {
    pub wins: u32,
    pub losses: u32,
    pub draws: u32,
}

impl Record {
    pub fn games(&self) -> u32 {
        self.wins + self.losses + self.draws
    }

    pub fn decided(&self) -> u32 {
        self.wins + self.losses
    }

    /// Percentage of decided games won, 0 when nothing was decided.
    pub fn win_rate(&self) -> f64 {
        if self.decided() == 0 {
            0.0
        } else {
            100.0 * self.wins as f64 / self.decided() as f64
        }
    }

    pub fn win_rate_text(&self) -> String {
        format!("{:.2}", self.win_rate())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WinRateTable {
    pub schedule_id: String,
    /// (agent index, label), ascending by index.
    pub agents: Vec<(usize, String)>,
    pub totals: Vec<Record>,
    /// `pairwise[i][j]` is row agent i against column agent j.
    pub pairwise: Vec<Vec<Record>>,
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum AggregateError {
    #[error("results mix schedules {0:?} and {1:?}")]
    MixedSchedules(String, String),
    #[error("agent {index} has two labels: {first:?} and {second:?}")]
    LabelClash { index: usize, first: String, second: String },
}

/// Arranges results for streamed or truncated views.
pub fn ordered(results: &[MatchResult], ordering: Ordering) -> Vec<&MatchResult> {
    let mut out: Vec<&MatchResult> = results.iter().collect();
    match ordering {
        Ordering::Interleaved => out.sort_by_key(|r| r.index),
        Ordering::Concatenated { workers } => {
            let w = workers.max(1);
            out.sort_by_key(|r| (r.index % w, r.index));
        }
    }
    out
}

/// Folds results into a table. With `limit`, only the first `limit` results
/// in `ordering` count; without it the table does not depend on order.
pub fn aggregate(
    results: &[MatchResult],
    ordering: Ordering,
    limit: Option<usize>,
) -> Result<WinRateTable, AggregateError> {
    let schedule_id = results.first().map(|r| r.schedule_id.clone()).unwrap_or_default();
    let mut labels: BTreeMap<usize, String> = BTreeMap::new();
    for r in results {
        if r.schedule_id != schedule_id {
            return Err(AggregateError::MixedSchedules(schedule_id, r.schedule_id.clone()));
        }
        for (i, name) in [(r.agent_a, &r.name_a), (r.agent_b, &r.name_b)] {
            let known = labels.entry(i).or_insert_with(|| name.clone());
            if known != name {
                return Err(AggregateError::LabelClash { index: i, first: known.clone(), second: name.clone() });
            }
        }
    }
    let agents: Vec<(usize, String)> = labels.into_iter().collect();
    let pos = |i: usize| agents.iter().position(|(j, _)| *j == i).expect("label collected");
    let n = agents.len();
    let mut pairwise = vec![vec![Record::default(); n]; n];
    let counted = ordered(results, ordering);
    let counted = &counted[..limit.unwrap_or(counted.len()).min(counted.len())];
    for r in counted {
        let (a, b) = (pos(r.agent_a), pos(r.agent_b));
        match r.winner {
            Winner::A => {
                pairwise[a][b].wins += 1;
                pairwise[b][a].losses += 1;
            }
            Winner::B => {
                pairwise[b][a].wins += 1;
                pairwise[a][b].losses += 1;
            }
            Winner::Draw => {
                pairwise[a][b].draws += 1;
                pairwise[b][a].draws += 1;
            }
        }
    }
    let totals = pairwise
        .iter()
        .map(|row| {
            row.iter().fold(Record::default(), |t, c| Record {
                wins: t.wins + c.wins,
                losses: t.losses + c.losses,
                draws: t.draws + c.draws,
            })
        })
        .collect();
    Ok(WinRateTable { schedule_id, agents, totals, pairwise })
}

impl WinRateTable {
    /// Rows sorted by win rate, best first; ties keep agent order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.agents.len()).collect();
        idx.sort_by(|&x, &y| self.totals[y].win_rate().total_cmp(&self.totals[x].win_rate()));
        idx
    }
}

impl fmt::Display for WinRateTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.agents.iter().map(|(_, n)| n.len()).max().unwrap_or(5).max(5);
        writeln!(f, "{:<width$}  {:>6}  {:>6}  {:>6}  {:>6}  {:>8}", "agent", "games", "wins", "losses", "draws", "win%")?;
        for i in self.ranking() {
            let t = &self.totals[i];
            writeln!(
                f,
                "{:<width$}  {:>6}  {:>6}  {:>6}  {:>6}  {:>7}%",
                self.agents[i].1,
                t.games(),
                t.wins,
                t.losses,
                t.draws,
                t.win_rate_text()
            )?;
        }
        Ok(())
    }
}
