//! Match transcripts as JSON Lines: a header, one record per seat turn, and
//! an end record carrying a SHA-256 digest of everything before it.
//! Transcripts hold no timing data, so identical matches give identical bytes.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::action::Policy;
use crate::cards::{parse_card_set, GeneratorParams};
use crate::config::RulesetConfig;
use crate::event::Event;
use crate::referee::{play_match, Forfeit, MatchOutcome, MatchSetup, Response, Seat, SeatTurn};
use crate::state::{EndReason, Outcome, Phase};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    Header {
        seed: u64,
        policy: Policy,
        config: RulesetConfig,
        /// Full card-set text when a custom set was used.
        cards: Option<String>,
        generator: GeneratorParams,
        seats: [String; 2],
    },
    Turn {
        phase: Phase,
        player: usize,
        turn: u32,
        input: String,
        output: Option<String>,
        forfeit: Option<EndReason>,
        events: Vec<Event>,
    },
    End {
        outcome: Outcome,
        reason: EndReason,
        turns: u32,
        digest: String,
    },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Transcript {
    pub records: Vec<Record>,
}

#[derive(Debug, thiserror::Error)]
pub enum TranscriptError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("transcript has no header")]
    NoHeader,
    #[error("embedded card set: {0}")]
    Cards(#[from] crate::cards::CardSetError),
    #[error("digest mismatch: recorded {recorded}, computed {computed}")]
    Digest { recorded: String, computed: String },
}

fn line(record: &Record) -> String {
    serde_json::to_string(record).expect("records serialize")
}

impl Transcript {
    pub fn start(setup: &MatchSetup, seats: [String; 2]) -> Self {
        Transcript {
            records: vec![Record::Header {
                seed: setup.seed,
                policy: setup.policy,
                config: setup.config,
                cards: setup.card_set.as_ref().map(|s| s.render()),
                generator: setup.generator.clone(),
                seats,
            }],
        }
    }

    fn body_digest(&self) -> String {
        let mut h = Sha256::new();
        for r in self.records.iter().filter(|r| !matches!(r, Record::End { .. })) {
            h.update(line(r).as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn finish(&mut self, outcome: Outcome, reason: EndReason, turns: u32) {
        let digest = self.body_digest();
        self.records.push(Record::End { outcome, reason, turns, digest });
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, TranscriptError> {
        let records = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|source| TranscriptError::Json { line: i + 1, source }))
            .collect::<Result<Vec<Record>, _>>()?;
        Ok(Transcript { records })
    }

    /// Compares the end record's digest with the records before it.
    pub fn check_digest(&self) -> Result<(), TranscriptError> {
        match self.records.last() {
            Some(Record::End { digest, .. }) => {
                let computed = self.body_digest();
                if *digest == computed {
                    Ok(())
                } else {
                    Err(TranscriptError::Digest { recorded: digest.clone(), computed })
                }
            }
            _ => Ok(()),
        }
    }

    /// The match setup recorded in the header.
    pub fn setup(&self) -> Result<MatchSetup, TranscriptError> {
        let Some(Record::Header { seed, policy, config, cards, generator, .. }) = self.records.first() else {
            return Err(TranscriptError::NoHeader);
        };
        let card_set = match cards {
            Some(text) => Some(Arc::new(parse_card_set(text, "embedded")?)),
            None => None,
        };
        Ok(MatchSetup {
            config: *config,
            seed: *seed,
            policy: *policy,
            card_set,
            generator: generator.clone(),
            record: true,
        })
    }

    pub fn seat_names(&self) -> [String; 2] {
        match self.records.first() {
            Some(Record::Header { seats, .. }) => seats.clone(),
            _ => Default::default(),
        }
    }
}

/// Feeds a seat's recorded outputs back in order.
struct Scripted {
    name: String,
    turns: VecDeque<(Option<String>, Option<EndReason>)>,
}

impl Seat for Scripted {
    fn name(&self) -> &str {
        &self.name
    }

    fn respond(&mut self, _: &SeatTurn<'_>) -> Result<Response, Forfeit> {
        match self.turns.pop_front() {
            Some((_, Some(reason))) => Err(Forfeit { reason, detail: "recorded forfeit".into() }),
            Some((output, None)) => Ok(Response::Text(output.unwrap_or_default())),
            None => Err(Forfeit { reason: EndReason::Crash, detail: "transcript exhausted".into() }),
        }
    }
}

/// First point where a replay departs from the recording.
#[derive(Clone, Debug, PartialEq)]
pub struct Divergence {
    pub record: usize,
    /// Event index within the record, when the records differ in events.
    pub event: Option<usize>,
    pub expected: String,
    pub actual: String,
}

impl std::fmt::Display for Divergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.event {
            Some(e) => write!(f, "record {} event {}: expected {} got {}", self.record, e, self.expected, self.actual),
            None => write!(f, "record {}: expected {} got {}", self.record, self.expected, self.actual),
        }
    }
}

/// Re-runs a recorded match from its header and recorded agent outputs and
/// compares every record.
pub fn replay(recorded: &Transcript) -> Result<Result<MatchOutcome, Divergence>, TranscriptError> {
    let setup = recorded.setup()?;
    let names = recorded.seat_names();
    let mut seats: [Scripted; 2] = names.map(|name| Scripted { name, turns: VecDeque::new() });
    for r in &recorded.records {
        if let Record::Turn { player, output, forfeit, .. } = r {
            if let Some(seat) = seats.get_mut(*player) {
                seat.turns.push_back((output.clone(), *forfeit));
            }
        }
    }
    let [a, b] = &mut seats;
    let outcome = play_match(&setup, [a, b]);
    let fresh = outcome.transcript.as_ref().expect("replay records");
    Ok(match first_divergence(recorded, fresh) {
        Some(d) => Err(d),
        None => Ok(outcome),
    })
}

pub fn first_divergence(expected: &Transcript, actual: &Transcript) -> Option<Divergence> {
    let n = expected.records.len().max(actual.records.len());
    for i in 0..n {
        let (e, a) = (expected.records.get(i), actual.records.get(i));
        if e == a {
            continue;
        }
        if let (Some(Record::Turn { events: ee, .. }), Some(Record::Turn { events: ae, .. })) = (e, a) {
            let m = ee.len().max(ae.len());
            if let Some(j) = (0..m).find(|&j| ee.get(j) != ae.get(j)) {
                let show = |x: Option<&Event>| x.map_or("nothing".to_string(), |x| format!("{x:?}"));
                return Some(Divergence { record: i, event: Some(j), expected: show(ee.get(j)), actual: show(ae.get(j)) });
            }
        }
        let show = |x: Option<&Record>| x.map_or("nothing".to_string(), line);
        return Some(Divergence { record: i, event: None, expected: show(e), actual: show(a) });
    }
    None
}

/// The agent inputs of a transcript in order, as sent on the wire.
pub fn inputs(t: &Transcript) -> impl Iterator<Item = (usize, &str)> {
    t.records.iter().filter_map(|r| match r {
        Record::Turn { player, input, .. } => Some((*player, input.as_str())),
        _ => None,
    })
}

