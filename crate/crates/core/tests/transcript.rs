use locm_core::agents::by_name;
use locm_core::config::{RulesetConfig, Version};
use locm_core::referee::{play_agents, MatchSetup};
use locm_core::transcript::{first_divergence, replay, Record, Transcript, TranscriptError};

fn recorded(version: Version, seed: u64, a: &str, b: &str) -> Transcript {
    let mut setup = MatchSetup::new(RulesetConfig::new(version), seed);
    setup.record = true;
    play_agents(&setup, by_name(a, 1).unwrap(), by_name(b, 2).unwrap()).transcript.unwrap()
}

#[test]
fn replay_reproduces_every_version() {
    for version in Version::ALL {
        let t = recorded(version, 11, "random2lanes", "greedy");
        let parsed = Transcript::from_jsonl(&t.to_jsonl()).unwrap();
        assert_eq!(parsed, t);
        let outcome = replay(&parsed).unwrap().unwrap();
        assert_eq!(Some(outcome.outcome), match t.records.last() {
            Some(Record::End { outcome, .. }) => Some(*outcome),
            _ => None,
        });
    }
}

#[test]
fn deterministic_pair_gives_identical_bytes() {
    let a = recorded(Version::V12, 3, "baseline1", "baseline2").to_jsonl();
    for _ in 0..3 {
        assert_eq!(recorded(Version::V12, 3, "baseline1", "baseline2").to_jsonl(), a);
    }
}

#[test]
fn tampering_breaks_the_digest() {
    let text = recorded(Version::V15, 5, "baseline1", "random").to_jsonl();
    Transcript::from_jsonl(&text).unwrap().check_digest().unwrap();
    let tampered = text.replacen("\"player\":0", "\"player\":1", 1);
    let t = Transcript::from_jsonl(&tampered).unwrap();
    assert!(matches!(t.check_digest(), Err(TranscriptError::Digest { .. })));
}

#[test]
fn altered_output_is_reported_as_divergence() {
    let mut t = recorded(Version::V12, 8, "baseline2", "baseline1");
    let i = t
        .records
        .iter()
        .position(|r| matches!(r, Record::Turn { phase: locm_core::Phase::Battle, output: Some(o), .. } if o != "PASS"))
        .unwrap();
    if let Record::Turn { output, .. } = &mut t.records[i] {
        *output = Some("PASS".into());
    }
    let d = replay(&t).unwrap().unwrap_err();
    assert_eq!(d.record, i);
    assert!(first_divergence(&t, &t).is_none());
}
