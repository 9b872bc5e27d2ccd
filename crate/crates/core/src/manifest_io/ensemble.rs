use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{content_lines, read_text};
use super::manifest::UtteranceRecord;
use crate::error::{Error, Result};
use crate::phoneme::{join, Inventory, Phoneme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdaptationState {
    Pretrained,
    Finetuned,
    Simulated,
}

impl AdaptationState {
    pub fn as_str(self) -> &'static str {
        match self {
            AdaptationState::Pretrained => "pretrained",
            AdaptationState::Finetuned => "finetuned",
            AdaptationState::Simulated => "simulated",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pretrained" => Some(AdaptationState::Pretrained),
            "finetuned" => Some(AdaptationState::Finetuned),
            "simulated" => Some(AdaptationState::Simulated),
            _ => None,
        }
    }
}

impl fmt::Display for AdaptationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Describes the stochastic ASR backend that produced an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendMeta {
    pub model_id: String,
    /// Number of stochastic passes per utterance.
    #[serde(rename = "M")]
    pub passes: usize,
    pub p_drop: f64,
    pub adaptation_state: AdaptationState,
}

impl BackendMeta {
    pub const DEFAULT_PASSES: usize = 20;
    pub const DEFAULT_P_DROP: f64 = 0.01;

    pub fn new(model_id: impl Into<String>, adaptation_state: AdaptationState) -> Self {
        BackendMeta {
            model_id: model_id.into(),
            passes: Self::DEFAULT_PASSES,
            p_drop: Self::DEFAULT_P_DROP,
            adaptation_state,
        }
    }

    pub fn validate(&self, line: usize) -> Result<()> {
        if self.passes == 0 {
            return Err(Error::parse(line, "backend M must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.p_drop) {
            return Err(Error::parse(line, format!("p_drop {} outside [0, 1]", self.p_drop)));
        }
        if self.model_id.is_empty() || self.model_id.chars().any(|c| c.is_control()) {
            return Err(Error::parse(line, "invalid model_id"));
        }
        Ok(())
    }
}

/// The M stochastic phoneme-sequence hypotheses for one utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRecord {
    pub utterance_id: String,
    pub hypotheses: Vec<Vec<Phoneme>>,
    pub backend: BackendMeta,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordIn {
    utterance_id: String,
    hypotheses: Vec<String>,
    backend: BackendMeta,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    utterance_id: &'a str,
    hypotheses: Vec<String>,
    backend: &'a BackendMeta,
}

/// Parses a line-delimited JSON ensemble file and resolves every record
/// against `manifest`.
pub fn parse_ensembles(
    text: &str,
    inventory: &Inventory,
    manifest: &[UtteranceRecord],
) -> Result<Vec<EnsembleRecord>> {
    let known: HashSet<&str> = manifest.iter().map(|r| r.id.as_str()).collect();
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (line, raw) in content_lines(text) {
        let rec: RecordIn = serde_json::from_str(raw).map_err(|e| Error::parse(line, e.to_string()))?;
        rec.backend.validate(line)?;
        if rec.hypotheses.len() != rec.backend.passes {
            return Err(Error::EnsembleArityError {
                utterance_id: rec.utterance_id,
                expected: rec.backend.passes,
                found: rec.hypotheses.len(),
            });
        }
        if !known.contains(rec.utterance_id.as_str()) {
            return Err(Error::UnknownUtterance(rec.utterance_id));
        }
        if !seen.insert(rec.utterance_id.clone()) {
            return Err(Error::DuplicateId(rec.utterance_id));
        }
        let hypotheses = rec
            .hypotheses
            .iter()
            .map(|h| inventory.parse_sequence(h, line))
            .collect::<Result<Vec<_>>>()?;
        records.push(EnsembleRecord {
            utterance_id: rec.utterance_id,
            hypotheses,
            backend: rec.backend,
        });
    }
    Ok(records)
}

pub fn load_ensembles(
    path: impl AsRef<Path>,
    inventory: &Inventory,
    manifest: &[UtteranceRecord],
) -> Result<Vec<EnsembleRecord>> {
    parse_ensembles(&read_text(path.as_ref())?, inventory, manifest)
}

pub fn write_ensembles(records: &[EnsembleRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let rec = RecordOut {
            utterance_id: &r.utterance_id,
            hypotheses: r.hypotheses.iter().map(|h| join(h)).collect(),
            backend: &r.backend,
        };
        out.push_str(&serde_json::to_string(&rec).expect("ensemble record serializes"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest_io::manifest::parse_manifest;

    fn fixture() -> (Inventory, Vec<UtteranceRecord>) {
        let inv = Inventory::parse("k\na\nt\n").unwrap();
        let manifest = parse_manifest(
            r#"{"id":"u1","text":"kat","ref_phonemes":"k a t","split":"train"}"#,
            &inv,
        )
        .unwrap();
        (inv, manifest)
    }

    fn line(id: &str, n: usize, m: usize) -> String {
        let hyps: Vec<String> = (0..n).map(|_| "\"k a t\"".to_string()).collect();
        format!(
            r#"{{"utterance_id":"{id}","hypotheses":[{}],"backend":{{"model_id":"whisper-small","M":{m},"p_drop":0.01,"adaptation_state":"pretrained"}}}}"#,
            hyps.join(",")
        )
    }

    #[test]
    fn twenty_hypotheses_accepted() {
        let (inv, manifest) = fixture();
        let recs = parse_ensembles(&line("u1", 20, 20), &inv, &manifest).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].hypotheses.len(), 20);
        assert_eq!(recs[0].backend.passes, 20);
        assert_eq!(recs[0].backend.adaptation_state, AdaptationState::Pretrained);
    }

    #[test]
    fn arity_mismatch() {
        let (inv, manifest) = fixture();
        match parse_ensembles(&line("u1", 19, 20), &inv, &manifest) {
            Err(Error::EnsembleArityError { expected: 20, found: 19, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dangling_utterance() {
        let (inv, manifest) = fixture();
        match parse_ensembles(&line("ghost", 20, 20), &inv, &manifest) {
            Err(Error::UnknownUtterance(id)) => assert_eq!(id, "ghost"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_hypothesis_is_legal() {
        let (inv, manifest) = fixture();
        let text = r#"{"utterance_id":"u1","hypotheses":["", "k"],"backend":{"model_id":"m","M":2,"p_drop":0.0,"adaptation_state":"simulated"}}"#;
        let recs = parse_ensembles(text, &inv, &manifest).unwrap();
        assert!(recs[0].hypotheses[0].is_empty());
    }

    #[test]
    fn invalid_backend() {
        let (inv, manifest) = fixture();
        let zero_m = r#"{"utterance_id":"u1","hypotheses":[],"backend":{"model_id":"m","M":0,"p_drop":0.0,"adaptation_state":"simulated"}}"#;
        assert!(matches!(parse_ensembles(zero_m, &inv, &manifest), Err(Error::ParseError { .. })));
        let bad_p = r#"{"utterance_id":"u1","hypotheses":["k"],"backend":{"model_id":"m","M":1,"p_drop":1.5,"adaptation_state":"simulated"}}"#;
        assert!(matches!(parse_ensembles(bad_p, &inv, &manifest), Err(Error::ParseError { .. })));
    }

    #[test]
    fn write_then_parse() {
        let (inv, manifest) = fixture();
        let recs = parse_ensembles(&line("u1", 3, 3), &inv, &manifest).unwrap();
        let again = parse_ensembles(&write_ensembles(&recs), &inv, &manifest).unwrap();
        assert_eq!(recs, again);
    }
}
