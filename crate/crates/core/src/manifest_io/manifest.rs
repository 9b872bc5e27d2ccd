use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{content_lines, read_text, validate_id};
use crate::error::{Error, Result};
use crate::phoneme::{join, Inventory, Phoneme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    TestNonnormative,
    TestNormative,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::TestNonnormative => "test_nonnormative",
            Split::TestNormative => "test_normative",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test_nonnormative" => Ok(Split::TestNonnormative),
            "test_normative" => Ok(Split::TestNormative),
            other => Err(Error::InvalidArgument(format!("unknown split {other:?}"))),
        }
    }
}

/// One utterance of a speaker's corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceRecord {
    pub id: String,
    pub text: String,
    pub ref_phonemes: Vec<Phoneme>,
    pub audio_path: Option<String>,
    pub split: Split,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    id: &'a str,
    text: &'a str,
    ref_phonemes: &'a str,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    audio_path: Option<&'a str>,
    split: Split,
}

/// Parses a line-delimited JSON manifest. Records come back in file order.
pub fn parse_manifest(text: &str, inventory: &Inventory) -> Result<Vec<UtteranceRecord>> {
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (line, raw) in content_lines(text) {
        let owned: RecordIn = serde_json::from_str(raw).map_err(|e| Error::parse(line, e.to_string()))?;
        validate_id(&owned.id, line)?;
        if owned.text.contains(['\n', '\r']) {
            return Err(Error::parse(line, "text contains a line break"));
        }
        let ref_phonemes = inventory.parse_sequence(&owned.ref_phonemes, line)?;
        if let Some(p) = owned.audio_path.as_deref() {
            if p.is_empty() {
                return Err(Error::parse(line, "empty audio_path"));
            }
        }
        if !seen.insert(owned.id.clone()) {
            return Err(Error::DuplicateId(owned.id));
        }
        records.push(UtteranceRecord {
            id: owned.id,
            text: owned.text,
            ref_phonemes,
            audio_path: owned.audio_path,
            split: owned.split,
        });
    }
    Ok(records)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordIn {
    id: String,
    text: String,
    ref_phonemes: String,
    #[serde(default)]
    audio_path: Option<String>,
    split: Split,
}

pub fn load_manifest(path: impl AsRef<Path>, inventory: &Inventory) -> Result<Vec<UtteranceRecord>> {
    parse_manifest(&read_text(path.as_ref())?, inventory)
}

/// Serializes records one JSON object per line, in the order given.
pub fn write_manifest(records: &[UtteranceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let phonemes = join(&r.ref_phonemes);
        let raw = RecordOut {
            id: &r.id,
            text: &r.text,
            ref_phonemes: &phonemes,
            audio_path: r.audio_path.as_deref(),
            split: r.split,
        };
        out.push_str(&serde_json::to_string(&raw).expect("manifest record serializes"));
        out.push('\n');
    }
    out
}
