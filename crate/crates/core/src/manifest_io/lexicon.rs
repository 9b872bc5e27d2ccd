use std::collections::BTreeMap;
use std::path::Path;

use super::{content_lines, read_text};
use crate::error::{Error, Result};
use crate::phoneme::{Inventory, Phoneme};

/// Word → pronunciation map with lowercase keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    pub entries: BTreeMap<String, Vec<Phoneme>>,
}

/// Parses `word<TAB>symbol symbol ...` lines. Lines starting with `#` are comments.
pub fn parse_lexicon(text: &str, inventory: &Inventory) -> Result<Lexicon> {
    let mut entries = BTreeMap::new();
    for (line, raw) in content_lines(text) {
        if raw.starts_with('#') {
            continue;
        }
        let Some((word, pron)) = raw.split_once('\t') else {
            return Err(Error::parse(line, "expected word<TAB>pronunciation"));
        };
        let word = word.trim().to_lowercase();
        if word.is_empty() || word.contains(char::is_whitespace) {
            return Err(Error::parse(line, format!("invalid word {word:?}")));
        }
        let pron = inventory.parse_sequence(pron, line)?;
        if pron.is_empty() {
            return Err(Error::parse(line, format!("empty pronunciation for {word:?}")));
        }
        if entries.insert(word.clone(), pron).is_some() {
            return Err(Error::parse(line, format!("{word:?} listed twice")));
        }
    }
    Ok(Lexicon { entries })
}

pub fn load_lexicon(path: impl AsRef<Path>, inventory: &Inventory) -> Result<Lexicon> {
    parse_lexicon(&read_text(path.as_ref())?, inventory)
}

/// Case-folded pronunciation lookup.
pub fn lexicon_lookup<'a>(lexicon: &'a Lexicon, word: &str) -> Result<&'a [Phoneme]> {
    lexicon
        .entries
        .get(&word.to_lowercase())
        .map(Vec::as_slice)
        .ok_or_else(|| Error::OovWord(word.to_string()))
}
