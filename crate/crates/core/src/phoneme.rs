//! Phoneme symbols and the declared inventory they are drawn from.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Reserved symbol marking a reference slot with no aligned prediction.
pub const EPSILON: &str = "∅";

/// A single phoneme token. Cloning is cheap.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Phoneme(Arc<str>);

impl Phoneme {
    /// Builds a phoneme, rejecting empty tokens, whitespace, control
    /// characters, a leading `#` and the reserved deletion symbol.
    pub fn new(symbol: &str) -> Result<Self> {
        if symbol.is_empty()
            || symbol == EPSILON
            || symbol.starts_with('#')
            || symbol.chars().any(|c| c.is_whitespace() || c.is_control())
        {
            return Err(Error::InvalidSymbol(symbol.to_string()));
        }
        Ok(Phoneme(Arc::from(symbol)))
    }

    pub fn epsilon() -> Self {
        Phoneme(Arc::from(EPSILON))
    }

    pub fn is_epsilon(&self) -> bool {
        &*self.0 == EPSILON
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Phoneme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Phoneme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Renders a sequence as space-separated symbols.
pub fn join(seq: &[Phoneme]) -> String {
    let mut out = String::new();
    for (i, p) in seq.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(p.as_str());
    }
    out
}

/// The declared phoneme set. Order follows the inventory file.
#[derive(Debug, Clone, Default)]
pub struct Inventory {
    symbols: Vec<Phoneme>,
    members: HashSet<Phoneme>,
}

impl Inventory {
    pub fn from_symbols<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut inv = Inventory::default();
        for s in symbols {
            let p = Phoneme::new(s.as_ref())?;
            if inv.members.insert(p.clone()) {
                inv.symbols.push(p);
            }
        }
        Ok(inv)
    }

    /// Parses an inventory file: one symbol per line, `#` starts a comment
    /// line, blank lines ignored. Repeated symbols are an error.
    pub fn parse(text: &str) -> Result<Self> {
        let mut inv = Inventory::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let p = Phoneme::new(line).map_err(|_| Error::parse(idx + 1, format!("bad symbol {line:?}")))?;
            if !inv.members.insert(p.clone()) {
                return Err(Error::parse(idx + 1, format!("symbol {line:?} listed twice")));
            }
            inv.symbols.push(p);
        }
        if inv.symbols.is_empty() {
            return Err(Error::parse(0, "inventory is empty"));
        }
        Ok(inv)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&crate::manifest_io::read_text(path.as_ref())?)
    }

    pub fn contains(&self, p: &Phoneme) -> bool {
        self.members.contains(p)
    }

    /// Looks a symbol up, returning the interned phoneme.
    pub fn get(&self, symbol: &str) -> Option<&Phoneme> {
        self.members.get(symbol)
    }

    pub fn symbols(&self) -> &[Phoneme] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Parses a whitespace-separated symbol string against the inventory.
    /// `line` is only used for error reporting.
    pub fn parse_sequence(&self, text: &str, line: usize) -> Result<Vec<Phoneme>> {
        text.split_whitespace()
            .map(|s| {
                self.get(s).cloned().ok_or_else(|| Error::UnknownSymbol {
                    line,
                    symbol: s.to_string(),
                })
            })
            .collect()
    }
}

impl std::borrow::Borrow<str> for Phoneme {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Fixed map from each phoneme to the neighbor it is most often confused with.
#[derive(Debug, Clone, Default)]
pub struct NeighborMap {
    map: BTreeMap<Phoneme, Phoneme>,
}

impl NeighborMap {
    /// Parses `symbol<TAB>neighbor` lines. Both symbols must be inventory
    /// members and distinct.
    pub fn parse(text: &str, inventory: &Inventory) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::parse(line_no, "expected symbol<TAB>neighbor"));
            };
            let a = lookup(inventory, a.trim(), line_no)?;
            let b = lookup(inventory, b.trim(), line_no)?;
            if a == b {
                return Err(Error::parse(line_no, format!("{a} cannot neighbor itself")));
            }
            if map.insert(a.clone(), b).is_some() {
                return Err(Error::parse(line_no, format!("{a} listed twice")));
            }
        }
        Ok(NeighborMap { map })
    }

    pub fn load(path: impl AsRef<Path>, inventory: &Inventory) -> Result<Self> {
        Self::parse(&crate::manifest_io::read_text(path.as_ref())?, inventory)
    }

    /// The confusable neighbor of `p`. Phonemes without an explicit entry
    /// fall back to the next symbol in inventory order (cyclic).
    pub fn neighbor(&self, p: &Phoneme, inventory: &Inventory) -> Option<Phoneme> {
        if let Some(n) = self.map.get(p) {
            return Some(n.clone());
        }
        let symbols = inventory.symbols();
        if symbols.len() < 2 {
            return None;
        }
        let pos = symbols.iter().position(|s| s == p)?;
        Some(symbols[(pos + 1) % symbols.len()].clone())
    }
}

fn lookup(inventory: &Inventory, symbol: &str, line: usize) -> Result<Phoneme> {
    inventory.get(symbol).cloned().ok_or_else(|| Error::UnknownSymbol {
        line,
        symbol: symbol.to_string(),
    })
}
