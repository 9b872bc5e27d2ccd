//! Character and word error rates, and signed percentage-point deltas
//! between a baseline run and a treated run.
//!
//! Text is lowercased, the punctuation marks `.,;:!?` are removed and runs
//! of whitespace collapse to one space before comparison. Corpus rates sum
//! edit distances and reference lengths; they are not means of per-utterance
//! rates.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::align::levenshtein;
use crate::error::{Error, Result};
use crate::manifest_io::{read_text, Split, UtteranceRecord};

const STRIPPED: [char; 6] = ['.', ',', ';', ':', '!', '?'];

pub fn normalize_text(s: &str) -> String {
    let lowered: String = s.to_lowercase().chars().filter(|c| !STRIPPED.contains(c)).collect();
    lowered.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Edit distance and reference length at one granularity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EditCounts {
    pub edits: usize,
    pub ref_len: usize,
}

impl EditCounts {
    pub fn rate(&self) -> f64 {
        if self.ref_len == 0 {
            0.0
        } else {
            self.edits as f64 / self.ref_len as f64
        }
    }
}

impl std::ops::AddAssign for EditCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.edits += rhs.edits;
        self.ref_len += rhs.ref_len;
    }
}

pub fn char_counts(reference: &str, hyp: &str) -> Result<EditCounts> {
    let r: Vec<char> = normalize_text(reference).chars().collect();
    if r.is_empty() {
        return Err(Error::EmptyReference);
    }
    let h: Vec<char> = normalize_text(hyp).chars().collect();
    Ok(EditCounts { edits: levenshtein(&r, &h), ref_len: r.len() })
}

pub fn word_counts(reference: &str, hyp: &str) -> Result<EditCounts> {
    let r_norm = normalize_text(reference);
    let h_norm = normalize_text(hyp);
    let r: Vec<&str> = r_norm.split(' ').filter(|w| !w.is_empty()).collect();
    if r.is_empty() {
        return Err(Error::EmptyReference);
    }
    let h: Vec<&str> = h_norm.split(' ').filter(|w| !w.is_empty()).collect();
    Ok(EditCounts { edits: levenshtein(&r, &h), ref_len: r.len() })
}

pub fn cer(reference: &str, hyp: &str) -> Result<f64> {
    char_counts(reference, hyp).map(|c| c.rate())
}

pub fn wer(reference: &str, hyp: &str) -> Result<f64> {
    word_counts(reference, hyp).map(|c| c.rate())
}

/// Corpus-level error rates for one split.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ErrorRates {
    pub chars: EditCounts,
    pub words: EditCounts,
}

impl ErrorRates {
    pub fn cer(&self) -> f64 {
        self.chars.rate()
    }

    pub fn wer(&self) -> f64 {
        self.words.rate()
    }

    pub fn add_pair(&mut self, reference: &str, hyp: &str) -> Result<()> {
        self.chars += char_counts(reference, hyp)?;
        self.words += word_counts(reference, hyp)?;
        Ok(())
    }
}

pub type SplitRates = BTreeMap<Split, ErrorRates>;

/// Parses hypothesis transcripts, one `id<TAB>text` per line.
pub fn parse_transcripts(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (line, raw) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r'))) {
        if raw.trim().is_empty() {
            continue;
        }
        let (id, hyp) = raw.split_once('\t').unwrap_or((raw, ""));
        crate::manifest_io::validate_id(id, line)?;
        if out.insert(id.to_string(), hyp.to_string()).is_some() {
            return Err(Error::DuplicateId(id.to_string()));
        }
    }
    Ok(out)
}

pub fn load_transcripts(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    parse_transcripts(&read_text(path.as_ref())?)
}

/// Scores every hypothesis against its manifest reference, grouped by split.
pub fn evaluate(manifest: &[UtteranceRecord], hyps: &BTreeMap<String, String>) -> Result<SplitRates> {
    let by_id: BTreeMap<&str, &UtteranceRecord> = manifest.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut rates = SplitRates::new();
    for (id, hyp) in hyps {
        let rec = by_id.get(id.as_str()).ok_or_else(|| Error::UnknownUtterance(id.clone()))?;
        rates.entry(rec.split).or_default().add_pair(&rec.text, hyp)?;
    }
    Ok(rates)
}

/// CSV `split,cer,wer,char_edits,chars,word_edits,words`.
pub fn write_rates(rates: &SplitRates) -> String {
    let mut out = String::from("split,cer,wer,char_edits,chars,word_edits,words\n");
    for (split, r) in rates {
        writeln!(
            out,
            "{split},{},{},{},{},{},{}",
            r.cer(),
            r.wer(),
            r.chars.edits,
            r.chars.ref_len,
            r.words.edits,
            r.words.ref_len
        )
        .unwrap();
    }
    out
}

pub fn parse_rates(text: &str) -> Result<SplitRates> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, "split,cer,wer,char_edits,chars,word_edits,words")) => {}
        Some((line, _)) => return Err(Error::parse(line, "unexpected rates header")),
        None => return Err(Error::parse(0, "empty rates file")),
    }
    let mut out = SplitRates::new();
    for (line, raw) in lines {
        let cols: Vec<&str> = raw.split(',').collect();
        if cols.len() != 7 {
            return Err(Error::parse(line, "expected 7 columns"));
        }
        let split: Split = cols[0].parse().map_err(|e: Error| Error::parse(line, e.to_string()))?;
        let int = |s: &str| s.parse::<usize>().map_err(|_| Error::parse(line, format!("bad count {s:?}")));
        let rates = ErrorRates {
            chars: EditCounts { edits: int(cols[3])?, ref_len: int(cols[4])? },
            words: EditCounts { edits: int(cols[5])?, ref_len: int(cols[6])? },
        };
        if rates.chars.ref_len == 0 || rates.words.ref_len == 0 {
            return Err(Error::parse(line, "reference lengths must be positive"));
        }
        if out.insert(split, rates).is_some() {
            return Err(Error::parse(line, format!("split {split} listed twice")));
        }
    }
    Ok(out)
}

pub fn load_rates(path: impl AsRef<Path>) -> Result<SplitRates> {
    parse_rates(&read_text(path.as_ref())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Improvement,
    Unchanged,
    Degradation,
}

impl Direction {
    fn of(delta_pp: f64) -> Self {
        if format_pp(delta_pp) == "0.00" {
            Direction::Unchanged
        } else if delta_pp < 0.0 {
            Direction::Improvement
        } else {
            Direction::Degradation
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Improvement => "improvement",
            Direction::Unchanged => "unchanged",
            Direction::Degradation => "degradation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaRow {
    pub split: Split,
    /// 100 · (treated − baseline); negative is better.
    pub delta_cer_pp: f64,
    pub delta_wer_pp: f64,
}

impl DeltaRow {
    pub fn cer_direction(&self) -> Direction {
        Direction::of(self.delta_cer_pp)
    }

    pub fn wer_direction(&self) -> Direction {
        Direction::of(self.delta_wer_pp)
    }
}

/// Signed two-decimal rendering; zero prints without a sign.
pub fn format_pp(v: f64) -> String {
    let s = format!("{v:+.2}");
    if s == "+0.00" || s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

/// Per-split change from `baseline` to `treated`. Both runs must cover the
/// same splits with the same reference lengths.
pub fn delta_report(baseline: &SplitRates, treated: &SplitRates) -> Result<Vec<DeltaRow>> {
    let a: HashSet<&Split> = baseline.keys().collect();
    let b: HashSet<&Split> = treated.keys().collect();
    if a != b {
        return Err(Error::SplitMismatch(format!(
            "baseline has {:?}, treated has {:?}",
            baseline.keys().collect::<Vec<_>>(),
            treated.keys().collect::<Vec<_>>()
        )));
    }
    baseline
        .iter()
        .map(|(split, base)| {
            let t = &treated[split];
            if base.chars.ref_len != t.chars.ref_len || base.words.ref_len != t.words.ref_len {
                return Err(Error::SplitMismatch(format!("{split}: reference lengths differ between runs")));
            }
            Ok(DeltaRow {
                split: *split,
                delta_cer_pp: 100.0 * (t.cer() - base.cer()),
                delta_wer_pp: 100.0 * (t.wer() - base.wer()),
            })
        })
        .collect()
}

/// Delta table CSV `split,delta_cer_pp,delta_wer_pp,cer_flag,wer_flag`.
pub fn write_delta_report(rows: &[DeltaRow]) -> String {
    let mut out = String::from("split,delta_cer_pp,delta_wer_pp,cer_flag,wer_flag\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.split,
            format_pp(r.delta_cer_pp),
            format_pp(r.delta_wer_pp),
            r.cer_direction().as_str(),
            r.wer_direction().as_str()
        )
        .unwrap();
    }
    out
}

/// One row of an uncertainty-source comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceRow {
    pub dataset: String,
    pub uncertainty_source: String,
    pub rates: ErrorRates,
}

/// CSV `dataset,uncertainty_source,cer,wer` with rates in percent.
pub fn write_source_table(rows: &[SourceRow]) -> String {
    let mut out = String::from("dataset,uncertainty_source,cer,wer\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{:.2},{:.2}",
            csv_field(&r.dataset),
            csv_field(&r.uncertainty_source),
            100.0 * r.rates.cer(),
            100.0 * r.rates.wer()
        )
        .unwrap();
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
