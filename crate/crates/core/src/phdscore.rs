//! Min-max normalization of the raw components, the weighted composite
//! difficulty score, utterance-level aggregation and the linear map from
//! utterance scores to sampling weights in [1, 5].

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::manifest_io::{BackendMeta, UtteranceRecord};
use crate::phoneme::Phoneme;
use crate::uncertainty::PhonemeStats;

pub const MIN_SAMPLING_WEIGHT: f64 = 1.0;
pub const MAX_SAMPLING_WEIGHT: f64 = 5.0;

/// Weights of the error, entropy and inverted-agreement terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreWeights {
    w_e: f64,
    w_h: f64,
    w_a: f64,
}

impl ScoreWeights {
    const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(w_e: f64, w_h: f64, w_a: f64) -> Result<Self> {
        for w in [w_e, w_h, w_a] {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidScoreWeights(format!("weight {w} is not a non-negative number")));
            }
        }
        let sum = w_e + w_h + w_a;
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvalidScoreWeights(format!("weights sum to {sum}, expected 1")));
        }
        Ok(ScoreWeights { w_e, w_h, w_a })
    }

    pub fn error(&self) -> f64 {
        self.w_e
    }

    pub fn entropy(&self) -> f64 {
        self.w_h
    }

    pub fn agreement(&self) -> f64 {
        self.w_a
    }
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights { w_e: 0.4, w_h: 0.2, w_a: 0.4 }
    }
}

impl fmt::Display for ScoreWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.w_e, self.w_h, self.w_a)
    }
}

impl FromStr for ScoreWeights {
    type Err = Error;

    /// Parses `w_e,w_h,w_a`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::InvalidScoreWeights(format!("expected three comma-separated values, got {s:?}")));
        }
        let mut vals = [0.0; 3];
        for (v, p) in vals.iter_mut().zip(&parts) {
            *v = p
                .parse()
                .map_err(|_| Error::InvalidScoreWeights(format!("not a number: {p:?}")))?;
        }
        ScoreWeights::new(vals[0], vals[1], vals[2])
    }
}

/// Raw components of one phoneme with their min-max normalized values.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedRow {
    pub stats: PhonemeStats,
    pub e_norm: f64,
    pub h_norm: f64,
    pub a_norm: f64,
}

fn min_max(values: impl Iterator<Item = f64> + Clone) -> impl Fn(f64) -> f64 {
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let hi = values.fold(f64::NEG_INFINITY, f64::max);
    move |v| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 }
}

/// Scales each component to [0, 1] across all phoneme types. A constant
/// component carries no information and maps to 0.
pub fn normalize_components(stats: &[PhonemeStats]) -> Result<Vec<NormalizedRow>> {
    if stats.is_empty() {
        return Err(Error::EmptyStats);
    }
    let e = min_max(stats.iter().map(|s| s.error_rate));
    let h = min_max(stats.iter().map(|s| s.mean_entropy));
    let a = min_max(stats.iter().map(|s| s.mean_agreement));
    Ok(stats
        .iter()
        .map(|s| NormalizedRow {
            stats: s.clone(),
            e_norm: e(s.error_rate),
            h_norm: h(s.mean_entropy),
            a_norm: a(s.mean_agreement),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub stats: PhonemeStats,
    pub e_norm: f64,
    pub h_norm: f64,
    pub a_norm: f64,
    pub phdscore: f64,
}

/// Per-phoneme difficulty scores, sorted by symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct PhDScoreTable {
    rows: Vec<ScoreRow>,
    pub weights: ScoreWeights,
    pub backend: Option<BackendMeta>,
}

impl PhDScoreTable {
    pub fn from_rows(mut rows: Vec<ScoreRow>, weights: ScoreWeights, backend: Option<BackendMeta>) -> Self {
        rows.sort_by(|a, b| a.stats.phoneme.cmp(&b.stats.phoneme));
        PhDScoreTable { rows, weights, backend }
    }

    pub fn rows(&self) -> &[ScoreRow] {
        &self.rows
    }

    pub fn score(&self, p: &Phoneme) -> Option<f64> {
        self.rows
            .binary_search_by(|r| r.stats.phoneme.cmp(p))
            .ok()
            .map(|i| self.rows[i].phdscore)
    }

    /// (phoneme, score) pairs in symbol order.
    pub fn scores(&self) -> impl Iterator<Item = (&Phoneme, f64)> {
        self.rows.iter().map(|r| (&r.stats.phoneme, r.phdscore))
    }
}

/// `w_e·E_norm + w_h·H_norm + w_a·(1 − A_norm)`.
pub fn composite(e_norm: f64, h_norm: f64, a_norm: f64, w: &ScoreWeights) -> f64 {
    let s = w.w_e * e_norm + w.w_h * h_norm + w.w_a * (1.0 - a_norm);
    // weights may sum to 1 only within tolerance
    s.clamp(0.0, 1.0)
}

pub fn compose(norm: Vec<NormalizedRow>, weights: ScoreWeights) -> PhDScoreTable {
    let rows = norm
        .into_iter()
        .map(|n| ScoreRow {
            phdscore: composite(n.e_norm, n.h_norm, n.a_norm, &weights),
            stats: n.stats,
            e_norm: n.e_norm,
            h_norm: n.h_norm,
            a_norm: n.a_norm,
        })
        .collect();
    PhDScoreTable::from_rows(rows, weights, None)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtteranceScore {
    pub value: f64,
    /// Set when the reference was empty and the score defaulted to 0.
    pub empty_reference: bool,
}

/// Mean phoneme score over the reference sequence, repeats included.
pub fn utterance_score(utt: &UtteranceRecord, table: &PhDScoreTable) -> Result<UtteranceScore> {
    if utt.ref_phonemes.is_empty() {
        return Ok(UtteranceScore { value: 0.0, empty_reference: true });
    }
    let mut sum = 0.0;
    for p in &utt.ref_phonemes {
        sum += table
            .score(p)
            .ok_or_else(|| Error::UnscoredPhoneme(p.to_string()))?;
    }
    Ok(UtteranceScore {
        value: sum / utt.ref_phonemes.len() as f64,
        empty_reference: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceWeight {
    pub utterance_id: String,
    pub mean_score: f64,
    pub weight: f64,
}

/// Maps scores linearly onto [1, 5]: the lowest score gets 1, the highest 5.
/// When every score is equal all weights are 1.
pub fn map_weights(scores: &[(String, f64)]) -> Result<Vec<UtteranceWeight>> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    if let Some((id, s)) = scores.iter().find(|(_, s)| !s.is_finite()) {
        return Err(Error::InvalidWeight { id: id.clone(), weight: *s });
    }
    let lo = scores.iter().map(|(_, s)| *s).fold(f64::INFINITY, f64::min);
    let hi = scores.iter().map(|(_, s)| *s).fold(f64::NEG_INFINITY, f64::max);
    let span = MAX_SAMPLING_WEIGHT - MIN_SAMPLING_WEIGHT;
    Ok(scores
        .iter()
        .map(|(id, s)| UtteranceWeight {
            utterance_id: id.clone(),
            mean_score: *s,
            weight: if hi > lo {
                MIN_SAMPLING_WEIGHT + span * (s - lo) / (hi - lo)
            } else {
                MIN_SAMPLING_WEIGHT
            },
        })
        .collect())
}
