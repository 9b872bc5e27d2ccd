//! Corpus-level stages composed from the per-module operations.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::align::collect_instances;
use crate::error::{Error, Result};
use crate::manifest_io::{EnsembleRecord, Split, UtteranceRecord};
use crate::phdscore::{compose, map_weights, normalize_components, utterance_score, PhDScoreTable, ScoreWeights, UtteranceWeight};
use crate::uncertainty::phoneme_stats;

#[derive(Debug, Clone)]
pub struct ScoringOutcome {
    pub table: PhDScoreTable,
    pub utterances: usize,
    pub instances: usize,
    /// Inserted hypothesis symbols, which count toward no phoneme.
    pub insertions: usize,
}

/// Ensembles → per-phoneme score table. All ensembles must come from one
/// backend configuration. Parallel over utterances; the result does not
/// depend on the thread count.
pub fn score_corpus(
    manifest: &[UtteranceRecord],
    ensembles: &[EnsembleRecord],
    weights: ScoreWeights,
) -> Result<ScoringOutcome> {
    let backend = ensembles.first().map(|e| e.backend.clone());
    if let Some(b) = &backend {
        if let Some(other) = ensembles.iter().find(|e| e.backend != *b) {
            return Err(Error::MixedBackends(b.model_id.clone(), other.backend.model_id.clone()));
        }
    }
    let by_id: HashMap<&str, &UtteranceRecord> = manifest.iter().map(|r| (r.id.as_str(), r)).collect();
    let per_utt = ensembles
        .par_iter()
        .map(|ens| {
            let utt = by_id
                .get(ens.utterance_id.as_str())
                .ok_or_else(|| Error::UnknownUtterance(ens.utterance_id.clone()))?;
            collect_instances(utt, ens)
        })
        .collect::<Result<Vec<_>>>()?;
    let insertions = per_utt.iter().map(|u| u.insertions).sum();
    let stats = phoneme_stats(per_utt.iter().flat_map(|u| &u.instances));
    let instances = stats.iter().map(|s| s.count_total).sum();
    let mut table = compose(normalize_components(&stats)?, weights);
    table.backend = backend;
    Ok(ScoringOutcome {
        table,
        utterances: per_utt.len(),
        instances,
        insertions,
    })
}

#[derive(Debug, Clone)]
pub struct WeightOutcome {
    /// Sorted by utterance id.
    pub weights: Vec<UtteranceWeight>,
    /// Training utterances whose empty reference defaulted to score 0.
    pub empty_references: Vec<String>,
}

/// Sampling weights for every training utterance of `manifest`.
pub fn weigh_utterances(manifest: &[UtteranceRecord], table: &PhDScoreTable) -> Result<WeightOutcome> {
    let mut train: Vec<&UtteranceRecord> = manifest.iter().filter(|r| r.split == Split::Train).collect();
    train.sort_by(|a, b| a.id.cmp(&b.id));
    let mut scores = Vec::with_capacity(train.len());
    let mut empty_references = Vec::new();
    for r in train {
        let s = utterance_score(r, table)?;
        if s.empty_reference {
            empty_references.push(r.id.clone());
        }
        scores.push((r.id.clone(), s.value));
    }
    Ok(WeightOutcome {
        weights: map_weights(&scores)?,
        empty_references,
    })
}
