//! Minimum-edit-distance alignment of hypothesis phoneme sequences to the
//! reference, and regrouping of the M aligned predictions per reference slot.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::manifest_io::{EnsembleRecord, UtteranceRecord};
use crate::phoneme::Phoneme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Match,
    Substitute,
    Delete,
    Insert,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentOp {
    pub kind: OpKind,
    /// Reference position; `None` only for insertions.
    pub ref_index: Option<usize>,
    /// Aligned hypothesis symbol, or EPSILON for deletions.
    pub hyp_symbol: Phoneme,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub ops: Vec<AlignmentOp>,
    pub distance: usize,
}

impl Alignment {
    pub fn insertions(&self) -> usize {
        self.ops.iter().filter(|op| op.kind == OpKind::Insert).count()
    }
}

/// Full (|a|+1) x (|b|+1) unit-cost edit-distance table, row-major.
fn distance_table<T: PartialEq>(a: &[T], b: &[T]) -> Vec<usize> {
    let cols = b.len() + 1;
    let mut d = vec![0usize; (a.len() + 1) * cols];
    for (j, cell) in d.iter_mut().take(cols).enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        d[i * cols] = i;
        for j in 1..cols {
            let sub = d[(i - 1) * cols + j - 1] + usize::from(a[i - 1] != b[j - 1]);
            let del = d[(i - 1) * cols + j] + 1;
            let ins = d[i * cols + j - 1] + 1;
            d[i * cols + j] = sub.min(del).min(ins);
        }
    }
    d
}

/// Unit-cost Levenshtein distance over arbitrary tokens, two-row memory.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            curr[j + 1] = (prev[j] + usize::from(x != y)).min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Aligns `hyp` to `reference` with unit costs.
///
/// The backtrace walks from the bottom-right cell and, among the moves
/// consistent with an optimal path, prefers Match, then Substitute, then
/// Delete, then Insert. The result is therefore unique for a given input.
pub fn align(reference: &[Phoneme], hyp: &[Phoneme]) -> Result<Alignment> {
    if reference.iter().chain(hyp).any(Phoneme::is_epsilon) {
        return Err(Error::IllegalSymbol);
    }
    let cols = hyp.len() + 1;
    let d = distance_table(reference, hyp);
    let at = |i: usize, j: usize| d[i * cols + j];

    let mut ops = Vec::with_capacity(reference.len().max(hyp.len()));
    let (mut i, mut j) = (reference.len(), hyp.len());
    while i > 0 || j > 0 {
        let here = at(i, j);
        if i > 0 && j > 0 {
            let same = reference[i - 1] == hyp[j - 1];
            if same && at(i - 1, j - 1) == here {
                ops.push(AlignmentOp {
                    kind: OpKind::Match,
                    ref_index: Some(i - 1),
                    hyp_symbol: hyp[j - 1].clone(),
                });
                i -= 1;
                j -= 1;
                continue;
            }
            if !same && at(i - 1, j - 1) + 1 == here {
                ops.push(AlignmentOp {
                    kind: OpKind::Substitute,
                    ref_index: Some(i - 1),
                    hyp_symbol: hyp[j - 1].clone(),
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && at(i - 1, j) + 1 == here {
            ops.push(AlignmentOp {
                kind: OpKind::Delete,
                ref_index: Some(i - 1),
                hyp_symbol: Phoneme::epsilon(),
            });
            i -= 1;
            continue;
        }
        debug_assert!(j > 0 && at(i, j - 1) + 1 == here);
        ops.push(AlignmentOp {
            kind: OpKind::Insert,
            ref_index: None,
            hyp_symbol: hyp[j - 1].clone(),
        });
        j -= 1;
    }
    ops.reverse();
    Ok(Alignment {
        distance: at(reference.len(), hyp.len()),
        ops,
    })
}

/// The M predictions aligned to one reference phoneme instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceEnsemble {
    pub utterance_id: String,
    pub ref_index: usize,
    pub ref_phoneme: Phoneme,
    pub predictions: Vec<Phoneme>,
}

/// Instances of one utterance plus the count of inserted symbols, which
/// belong to no reference slot.
#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceInstances {
    pub instances: Vec<InstanceEnsemble>,
    pub insertions: usize,
}

/// Aligns every hypothesis of `ens` to the reference of `utt` and regroups
/// the predictions per reference position.
pub fn collect_instances(utt: &UtteranceRecord, ens: &EnsembleRecord) -> Result<UtteranceInstances> {
    if ens.utterance_id != utt.id {
        return Err(Error::UnknownUtterance(ens.utterance_id.clone()));
    }
    if utt.ref_phonemes.is_empty() {
        return Err(Error::EmptyReferenceSequence(utt.id.clone()));
    }
    let m = ens.hypotheses.len();
    let mut instances: Vec<InstanceEnsemble> = utt
        .ref_phonemes
        .iter()
        .enumerate()
        .map(|(i, p)| InstanceEnsemble {
            utterance_id: utt.id.clone(),
            ref_index: i,
            ref_phoneme: p.clone(),
            predictions: Vec::with_capacity(m),
        })
        .collect();
    let mut insertions = 0;
    for hyp in &ens.hypotheses {
        let alignment = align(&utt.ref_phonemes, hyp)?;
        for op in alignment.ops {
            match op.ref_index {
                Some(i) => instances[i].predictions.push(op.hyp_symbol),
                None => insertions += 1,
            }
        }
    }
    Ok(UtteranceInstances { instances, insertions })
}

/// Modal prediction. Ties go to the reference phoneme when it is among the
/// tied modes, otherwise to the lexicographically smallest symbol.
pub fn majority_vote(inst: &InstanceEnsemble) -> Phoneme {
    let mut counts: BTreeMap<&Phoneme, usize> = BTreeMap::new();
    for p in &inst.predictions {
        *counts.entry(p).or_default() += 1;
    }
    let best = counts.values().copied().max().unwrap_or(0);
    if counts.get(&inst.ref_phoneme) == Some(&best) {
        return inst.ref_phoneme.clone();
    }
    counts
        .into_iter()
        .find(|&(_, c)| c == best)
        .map(|(p, _)| p.clone())
        .unwrap_or_else(Phoneme::epsilon)
}
