//! Per-instance entropy and agreement, aggregated into the raw per-phoneme
//! components: majority-vote error rate, mean entropy and mean agreement.

use std::collections::BTreeMap;

use crate::align::{majority_vote, InstanceEnsemble};
use crate::phoneme::Phoneme;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceStats {
    pub entropy_bits: f64,
    pub agreement: f64,
    pub majority_correct: bool,
}

/// Raw components for one phoneme type.
#[derive(Debug, Clone, PartialEq)]
pub struct PhonemeStats {
    pub phoneme: Phoneme,
    pub count_total: usize,
    pub count_errors_maj: usize,
    /// Fraction of instances whose majority vote missed the reference.
    pub error_rate: f64,
    /// Mean instance entropy in bits.
    pub mean_entropy: f64,
    /// Mean fraction of passes agreeing with the reference.
    pub mean_agreement: f64,
}

/// Shannon entropy (base 2) of the empirical distribution of predictions.
/// The deletion symbol is an ordinary outcome here.
pub fn instance_entropy(inst: &InstanceEnsemble) -> f64 {
    let m = inst.predictions.len();
    if m == 0 {
        return 0.0;
    }
    let mut counts: BTreeMap<&Phoneme, usize> = BTreeMap::new();
    for p in &inst.predictions {
        *counts.entry(p).or_default() += 1;
    }
    let m = m as f64;
    let h: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / m;
            -p * p.log2()
        })
        .sum();
    // a single outcome yields -0.0
    h.max(0.0)
}

/// Fraction of predictions equal to the reference phoneme.
pub fn instance_agreement(inst: &InstanceEnsemble) -> f64 {
    if inst.predictions.is_empty() {
        return 0.0;
    }
    let hits = inst.predictions.iter().filter(|p| **p == inst.ref_phoneme).count();
    hits as f64 / inst.predictions.len() as f64
}

pub fn instance_stats(inst: &InstanceEnsemble) -> InstanceStats {
    InstanceStats {
        entropy_bits: instance_entropy(inst),
        agreement: instance_agreement(inst),
        majority_correct: majority_vote(inst) == inst.ref_phoneme,
    }
}

/// Aggregates instances by reference phoneme. Output is sorted by symbol;
/// phonemes without instances do not appear.
pub fn phoneme_stats<'a, I>(instances: I) -> Vec<PhonemeStats>
where
    I: IntoIterator<Item = &'a InstanceEnsemble>,
{
    #[derive(Default)]
    struct Acc {
        n: usize,
        errors: usize,
        entropy: f64,
        agreement: f64,
    }
    let mut groups: BTreeMap<Phoneme, Acc> = BTreeMap::new();
    for inst in instances {
        let s = instance_stats(inst);
        let acc = groups.entry(inst.ref_phoneme.clone()).or_default();
        acc.n += 1;
        acc.errors += usize::from(!s.majority_correct);
        acc.entropy += s.entropy_bits;
        acc.agreement += s.agreement;
    }
    groups
        .into_iter()
        .map(|(phoneme, acc)| {
            let n = acc.n as f64;
            PhonemeStats {
                phoneme,
                count_total: acc.n,
                count_errors_maj: acc.errors,
                error_rate: acc.errors as f64 / n,
                mean_entropy: acc.entropy / n,
                mean_agreement: acc.agreement / n,
            }
        })
        .collect()
}
