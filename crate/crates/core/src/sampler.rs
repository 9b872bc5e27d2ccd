//! Turns utterance weights into concrete epoch compositions.
//!
//! Two semantics are offered. `sample_epoch` draws i.i.d. with replacement
//! with probability proportional to weight. `expand_deterministic` repeats
//! each utterance by its largest-remainder share of `factor · Σ weights`.
//!
//! Random draws use xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`). Each draw takes one 64-bit output
//! `x`, forms `u = (x >> 11) · 2⁻⁵³` and selects the first utterance, in
//! ascending id order, whose cumulative weight exceeds `u · Σ weights`.
//! The procedure is fully specified so plans can be reproduced elsewhere.

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::phdscore::UtteranceWeight;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlanMode {
    Replacement { n: usize },
    Expansion { factor: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochPlan {
    pub draws: Vec<String>,
    pub seed: u64,
    pub mode: PlanMode,
}

impl EpochPlan {
    /// Number of times each id appears, in ascending id order.
    pub fn counts(&self) -> Vec<(String, usize)> {
        let mut map = std::collections::BTreeMap::<&str, usize>::new();
        for d in &self.draws {
            *map.entry(d).or_default() += 1;
        }
        map.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

fn sorted_checked(weights: &[UtteranceWeight]) -> Result<Vec<&UtteranceWeight>> {
    if weights.is_empty() {
        return Err(Error::EmptyScores);
    }
    let mut sorted: Vec<&UtteranceWeight> = weights.iter().collect();
    sorted.sort_by(|a, b| a.utterance_id.cmp(&b.utterance_id));
    for pair in sorted.windows(2) {
        if pair[0].utterance_id == pair[1].utterance_id {
            return Err(Error::DuplicateId(pair[0].utterance_id.clone()));
        }
    }
    if let Some(w) = sorted.iter().find(|w| !(w.weight.is_finite() && w.weight > 0.0)) {
        return Err(Error::InvalidWeight {
            id: w.utterance_id.clone(),
            weight: w.weight,
        });
    }
    Ok(sorted)
}

/// Uniform double in [0, 1) from the top 53 bits of one output.
fn unit_f64(rng: &mut Xoshiro256PlusPlus) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draws `n` ids with replacement, P(id) = weight / Σ weights.
pub fn sample_epoch(weights: &[UtteranceWeight], n: usize, seed: u64) -> Result<EpochPlan> {
    if n == 0 {
        return Err(Error::InvalidArgument("epoch size must be at least 1".into()));
    }
    let sorted = sorted_checked(weights)?;
    let cumulative: Vec<f64> = sorted
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w.weight;
            Some(*acc)
        })
        .collect();
    let total = *cumulative.last().expect("non-empty");
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let draws = (0..n)
        .map(|_| {
            let target = unit_f64(&mut rng) * total;
            let idx = cumulative.partition_point(|&c| c <= target).min(sorted.len() - 1);
            sorted[idx].utterance_id.clone()
        })
        .collect();
    Ok(EpochPlan {
        draws,
        seed,
        mode: PlanMode::Replacement { n },
    })
}

/// Largest-remainder apportionment of `round(factor · Σ weights)` copies.
/// Ties between equal remainders go to the smaller id. Returned in id order.
pub fn expansion_counts(weights: &[UtteranceWeight], factor: f64) -> Result<Vec<(String, usize)>> {
    if !(factor.is_finite() && factor >= 1.0) {
        return Err(Error::InvalidArgument(format!("expansion factor must be >= 1, got {factor}")));
    }
    let sorted = sorted_checked(weights)?;
    let quotas: Vec<f64> = sorted.iter().map(|w| w.weight * factor).collect();
    let total = quotas.iter().sum::<f64>().round() as usize;
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    // stable sort keeps ascending id order among equal remainders
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra)
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    Ok(sorted
        .iter()
        .zip(counts)
        .map(|(w, c)| (w.utterance_id.clone(), c))
        .collect())
}

/// Deterministic expansion: each id repeated by its apportioned count,
/// grouped in ascending id order.
pub fn expand_deterministic(weights: &[UtteranceWeight], factor: f64) -> Result<EpochPlan> {
    let counts = expansion_counts(weights, factor)?;
    let draws = counts
        .into_iter()
        .flat_map(|(id, c)| std::iter::repeat_n(id, c))
        .collect();
    Ok(EpochPlan {
        draws,
        seed: 0,
        mode: PlanMode::Expansion { factor },
    })
}
