//! Shared fixtures for integration tests: a synthetic single-speaker corpus
//! drawn over a small ARPAbet-style inventory.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use phdscore::manifest_io::{ClinicalLabel, ClinicalReport, Split, UtteranceRecord};
use phdscore::{Inventory, Phoneme};
use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub const SYMBOLS: [&str; 12] = ["AA", "AE", "B", "D", "EH", "IY", "K", "L", "M", "R", "S", "T"];
pub const HARD: [&str; 3] = ["R", "S", "L"];

pub fn inventory() -> Inventory {
    Inventory::from_symbols(SYMBOLS).unwrap()
}

pub fn phoneme(s: &str) -> Phoneme {
    Phoneme::new(s).unwrap()
}

/// `n` training utterances of 3..=6 phonemes, every symbol guaranteed to
/// appear at least once.
pub fn corpus(n: usize, seed: u64) -> Vec<UtteranceRecord> {
    let inv = inventory();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let len = 3 + (rng.next_u64() % 4) as usize;
            let mut refs: Vec<Phoneme> = (0..len)
                .map(|_| inv.symbols()[(rng.next_u64() % inv.len() as u64) as usize].clone())
                .collect();
            if i < inv.len() {
                refs[0] = inv.symbols()[i].clone();
            }
            UtteranceRecord {
                id: format!("utt{i:03}"),
                text: format!("utterance {i}"),
                ref_phonemes: refs,
                audio_path: None,
                split: Split::Train,
            }
        })
        .collect()
}

pub fn hard_set() -> BTreeSet<Phoneme> {
    HARD.iter().map(|s| phoneme(s)).collect()
}

/// Clinical labels marking exactly `difficult` as positives.
pub fn report(difficult: &BTreeSet<Phoneme>) -> ClinicalReport {
    ClinicalReport {
        report_id: "planted".into(),
        date: NaiveDate::from_ymd_opt(2025, 1, 1).unwrap(),
        labels: inventory()
            .symbols()
            .iter()
            .map(|p| (p.clone(), ClinicalLabel { difficult: difficult.contains(p), severity: None }))
            .collect(),
    }
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn score_map(table: &phdscore::phdscore::PhDScoreTable) -> BTreeMap<Phoneme, f64> {
    table.scores().map(|(p, s)| (p.clone(), s)).collect()
}
