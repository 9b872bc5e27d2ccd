mod common;

use std::collections::BTreeMap;

use common::{corpus, inventory, phoneme};
use phdscore::manifest_io::*;
use phdscore::metrics::{parse_rates, write_rates, EditCounts, ErrorRates, SplitRates};
use phdscore::phdscore::{map_weights, ScoreWeights};
use phdscore::pipeline::score_corpus;
use phdscore::sampler::{sample_epoch, expand_deterministic};
use phdscore::simspeaker::{make_profile, simulate_corpus};
use phdscore::{Error, NeighborMap};
use proptest::prelude::*;

fn shuffle<T>(v: &mut [T], mut state: u64) {
    for i in (1..v.len()).rev() {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        v.swap(i, (state >> 33) as usize % (i + 1));
    }
}

fn lines_shuffled(text: &str, seed: u64) -> String {
    let mut lines: Vec<&str> = text.lines().collect();
    shuffle(&mut lines, seed);
    lines.iter().map(|l| format!("{l}\n")).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn manifest_round_trip_and_order(n in 1usize..40, seed in any::<u64>()) {
        let inv = inventory();
        let recs = corpus(n, seed);
        let text = write_manifest(&recs);
        let back = parse_manifest(&text, &inv).unwrap();
        prop_assert_eq!(&back, &recs);
        let mut permuted = parse_manifest(&lines_shuffled(&text, seed), &inv).unwrap();
        permuted.sort_by(|a, b| a.id.cmp(&b.id));
        prop_assert_eq!(permuted, recs);
    }

    #[test]
    fn ensemble_round_trip_and_order(n in 1usize..20, seed in any::<u64>(), passes in 1usize..6) {
        let inv = inventory();
        let recs = corpus(n, seed);
        let model = make_profile(&inv, &NeighborMap::default(), &common::hard_set(), 0.05, 0.4).unwrap();
        let ens = simulate_corpus(&recs, &model, passes, seed).unwrap();
        let text = write_ensembles(&ens);
        let back = parse_ensembles(&text, &inv, &recs).unwrap();
        prop_assert_eq!(&back, &ens);
        for e in &back {
            prop_assert_eq!(e.hypotheses.len(), e.backend.passes);
        }
        let mut permuted = parse_ensembles(&lines_shuffled(&text, seed), &inv, &recs).unwrap();
        permuted.sort_by(|a, b| a.utterance_id.cmp(&b.utterance_id));
        let mut sorted = ens.clone();
        sorted.sort_by(|a, b| a.utterance_id.cmp(&b.utterance_id));
        prop_assert_eq!(&permuted, &sorted);
        // scoring does not see input order either
        let a = score_corpus(&recs, &ens, ScoreWeights::default()).unwrap().table;
        let b = score_corpus(&recs, &permuted, ScoreWeights::default()).unwrap().table;
        prop_assert_eq!(write_score_table(&a), write_score_table(&b));
    }

    #[test]
    fn score_table_round_trip(n in 5usize..30, seed in any::<u64>()) {
        let inv = inventory();
        let recs = corpus(n, seed);
        let model = make_profile(&inv, &NeighborMap::default(), &common::hard_set(), 0.05, 0.4).unwrap();
        let ens = simulate_corpus(&recs, &model, 4, seed).unwrap();
        let table = score_corpus(&recs, &ens, ScoreWeights::default()).unwrap().table;
        let text = write_score_table(&table);
        let back = parse_score_table(&text).unwrap();
        prop_assert_eq!(&back, &table);
        prop_assert_eq!(write_score_table(&back), text);
    }

    #[test]
    fn weight_and_plan_round_trip(scores in prop::collection::vec(0.0..1.0f64, 1..30), seed in any::<u64>(), n in 1usize..200) {
        let input: Vec<(String, f64)> = scores.iter().enumerate().map(|(i, &s)| (format!("u{i:03}"), s)).collect();
        let weights = map_weights(&input).unwrap();
        let text = write_weight_manifest(&weights);
        prop_assert_eq!(parse_weight_manifest(&text).unwrap(), weights.clone());
        let plan = sample_epoch(&weights, n, seed).unwrap();
        prop_assert_eq!(parse_epoch_plan(&write_epoch_plan(&plan)).unwrap(), plan);
        let plan = expand_deterministic(&weights, 2.0).unwrap();
        prop_assert_eq!(parse_epoch_plan(&write_epoch_plan(&plan)).unwrap(), plan);
    }

    #[test]
    fn rates_round_trip(counts in prop::collection::vec((0usize..50, 1usize..50, 0usize..20, 1usize..20), 1..=3)) {
        let splits = [Split::Train, Split::TestNonnormative, Split::TestNormative];
        let rates: SplitRates = counts
            .iter()
            .zip(splits)
            .map(|(&(ce, cl, we, wl), s)| (s, ErrorRates {
                chars: EditCounts { edits: ce, ref_len: cl },
                words: EditCounts { edits: we, ref_len: wl },
            }))
            .collect();
        prop_assert_eq!(parse_rates(&write_rates(&rates)).unwrap(), rates);
    }
}

#[test]
fn ensemble_validation() {
    let inv = inventory();
    let recs = corpus(3, 1);
    let ok = r#"{"utterance_id":"utt000","hypotheses":["AA B","AA"],"backend":{"model_id":"m","M":2,"p_drop":0.01,"adaptation_state":"pretrained"}}"#;
    assert!(parse_ensembles(ok, &inv, &recs).is_ok());
    let short = ok.replace("\"M\":2", "\"M\":3");
    assert!(matches!(parse_ensembles(&short, &inv, &recs), Err(Error::EnsembleArityError { .. })));
    let unknown = ok.replace("utt000", "nobody");
    assert!(matches!(parse_ensembles(&unknown, &inv, &recs), Err(Error::UnknownUtterance(_))));
    let foreign = ok.replace("\"AA B\"", "\"AA ZH\"");
    assert!(matches!(parse_ensembles(&foreign, &inv, &recs), Err(Error::UnknownSymbol { .. })));
    let twice = format!("{ok}\n{ok}\n");
    assert!(matches!(parse_ensembles(&twice, &inv, &recs), Err(Error::DuplicateId(_))));
}

#[test]
fn toy_corpus_files_load() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/toy");
    let inv = phdscore::Inventory::load(root.join("inventory.txt")).unwrap();
    let manifest = load_manifest(root.join("manifest.jsonl"), &inv).unwrap();
    assert_eq!(manifest.iter().filter(|r| r.split == Split::Train).count(), 60);
    NeighborMap::load(root.join("neighbors.tsv"), &inv).unwrap();
    let report = load_clinical_report(root.join("clinical_report.tsv"), &inv, 1).unwrap();
    let hard: Vec<&str> = report.positives().map(|p| p.as_str()).collect();
    assert_eq!(hard, ["L", "R", "S"]);
    let lexicon = load_lexicon(root.join("lexicon.tsv"), &inv).unwrap();
    // every word in the manifest is in the lexicon and agrees with the reference
    for rec in &manifest {
        let mut expected = Vec::new();
        for w in rec.text.split_whitespace() {
            expected.extend_from_slice(lexicon_lookup(&lexicon, w).unwrap());
        }
        assert_eq!(expected, rec.ref_phonemes, "{}", rec.id);
    }
    let words = load_manifest(root.join("words.jsonl"), &inv).unwrap();
    assert!(words.iter().all(|w| w.audio_path.is_some()));
    let profile = phdscore::simspeaker::load_profile(root.join("profile.txt")).unwrap();
    let model = profile.build(&inv, &NeighborMap::default()).unwrap();
    let masses: BTreeMap<_, _> = model.error_masses();
    assert!((masses[&phoneme("R")] - 0.4).abs() < 1e-12);
    assert!((masses[&phoneme("AA")] - 0.05).abs() < 1e-12);
}
