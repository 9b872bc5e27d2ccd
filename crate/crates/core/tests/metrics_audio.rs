use std::io::Cursor;
use std::path::Path;

use phdscore::metrics::{cer, char_counts, delta_report, normalize_text, wer, EditCounts, ErrorRates, SplitRates};
use phdscore::manifest_io::Split;
use phdscore::rechain::{concat_samples, decode_pcm16, encode_pcm16, gap_frames, PcmAudio};
use proptest::prelude::*;

fn brute(a: &[char], b: &[char]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => (brute(ra, rb) + usize::from(x != y))
            .min(brute(ra, b) + 1)
            .min(brute(a, rb) + 1),
    }
}

fn text() -> impl Strategy<Value = String> {
    "[ab c]{1,6}"
}

proptest! {
    #[test]
    fn char_edits_match_brute_force(r in "[a-c]{1,6}", h in "[a-c]{0,6}") {
        let rc: Vec<char> = r.chars().collect();
        let hc: Vec<char> = h.chars().collect();
        prop_assert_eq!(char_counts(&r, &h).unwrap().edits, brute(&rc, &hc));
    }

    #[test]
    fn triangle_inequality(a in "[a-c]{1,6}", m in "[a-c]{1,6}", b in "[a-c]{1,6}") {
        let d = |x: &str, y: &str| char_counts(x, y).unwrap().edits;
        prop_assert!(d(&a, &b) <= d(&a, &m) + d(&m, &b));
    }

    #[test]
    fn zero_iff_equal_after_normalization(r in text().prop_filter("non-blank", |s| !s.trim().is_empty()), h in text()) {
        let same_chars = normalize_text(&r) == normalize_text(&h);
        prop_assert_eq!(cer(&r, &h).unwrap() == 0.0, same_chars);
        let rw: Vec<String> = normalize_text(&r).split(' ').map(str::to_string).collect();
        let hw: Vec<String> = normalize_text(&h).split(' ').filter(|w| !w.is_empty()).map(str::to_string).collect();
        prop_assert_eq!(wer(&r, &h).unwrap() == 0.0, rw == hw);
    }

    #[test]
    fn delta_against_itself_is_zero(counts in prop::collection::vec((0usize..40, 1usize..40, 0usize..9, 1usize..9), 1..=3)) {
        let rates: SplitRates = counts
            .iter()
            .zip([Split::Train, Split::TestNonnormative, Split::TestNormative])
            .map(|(&(ce, cl, we, wl), s)| (s, ErrorRates {
                chars: EditCounts { edits: ce, ref_len: cl },
                words: EditCounts { edits: we, ref_len: wl },
            }))
            .collect();
        for row in delta_report(&rates, &rates).unwrap() {
            prop_assert_eq!(row.delta_cer_pp, 0.0);
            prop_assert_eq!(row.delta_wer_pp, 0.0);
        }
    }
}

#[test]
fn punctuation_and_case_are_ignored() {
    assert_eq!(cer("Hello, World!", "hello world").unwrap(), 0.0);
    assert_eq!(wer("the  cat; sat.", "The cat sat").unwrap(), 0.0);
}

fn clip(rate: u32, channels: u16) -> impl Strategy<Value = PcmAudio> {
    prop::collection::vec(any::<i16>(), 0..400).prop_map(move |mut samples| {
        samples.truncate(samples.len() / channels as usize * channels as usize);
        PcmAudio { sample_rate: rate, channels, samples }
    })
}

proptest! {
    #[test]
    fn concat_length_is_closed_form(parts in prop::collection::vec(clip(16_000, 1), 1..5), gap in 0u32..300) {
        let out = concat_samples(&parts, gap).unwrap();
        let expected = parts.iter().map(PcmAudio::frames).sum::<usize>() + gap_frames(16_000, gap) * (parts.len() - 1);
        prop_assert_eq!(out.frames(), expected);
    }

    #[test]
    fn concat_is_associative(a in clip(8_000, 2), b in clip(8_000, 2), c in clip(8_000, 2), gap in 0u32..50) {
        let left = concat_samples(&[concat_samples(&[a.clone(), b.clone()], gap).unwrap(), c.clone()], gap).unwrap();
        let right = concat_samples(&[a.clone(), concat_samples(&[b.clone(), c.clone()], gap).unwrap()], gap).unwrap();
        let flat = concat_samples(&[a, b, c], gap).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(encode_pcm16(&left).unwrap(), encode_pcm16(&flat).unwrap());
    }

    #[test]
    fn wav_round_trip(a in clip(22_050, 2)) {
        let bytes = encode_pcm16(&a).unwrap();
        prop_assert_eq!(decode_pcm16(Cursor::new(bytes), Path::new("mem")).unwrap(), a);
    }
}
