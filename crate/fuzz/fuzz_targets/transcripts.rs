#![no_main]
use libfuzzer_sys::fuzz_target;
use phdscore::metrics::{cer, parse_transcripts, wer};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(hyps) = parse_transcripts(text) {
        let mut it = hyps.values();
        if let (Some(a), Some(b)) = (it.next(), it.next()) {
            if let Ok(rate) = cer(a, b) {
                assert!(rate >= 0.0);
            }
            if let Ok(rate) = wer(a, b) {
                assert!(rate >= 0.0);
            }
        }
    }
});
