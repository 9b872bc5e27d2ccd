#![no_main]
use libfuzzer_sys::fuzz_target;
use phdscore::manifest_io::{parse_weight_manifest, write_weight_manifest};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(weights) = parse_weight_manifest(text) {
        assert_eq!(parse_weight_manifest(&write_weight_manifest(&weights)).unwrap(), weights);
    }
});
