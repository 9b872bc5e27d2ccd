#![no_main]
use libfuzzer_sys::fuzz_target;
use phdscore::manifest_io::{parse_ensembles, parse_manifest, write_ensembles};
use phdscore::Inventory;

const MANIFEST: &str = r#"{"id":"u1","text":"ab","ref_phonemes":"a b","split":"train"}
{"id":"u2","text":"rs","ref_phonemes":"r s r","split":"train"}
"#;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let inv = Inventory::parse("a\nb\nr\ns\n").unwrap();
    let manifest = parse_manifest(MANIFEST, &inv).unwrap();
    if let Ok(records) = parse_ensembles(text, &inv, &manifest) {
        for r in &records {
            assert_eq!(r.hypotheses.len(), r.backend.passes);
        }
        let again = parse_ensembles(&write_ensembles(&records), &inv, &manifest).unwrap();
        assert_eq!(again, records);
    }
});
