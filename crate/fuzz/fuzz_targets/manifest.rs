#![no_main]
use libfuzzer_sys::fuzz_target;
use phdscore::manifest_io::{parse_manifest, write_manifest};
use phdscore::Inventory;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let inv = Inventory::parse("a\nb\nr\ns\nʃ\n").unwrap();
    if let Ok(records) = parse_manifest(text, &inv) {
        let again = parse_manifest(&write_manifest(&records), &inv).unwrap();
        assert_eq!(again, records);
    }
});
