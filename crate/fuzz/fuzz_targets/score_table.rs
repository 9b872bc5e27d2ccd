#![no_main]
use libfuzzer_sys::fuzz_target;
use phdscore::manifest_io::{parse_score_table, write_score_table};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = parse_score_table(text) {
        let written = write_score_table(&table);
        assert_eq!(write_score_table(&parse_score_table(&written).unwrap()), written);
    }
});
