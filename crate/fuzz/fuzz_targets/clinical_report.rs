#![no_main]
use libfuzzer_sys::fuzz_target;
use phdscore::manifest_io::parse_clinical_report;
use phdscore::Inventory;

fuzz_target!(|data: &[u8]| {
    let Some((&threshold, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let inv = Inventory::parse("a\nb\nr\ns\n").unwrap();
    if let Ok(report) = parse_clinical_report(text, &inv, threshold % 4) {
        assert!(report.positives().count() > 0);
        assert!(report.positives().count() < report.labels.len());
    }
});
