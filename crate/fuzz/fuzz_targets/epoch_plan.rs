#![no_main]
use libfuzzer_sys::fuzz_target;
use phdscore::manifest_io::{parse_epoch_plan, write_epoch_plan};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(plan) = parse_epoch_plan(text) {
        assert_eq!(parse_epoch_plan(&write_epoch_plan(&plan)).unwrap(), plan);
    }
});
