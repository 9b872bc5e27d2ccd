#![no_main]
use libfuzzer_sys::fuzz_target;
use phdscore::simspeaker::parse_profile;
use phdscore::{Inventory, NeighborMap};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let inv = Inventory::parse("a\nb\nr\ns\n").unwrap();
    if let Ok(spec) = parse_profile(text) {
        if let Ok(model) = spec.build(&inv, &NeighborMap::default()) {
            assert!(model.error_masses().values().all(|m| (0.0..=1.0).contains(m)));
        }
    }
});
