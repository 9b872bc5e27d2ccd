#![no_main]
use libfuzzer_sys::fuzz_target;
use phdscore::{Inventory, NeighborMap};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let inv = Inventory::parse("a\nb\nr\ns\n").unwrap();
    if let Ok(map) = NeighborMap::parse(text, &inv) {
        for p in inv.symbols() {
            if let Some(n) = map.neighbor(p, &inv) {
                assert!(inv.contains(&n) && &n != p);
            }
        }
    }
});
