#![no_main]
use libfuzzer_sys::fuzz_target;
use phdscore::Inventory;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(inv) = Inventory::parse(text) {
        let listed: String = inv.symbols().iter().map(|p| format!("{p}\n")).collect();
        assert_eq!(Inventory::parse(&listed).unwrap().symbols(), inv.symbols());
    }
});
