#![no_main]
use libfuzzer_sys::fuzz_target;
use phdscore::metrics::{delta_report, parse_rates, write_rates};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rates) = parse_rates(text) {
        assert_eq!(parse_rates(&write_rates(&rates)).unwrap(), rates);
        for row in delta_report(&rates, &rates).unwrap() {
            assert_eq!(row.delta_cer_pp, 0.0);
        }
    }
});
