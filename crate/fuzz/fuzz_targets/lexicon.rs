#![no_main]
use libfuzzer_sys::fuzz_target;
use phdscore::manifest_io::{lexicon_lookup, parse_lexicon};
use phdscore::Inventory;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let inv = Inventory::parse("a\nb\nr\ns\n").unwrap();
    if let Ok(lex) = parse_lexicon(text, &inv) {
        for word in lex.entries.keys() {
            assert!(!lexicon_lookup(&lex, word).unwrap().is_empty());
            // upper-then-lower is not an identity in general (dotless i)
            let upper = word.to_uppercase();
            if upper.to_lowercase() == *word {
                assert!(lexicon_lookup(&lex, &upper).is_ok());
            }
        }
    }
});
