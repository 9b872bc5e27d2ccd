#![no_main]
use libfuzzer_sys::fuzz_target;
use phdscore::rechain::{parse_templates, plan_sentences};

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let templates = parse_templates(&text);
    let outcome = plan_sentences(&templates, &[], 100);
    assert!(outcome.plans.is_empty());
});
