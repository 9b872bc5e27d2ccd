#![no_main]
use std::io::Cursor;
use std::path::Path;

use libfuzzer_sys::fuzz_target;
use phdscore::rechain::{decode_pcm16, encode_pcm16};

fuzz_target!(|data: &[u8]| {
    if let Ok(audio) = decode_pcm16(Cursor::new(data), Path::new("fuzz.wav")) {
        let bytes = encode_pcm16(&audio).unwrap();
        assert_eq!(decode_pcm16(Cursor::new(bytes), Path::new("again.wav")).unwrap(), audio);
    }
});
