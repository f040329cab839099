#![no_main]

use benaloh::keyfile::parse_key_file;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(key) = parse_key_file(text) {
        // only canonical text parses
        assert_eq!(key.serialize(), text);
    }
});
