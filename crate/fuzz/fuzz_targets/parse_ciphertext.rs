#![no_main]

use benaloh::cipher::Ciphertext;
use benaloh::{fixtures, Backend, Decryptor};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let sk = fixtures::counterexample_corrected_key();
    let Ok(c) = Ciphertext::parse(text, &sk.public()) else {
        return;
    };
    assert_eq!(c.to_string(), text.trim());
    let dec = Decryptor::new(sk);
    let results: Vec<_> = Backend::ALL.iter().map(|&b| dec.decrypt(&c, b)).collect();
    assert!(results.windows(2).all(|w| w[0] == w[1]), "{results:?}");
});
