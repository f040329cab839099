#![no_main]

use benaloh::FactoredInteger;
use libfuzzer_sys::fuzz_target;
use num_bigint::BigUint;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(f) = FactoredInteger::parse_factor_list(text) {
        assert_eq!(f.to_string(), text);
        let product = f.factors().iter().fold(BigUint::from(1u8), |acc, (p, e)| acc * p.pow(*e));
        assert_eq!(&product, f.value());
    }
});
