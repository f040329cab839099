#![no_main]

use benaloh::apps::{CardMode, TrustScenario};
use benaloh::{Backend, ConditionMode, RMode};
use libfuzzer_sys::fuzz_target;

fn round_trip<T>(text: &str)
where
    T: std::str::FromStr + std::fmt::Display + PartialEq + std::fmt::Debug,
{
    if let Ok(v) = text.parse::<T>() {
        let again: T = v.to_string().parse().ok().expect("display output parses");
        assert_eq!(again, v);
    }
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    round_trip::<RMode>(text);
    round_trip::<ConditionMode>(text);
    round_trip::<Backend>(text);
    round_trip::<CardMode>(text);
    round_trip::<TrustScenario>(text);
});
