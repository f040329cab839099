//! Small published parameter sets, shared by tests, the CLI and the demos.

use num_bigint::BigUint;

use crate::keys::PrivateKey;
use crate::numtheory::FactoredInteger;

/// `p = 241, q = 179, r = 15, y = 27`: accepted by the original rule, yet
/// `y^(phi/3) = 1 (mod n)` so the cleartext space collapses to `Z_5`.
pub fn counterexample_key() -> PrivateKey {
    key_241_179(27)
}

/// Same primes and `r` with `y = 3`, the smallest base passing the corrected
/// rule. Note `3^3 = 27`.
pub fn counterexample_corrected_key() -> PrivateKey {
    key_241_179(3)
}

fn key_241_179(y: u32) -> PrivateKey {
    let r = FactoredInteger::from_u64_factors(&[(3, 1), (5, 1)]).expect("3 and 5 are prime");
    PrivateKey::new(BigUint::from(241u32), BigUint::from(179u32), r, BigUint::from(y))
        .expect("fixture key is well formed")
}

/// Cofactor used to build the 512-bit example prime
/// `p = 2 * 3 * 5 * 7 * 11 * 13 * LARGE_P_COFACTOR + 1`. It is not itself prime.
pub const LARGE_P_COFACTOR: &str = "446480450547539030954845987286241962287025168850895550373744969820904563106012220339722753851711735853813914691524677018107022404660225439441679953592";

/// The 512-bit prime paired with the example `p`.
pub const LARGE_Q: &str = "10055855947456947824680518748654384595609524365444295033292671082791323022555160232601405723625177570767523893639864538140315412108959927459825236754568279";

fn decimal(text: &str) -> BigUint {
    let digits: String = text.chars().filter(char::is_ascii_digit).collect();
    BigUint::parse_bytes(digits.as_bytes(), 10).expect("constant is decimal")
}

/// The example primes `(p, q)` with `gcd(p - 1, q - 1) = 2`.
pub fn large_example_primes() -> (BigUint, BigUint) {
    let p = decimal(LARGE_P_COFACTOR) * 15015u32 * 2u32 + 1u32;
    (p, decimal(LARGE_Q))
}

/// The largest admissible `r` for [`large_example_primes`], i.e. `(p - 1)/16`,
/// with its factorization. The 133-digit factor is beyond trial division, so
/// the factorization is supplied explicitly (and every factor is still
/// primality-checked).
pub fn large_example_r() -> FactoredInteger {
    const BIG_FACTOR: &str = "23049375345568803342875031474483907793087396941434346400001609527422126213924070596944996804156009282142237730926103088088622634133573";
    let small = [3u64, 5, 7, 11, 13, 23, 307, 317, 1_081_752_299];
    FactoredInteger::from_factors(
        small
            .iter()
            .map(|&s| (BigUint::from(s), 1))
            .chain(std::iter::once((decimal(BIG_FACTOR), 1))),
    )
    .expect("factors are prime")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::{compute_r_with_bound, is_probable_prime};
    use num_integer::Integer;

    #[test]
    fn large_example_is_consistent() {
        let (p, q) = large_example_primes();
        assert!(is_probable_prime(&p));
        assert!(is_probable_prime(&q));
        assert_eq!(p.bits(), 513);
        assert_eq!(q.bits(), 512);
        let p1 = &p - 1u8;
        assert_eq!(p1.gcd(&(&q - 1u8)), BigUint::from(2u8));
        let r = large_example_r();
        assert_eq!(r.value() * 16u8, p1);
        // the cofactor is even, hence composite
        assert!(!is_probable_prime(&decimal(LARGE_P_COFACTOR)));
        // trial division alone cannot split the remaining cofactor
        assert!(compute_r_with_bound(&p, &q, 1000).is_err());
    }
}
