//! Modular arithmetic, prime generation, smooth factorization, orders and
//! discrete logarithms.

mod dlog;
mod factored;
mod prime;

pub use dlog::{crt, dlog, mod_inverse, BsgsTable, DlogStrategy};
pub use factored::{parse_decimal, FactoredInteger, DEFAULT_SMOOTHNESS_BOUND};
pub use prime::{
    gen_prime, gen_prime_with_factor, is_probable_prime, miller_rabin, random_below, random_unit,
    MILLER_RABIN_ROUNDS,
};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Primes up to `bound`, in increasing order.
pub fn small_primes_up_to(bound: u64) -> Vec<u64> {
    factored::small_primes(bound).into_owned()
}

/// `base^exp mod modulus`.
pub fn mod_pow(base: &BigUint, exp: &BigUint, modulus: &BigUint) -> Result<BigUint> {
    if *modulus < BigUint::from(2u8) {
        return Err(Error::param("modulus must be at least 2"));
    }
    Ok(base.modpow(exp, modulus))
}

/// The largest `r | p - 1` coprime with both `(p - 1) / r` and `q - 1`,
/// obtained by repeatedly dividing out `gcd(r, q - 1)` starting from `p - 1`.
pub fn compute_r(p: &BigUint, q: &BigUint) -> Result<FactoredInteger> {
    compute_r_with_bound(p, q, DEFAULT_SMOOTHNESS_BOUND)
}

pub fn compute_r_with_bound(p: &BigUint, q: &BigUint, bound: u64) -> Result<FactoredInteger> {
    for (name, v) in [("p", p), ("q", q)] {
        if v.is_even() || !is_probable_prime(v) {
            return Err(Error::param(format!("{name} = {v} is not an odd prime")));
        }
    }
    if p == q {
        return Err(Error::param("p and q must differ"));
    }
    let q1 = q - 1u8;
    let mut r = p - 1u8;
    loop {
        let g = q1.gcd(&r);
        if g.is_one() {
            break;
        }
        r /= g;
    }
    if r.is_one() {
        return Err(Error::Degenerate(format!(
            "every prime of p - 1 = {} also divides q - 1",
            p - 1u8
        )));
    }
    FactoredInteger::factor_with_bound(&r, bound)
}

/// Euler's totient from the factorization: `prod s^(e-1) (s - 1)`.
pub fn euler_phi(r: &FactoredInteger) -> BigUint {
    r.factors()
        .iter()
        .fold(BigUint::one(), |acc, (s, e)| acc * s.pow(e - 1) * (s - 1u8))
}

/// Exponent of the prime `s` in `n`; zero for `n = 0`.
pub fn s_valuation(n: &BigUint, s: &BigUint) -> u32 {
    if n.is_zero() || *s < BigUint::from(2u8) {
        return 0;
    }
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, rem) = n.div_rem(s);
        if !rem.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// Smallest divisor `d` of `order_bound` with `x^d = 1 (mod modulus)`.
///
/// Starts from the bound and strips each prime as long as the power stays one.
pub fn multiplicative_order(
    x: &BigUint,
    modulus: &BigUint,
    order_bound: &FactoredInteger,
) -> Result<BigUint> {
    if *modulus < BigUint::from(2u8) {
        return Err(Error::param("modulus must be at least 2"));
    }
    let x = x % modulus;
    if !x.modpow(order_bound.value(), modulus).is_one() {
        return Err(Error::InconsistentOrder {
            bound: order_bound.value().to_string(),
        });
    }
    let mut d = order_bound.value().clone();
    for (s, e) in order_bound.factors() {
        for _ in 0..*e {
            let candidate = &d / s;
            if x.modpow(&candidate, modulus).is_one() {
                d = candidate;
            } else {
                break;
            }
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn mod_pow_fixture_values() {
        let phi_over_r = big(240 * 178 / 15);
        assert_eq!(mod_pow(&big(27), &phi_over_r, &big(43139)).unwrap(), big(40097));
        assert_eq!(mod_pow(&big(41), &big(15), &big(241)).unwrap(), big(8));
        assert_eq!(mod_pow(&big(27), &big(5), &big(241)).unwrap(), big(8));
        assert_eq!(mod_pow(&big(12345), &big(0), &big(43139)).unwrap(), big(1));
        assert!(mod_pow(&big(3), &big(2), &big(1)).is_err());
    }

    #[test]
    fn compute_r_traces() {
        assert_eq!(compute_r(&big(241), &big(179)).unwrap().value(), &big(15));
        // 22 -> 22/gcd(4, 22) = 11
        assert_eq!(compute_r(&big(23), &big(5)).unwrap().value(), &big(11));
        // 4 -> 2 -> 1
        assert!(matches!(compute_r(&big(5), &big(7)), Err(Error::Degenerate(_))));
        assert!(compute_r(&big(15), &big(7)).is_err());
        assert!(compute_r(&big(7), &big(7)).is_err());
        assert!(compute_r(&big(2), &big(7)).is_err());
    }

    #[test]
    fn compute_r_constraints_on_small_primes() {
        let primes: Vec<u64> = (3..400u64).filter(|&n| is_probable_prime(&big(n))).collect();
        for &p in &primes {
            for &q in &primes {
                if p == q {
                    continue;
                }
                match compute_r(&big(p), &big(q)) {
                    Ok(r) => {
                        let r = r.value().to_u64().unwrap();
                        assert_eq!((p - 1) % r, 0);
                        assert_eq!(num_integer::gcd(r, (p - 1) / r), 1);
                        assert_eq!(num_integer::gcd(r, q - 1), 1);
                    }
                    Err(e) => assert!(matches!(e, Error::Degenerate(_))),
                }
            }
        }
    }

    #[test]
    fn phi_by_enumeration() {
        for v in 1..500u64 {
            let units = (1..=v).filter(|&k| num_integer::gcd(k, v) == 1).count() as u64;
            let f = FactoredInteger::factor_u64(v).unwrap();
            assert_eq!(euler_phi(&f), big(units), "phi({v})");
        }
    }

    #[test]
    fn order_of_decryption_base_on_faulty_key() {
        let x = big(27).modpow(&big(16), &big(241));
        let r = FactoredInteger::factor_u64(15).unwrap();
        assert_eq!(multiplicative_order(&x, &big(241), &r).unwrap(), big(5));
        assert_eq!(multiplicative_order(&big(1), &big(241), &r).unwrap(), big(1));
        let err = multiplicative_order(&big(7), &big(241), &r).unwrap_err();
        assert!(matches!(err, Error::InconsistentOrder { .. }));
    }

    #[test]
    fn order_matches_brute_force_mod_241() {
        let bound = FactoredInteger::factor_u64(240).unwrap();
        for x in 1..241u64 {
            let brute = (1..=240u64).find(|&d| big(x).modpow(&big(d), &big(241)).is_one()).unwrap();
            assert_eq!(multiplicative_order(&big(x), &big(241), &bound).unwrap(), big(brute));
        }
    }

    #[test]
    fn valuation() {
        assert_eq!(s_valuation(&big(240), &big(2)), 4);
        assert_eq!(s_valuation(&big(240), &big(7)), 0);
        assert_eq!(s_valuation(&big(0), &big(3)), 0);
    }
}
