use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::prime::is_probable_prime;
use crate::error::{Error, Result};

/// Trial-division bound used when no explicit bound is given.
pub const DEFAULT_SMOOTHNESS_BOUND: u64 = 1_000_000;

/// Cap on the bit length of an integer assembled from a factor list, so
/// hostile inputs like `2^4000000000` are rejected before any arithmetic.
const MAX_FACTORED_BITS: u64 = 1 << 16;

/// A positive integer carried together with its complete prime factorization.
///
/// Primes are kept strictly increasing with exponents of at least one; the
/// product of `prime^exponent` over all entries is always `value`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactoredInteger {
    value: BigUint,
    factors: Vec<(BigUint, u32)>,
}

impl FactoredInteger {
    /// The integer one, with an empty factorization.
    pub fn one() -> Self {
        FactoredInteger {
            value: BigUint::one(),
            factors: Vec::new(),
        }
    }

    /// Builds from `(prime, exponent)` pairs in any order. Repeated primes are
    /// merged; every prime is checked with [`is_probable_prime`].
    pub fn from_factors<I>(factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BigUint, u32)>,
    {
        let mut list: Vec<(BigUint, u32)> = Vec::new();
        for (p, e) in factors {
            if e == 0 {
                return Err(Error::param(format!("exponent of {p} must be at least 1")));
            }
            match list.iter_mut().find(|(q, _)| *q == p) {
                Some(entry) => {
                    entry.1 = entry.1.checked_add(e).ok_or_else(|| {
                        Error::param("exponent overflow while merging factors")
                    })?
                }
                None => list.push((p, e)),
            }
        }
        list.sort_by(|a, b| a.0.cmp(&b.0));

        let mut bits: u64 = 0;
        for (p, e) in &list {
            if !is_probable_prime(p) {
                return Err(Error::param(format!("{p} is not prime")));
            }
            bits = bits.saturating_add((p.bits()).saturating_mul(u64::from(*e)));
            if bits > MAX_FACTORED_BITS {
                return Err(Error::param("factored integer is too large"));
            }
        }

        let value = list
            .iter()
            .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e));
        Ok(FactoredInteger {
            value,
            factors: list,
        })
    }

    pub fn from_u64_factors(factors: &[(u64, u32)]) -> Result<Self> {
        Self::from_factors(factors.iter().map(|&(p, e)| (BigUint::from(p), e)))
    }

    /// Factors `value` by trial division up to [`DEFAULT_SMOOTHNESS_BOUND`],
    /// allowing one leftover cofactor provided it is prime.
    pub fn factor(value: &BigUint) -> Result<Self> {
        Self::factor_with_bound(value, DEFAULT_SMOOTHNESS_BOUND)
    }

    pub fn factor_u64(value: u64) -> Result<Self> {
        Self::factor(&BigUint::from(value))
    }

    /// Trial division by every prime up to `bound`; whatever remains must be
    /// one or a single prime.
    pub fn factor_with_bound(value: &BigUint, bound: u64) -> Result<Self> {
        if value.is_zero() {
            return Err(Error::param("cannot factor zero"));
        }
        let mut rest = value.clone();
        let mut factors = Vec::new();

        for &p in small_primes(bound).iter() {
            if rest.is_one() {
                break;
            }
            // once p^2 exceeds the remainder it is prime or one
            let p_big = BigUint::from(p);
            if &p_big * &p_big > rest {
                break;
            }
            let mut e = 0u32;
            loop {
                let (q, r) = rest.div_rem(&p_big);
                if !r.is_zero() {
                    break;
                }
                rest = q;
                e += 1;
            }
            if e > 0 {
                factors.push((p_big, e));
            }
        }

        if !rest.is_one() {
            if !is_probable_prime(&rest) {
                return Err(Error::param(format!(
                    "{value} has a composite cofactor {rest} beyond the smoothness bound {bound}"
                )));
            }
            factors.push((rest, 1));
        }
        Ok(FactoredInteger {
            value: value.clone(),
            factors,
        })
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    /// `(prime, exponent)` pairs in increasing prime order.
    pub fn factors(&self) -> &[(BigUint, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.iter().map(|(p, _)| p)
    }

    pub fn is_prime(&self) -> bool {
        self.factors.len() == 1 && self.factors[0].1 == 1
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// The exponent of `s` in this integer, zero if `s` is not a factor.
    pub fn valuation(&self, s: &BigUint) -> u32 {
        self.factors
            .iter()
            .find(|(p, _)| p == s)
            .map_or(0, |(_, e)| *e)
    }

    /// Every positive divisor, in increasing order.
    pub fn divisors(&self) -> Vec<BigUint> {
        let mut divs = vec![BigUint::one()];
        for (p, e) in &self.factors {
            let mut next = Vec::with_capacity(divs.len() * (*e as usize + 1));
            for d in &divs {
                let mut acc = d.clone();
                next.push(acc.clone());
                for _ in 0..*e {
                    acc *= p;
                    next.push(acc.clone());
                }
            }
            divs = next;
        }
        divs.sort();
        divs
    }

    /// Factorization of a divisor `d` of this integer.
    pub fn divisor(&self, d: &BigUint) -> Result<Self> {
        if d.is_zero() || !(&self.value % d).is_zero() {
            return Err(Error::param(format!("{d} does not divide {}", self.value)));
        }
        let mut rest = d.clone();
        let mut factors = Vec::new();
        for (p, _) in &self.factors {
            let mut e = 0;
            while (&rest % p).is_zero() {
                rest /= p;
                e += 1;
            }
            if e > 0 {
                factors.push((p.clone(), e));
            }
        }
        Ok(FactoredInteger {
            value: d.clone(),
            factors,
        })
    }

    /// Parses the comma-separated `prime^exp` list used in key files.
    /// The exponent is written only when it differs from one.
    pub fn parse_factor_list(text: &str) -> Result<Self> {
        if text.is_empty() {
            return Err(Error::parse("empty factor list"));
        }
        let mut pairs = Vec::new();
        for item in text.split(',') {
            let (p, e) = match item.split_once('^') {
                Some((p, e)) => {
                    let e = parse_exponent(e)?;
                    if e == 1 {
                        return Err(Error::parse(format!("exponent 1 must be omitted in `{item}`")));
                    }
                    (p, e)
                }
                None => (item, 1),
            };
            let p = parse_decimal(p)?;
            if let Some((last, _)) = pairs.last() {
                if &p <= last {
                    return Err(Error::parse("factor primes must be strictly increasing"));
                }
            }
            pairs.push((p, e));
        }
        Self::from_factors(pairs).map_err(|e| Error::parse(e.to_string()))
    }
}

impl fmt::Display for FactoredInteger {
    /// Writes the key-file factor list, e.g. `2^4,3,5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (p, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            if *e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for FactoredInteger {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_factor_list(s)
    }
}

/// Parses a canonical non-negative decimal: ASCII digits only, no sign, no
/// leading zeros.
pub fn parse_decimal(text: &str) -> Result<BigUint> {
    if text.is_empty() {
        return Err(Error::parse("empty integer"));
    }
    if !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::parse(format!("`{}` is not a decimal integer", truncate(text))));
    }
    if text.len() > 1 && text.starts_with('0') {
        return Err(Error::parse(format!("`{}` has leading zeros", truncate(text))));
    }
    // 2500 digits is well beyond an 8192-bit modulus
    if text.len() > 2_500 {
        return Err(Error::parse("integer is too long"));
    }
    BigUint::parse_bytes(text.as_bytes(), 10).ok_or_else(|| Error::parse("bad integer"))
}

fn parse_exponent(text: &str) -> Result<u32> {
    let e = parse_decimal(text)?;
    let e = e
        .to_u32()
        .ok_or_else(|| Error::parse(format!("exponent `{}` too large", truncate(text))))?;
    if e == 0 {
        return Err(Error::parse("exponent must be at least 1"));
    }
    Ok(e)
}

fn truncate(text: &str) -> String {
    text.chars().take(32).collect()
}

static SIEVE: OnceLock<Vec<u64>> = OnceLock::new();

/// Primes up to `bound`. The table up to the default bound is built once.
pub(crate) fn small_primes(bound: u64) -> Cow<'static, [u64]> {
    let sieve = SIEVE.get_or_init(|| sieve_primes(DEFAULT_SMOOTHNESS_BOUND));
    if bound <= DEFAULT_SMOOTHNESS_BOUND {
        let end = sieve.partition_point(|&p| p <= bound);
        return Cow::Borrowed(&sieve[..end]);
    }
    Cow::Owned(sieve_primes(bound))
}

fn sieve_primes(bound: u64) -> Vec<u64> {
    let n = bound as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_division_small_values() {
        let f = FactoredInteger::factor_u64(240).unwrap();
        assert_eq!(f.to_string(), "2^4,3,5");
        assert_eq!(f.valuation(&BigUint::from(2u8)), 4);
        assert_eq!(FactoredInteger::factor_u64(1).unwrap(), FactoredInteger::one());
        assert!(FactoredInteger::factor_u64(53).unwrap().is_prime());
    }

    #[test]
    fn large_prime_cofactor_is_accepted() {
        // 3*5*7*11*13 times the prime 2^61 - 1
        let big = BigUint::from((1u64 << 61) - 1);
        let value = BigUint::from(15015u32) * &big;
        let f = FactoredInteger::factor(&value).unwrap();
        assert_eq!(f.factors().len(), 6);
        assert_eq!(f.factors()[5], (big, 1));
    }

    #[test]
    fn composite_cofactor_is_rejected() {
        // two primes just above a small bound
        let value = BigUint::from(1009u32 * 1013);
        assert!(FactoredInteger::factor_with_bound(&value, 100).is_err());
        assert!(FactoredInteger::factor_with_bound(&value, 1009).is_ok());
    }

    #[test]
    fn divisors_are_sorted_and_complete() {
        let f = FactoredInteger::factor_u64(60).unwrap();
        let d: Vec<u64> = f.divisors().iter().map(|d| d.to_u64().unwrap()).collect();
        assert_eq!(d, vec![1, 2, 3, 4, 5, 6, 10, 12, 15, 20, 30, 60]);
        let sub = f.divisor(&BigUint::from(20u8)).unwrap();
        assert_eq!(sub.to_string(), "2^2,5");
        assert!(f.divisor(&BigUint::from(7u8)).is_err());
    }

    #[test]
    fn factor_list_text_form() {
        let f: FactoredInteger = "3^5,7".parse().unwrap();
        assert_eq!(f.value(), &BigUint::from(1701u32));
        assert_eq!(f.to_string(), "3^5,7");

        for bad in ["", "3,,5", "5,3", "3,3", "4", "3^1", "3^0", "+3", "03", "3^", "3 ,5", "2^99999999999"] {
            assert!(FactoredInteger::parse_factor_list(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn from_factors_merges_and_validates() {
        let f = FactoredInteger::from_u64_factors(&[(5, 1), (3, 1), (3, 1)]).unwrap();
        assert_eq!(f.to_string(), "3^2,5");
        assert!(FactoredInteger::from_u64_factors(&[(9, 1)]).is_err());
        assert!(FactoredInteger::from_u64_factors(&[(3, 0)]).is_err());
    }
}
