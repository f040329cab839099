use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::factored::{small_primes, FactoredInteger};
use crate::error::{Error, Result};

/// Number of Miller-Rabin rounds applied to every candidate.
pub const MILLER_RABIN_ROUNDS: usize = 64;

const TRIAL_DIVISION_LIMIT: u64 = 1000;
const MAX_PRIME_ATTEMPTS: usize = 200_000;

// Fixed bases first: with these, the test is exact below 3.3e24.
const FIXED_BASES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Miller-Rabin with [`MILLER_RABIN_ROUNDS`] rounds after trial division by
/// the primes below 1000.
///
/// Witnesses are derived deterministically from `n`, so the answer for a given
/// input never changes between calls.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        if small < 2 {
            return false;
        }
    }
    for &p in small_primes(TRIAL_DIVISION_LIMIT).iter() {
        if *n == BigUint::from(p) {
            return true;
        }
        if (n % p).is_zero() {
            return false;
        }
    }

    let seed = n.iter_u64_digits().next().unwrap_or(0) ^ n.bits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    miller_rabin(n, MILLER_RABIN_ROUNDS, &mut rng)
}

/// Runs `rounds` Miller-Rabin rounds on odd `n > 3`. The first rounds use
/// fixed small bases; the rest draw bases from `rng`.
pub fn miller_rabin<R: RngCore + ?Sized>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let one = BigUint::one();
    let two = BigUint::from(2u8);
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;

    for round in 0..rounds {
        let base = match FIXED_BASES.get(round) {
            Some(&b) => BigUint::from(b) % n,
            None => rng.gen_biguint_range(&two, &n_minus_1),
        };
        if base < two {
            continue;
        }
        let mut x = base.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        let mut witness = true;
        for _ in 1..s {
            x = &x * &x % n;
            if x == n_minus_1 {
                witness = false;
                break;
            }
        }
        if witness {
            return false;
        }
    }
    true
}

/// A random probable prime of exactly `bits` bits.
pub fn gen_prime<R: RngCore + ?Sized>(bits: u64, rng: &mut R) -> Result<BigUint> {
    if bits < 4 {
        return Err(Error::param(format!("prime size must be at least 4 bits, got {bits}")));
    }
    for _ in 0..MAX_PRIME_ATTEMPTS {
        let mut candidate = rng.gen_biguint(bits);
        candidate.set_bit(bits - 1, true);
        candidate.set_bit(0, true);
        if is_probable_prime(&candidate) {
            return Ok(candidate);
        }
    }
    Err(Error::RetryExhausted(format!("no {bits}-bit prime found")))
}

/// A random prime `p` of exactly `bits` bits with `r | p - 1` and
/// `gcd(r, (p - 1) / r) = 1`.
///
/// Candidates are `p = r*k + 1` for a uniformly drawn cofactor `k` coprime
/// with `r`.
pub fn gen_prime_with_factor<R: RngCore + ?Sized>(
    r: &FactoredInteger,
    bits: u64,
    rng: &mut R,
) -> Result<BigUint> {
    let r = r.value();
    if r.is_zero() || bits < 3 {
        return Err(Error::param("need r >= 1 and at least 3 bits"));
    }
    let one = BigUint::one();
    let low = &one << (bits - 1);
    let high = (&one << bits) - 2u8;
    // r*k + 1 in [2^(bits-1), 2^bits - 1]
    let k_min = (&low - &one).div_ceil(r);
    let k_max = &high / r;
    if k_min.is_zero() || k_min > k_max {
        return Err(Error::param(format!(
            "{bits} bits cannot host a prime p with {r} | p - 1"
        )));
    }
    let r_even = r.is_even();
    let span = &k_max - &k_min + 1u8;
    for _ in 0..MAX_PRIME_ATTEMPTS {
        let k = &k_min + rng.gen_biguint_below(&span);
        // p odd needs r*k even; coprimality then forces the parity of k
        if r_even == k.is_even() || !k.gcd(r).is_one() {
            continue;
        }
        let p = r * &k + 1u8;
        if is_probable_prime(&p) {
            return Ok(p);
        }
    }
    Err(Error::RetryExhausted(format!(
        "no {bits}-bit prime p with {r} | p - 1 found"
    )))
}

/// Draws a uniform unit modulo `n` by rejection on the gcd.
pub fn random_unit<R: RngCore + ?Sized>(n: &BigUint, rng: &mut R) -> BigUint {
    let one = BigUint::one();
    loop {
        let u = rng.gen_biguint_range(&one, n);
        if u.gcd(n).is_one() {
            return u;
        }
    }
}

/// Uniform integer in `[0, bound)`.
pub fn random_below<R: RngCore + ?Sized>(bound: &BigUint, rng: &mut R) -> BigUint {
    rng.gen_biguint_below(bound)
}
