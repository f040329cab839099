//! Detection and measurement of faulty public bases `y`.
//!
//! A base is *faulty* when it passes the original acceptance rule
//! `y^(phi/r) != 1 (mod n)` but fails the per-prime rule
//! `y^(phi/s) != 1 (mod n)` for some prime `s | r`. Such a key silently
//! shrinks the cleartext space from `Z_r` to `Z_r'` with `r' | r`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::RngCore;

use crate::error::{Error, Result};
use crate::keys::{PrivateKey, PublicKey};
use crate::numtheory::{euler_phi, multiplicative_order, random_unit, FactoredInteger};

/// Largest modulus [`census_y`] will enumerate.
pub const CENSUS_MAX_MODULUS: u64 = 1 << 20;

/// Everything the auditor can say about one `y` under one key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditReport {
    pub passes_original: bool,
    pub passes_corrected: bool,
    pub passes_bt94: bool,
    /// Primes `s | r` with `y^(phi/s) = 1 (mod n)`.
    pub failing_primes: Vec<BigUint>,
    /// Size `r'` of the cleartext space the key really provides.
    pub actual_space: BigUint,
    /// `r / r'`.
    pub collapse_factor: BigUint,
}

impl AuditReport {
    /// One `key=value` line per field.
    pub fn to_key_value_lines(&self) -> String {
        let primes: Vec<String> = self.failing_primes.iter().map(|p| p.to_string()).collect();
        format!(
            "passes_original={}\npasses_corrected={}\npasses_bt94={}\nfailing_primes={}\nactual_space={}\ncollapse_factor={}\n",
            self.passes_original,
            self.passes_corrected,
            self.passes_bt94,
            primes.join(","),
            self.actual_space,
            self.collapse_factor
        )
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_key_value_lines())
    }
}

/// Audits the key's own `y`.
pub fn audit(sk: &PrivateKey) -> AuditReport {
    audit_y(sk.y(), sk)
}

/// Audits an arbitrary unit `y` against the primes and `r` of `sk`.
pub fn audit_y(y: &BigUint, sk: &PrivateKey) -> AuditReport {
    let passes_original = check_original_condition(y, sk);
    let (passes_corrected, failing_primes) = check_corrected_condition(y, sk);
    let passes_bt94 = check_bt94_condition(y, sk).0;
    let actual_space = order_of_decryption_base(y, sk);
    let collapse_factor = sk.r().value() / &actual_space;
    AuditReport {
        passes_original,
        passes_corrected,
        passes_bt94,
        failing_primes,
        actual_space,
        collapse_factor,
    }
}

/// `y^(phi/r) != 1 (mod n)`.
pub fn check_original_condition(y: &BigUint, sk: &PrivateKey) -> bool {
    let exp = sk.phi() / sk.r().value();
    !y.modpow(&exp, sk.n()).is_one()
}

/// Evaluates `y^(phi/s) (mod n)` for every prime `s | r`. Passes iff none
/// of them is one; the failing primes are returned in increasing order.
pub fn check_corrected_condition(y: &BigUint, sk: &PrivateKey) -> (bool, Vec<BigUint>) {
    let phi = sk.phi();
    let failing: Vec<BigUint> = sk
        .r()
        .primes()
        .filter(|s| y.modpow(&(&phi / *s), sk.n()).is_one())
        .cloned()
        .collect();
    (failing.is_empty(), failing)
}

/// Per-prime rule evaluated modulo `p` with exponents `(p-1)/s`.
pub fn check_bt94_condition(y: &BigUint, sk: &PrivateKey) -> (bool, Vec<BigUint>) {
    let p = sk.p();
    let p1 = p - 1u8;
    let failing: Vec<BigUint> = sk
        .r()
        .primes()
        .filter(|s| y.modpow(&(&p1 / *s), p).is_one())
        .cloned()
        .collect();
    (failing.is_empty(), failing)
}

/// Size `r'` of the cleartext space actually provided by `y`: the order of
/// `y^((p-1)/r)` modulo `p`, which equals `r / gcd(alpha, r)` where
/// `y = g^alpha (mod p)`.
pub fn actual_message_space(y: &BigUint, sk: &PrivateKey) -> Result<BigUint> {
    if !check_original_condition(y, sk) {
        return Err(Error::Degenerate(format!(
            "y^(phi/r) = 1 mod n, so y = {y} encrypts every message as zero"
        )));
    }
    Ok(order_of_decryption_base(y, sk))
}

fn order_of_decryption_base(y: &BigUint, sk: &PrivateKey) -> BigUint {
    let p = sk.p();
    let x = y.modpow(&((p - 1u8) / sk.r().value()), p);
    multiplicative_order(&x, p, sk.r()).expect("x^r = y^(p-1) = 1 mod p")
}

/// `y_valid^u mod n`: a base that still passes the original rule (for
/// `u != r`) but whose real cleartext space is `r / u`.
pub fn craft_faulty_y(sk: &PrivateKey, y_valid: &BigUint, u: &BigUint) -> Result<BigUint> {
    let r = sk.r().value();
    if u.is_one() {
        return Err(Error::param("u = 1 leaves y unchanged"));
    }
    if u.is_zero() || !(r % u).is_zero() {
        return Err(Error::param(format!("u = {u} does not divide r = {r}")));
    }
    if !check_corrected_condition(y_valid, sk).0 {
        return Err(Error::param("the starting y must pass the corrected condition"));
    }
    Ok(y_valid.modpow(u, sk.n()))
}

/// Exact share of faulty bases among those accepted by the original rule:
/// `1 - phi(r)/(r - 1)`.
pub fn failure_probability_exact(r: &FactoredInteger) -> Result<BigRational> {
    let rv = r.value();
    if *rv < BigUint::from(2u8) {
        return Err(Error::param("r must be at least 2"));
    }
    let phi = BigInt::from(euler_phi(r));
    let denom = BigInt::from(rv - 1u8);
    Ok(BigRational::one() - BigRational::new(phi, denom))
}

/// Sampled counterpart of [`failure_probability_exact`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloEstimate {
    pub draws: u64,
    /// Draws passing the original rule.
    pub retained: u64,
    /// Retained draws failing the corrected rule.
    pub faulty: u64,
    pub fraction: f64,
    /// Binomial standard error of `fraction`.
    pub std_error: f64,
}

/// Draws `samples` uniform units, keeps those accepted by the original
/// rule and reports the fraction of them that are faulty.
pub fn failure_probability_montecarlo<R: RngCore + ?Sized>(
    sk: &PrivateKey,
    samples: u64,
    rng: &mut R,
) -> Result<MonteCarloEstimate> {
    if samples < 100 {
        return Err(Error::param("at least 100 samples are required"));
    }
    let mut retained = 0u64;
    let mut faulty = 0u64;
    for _ in 0..samples {
        let y = random_unit(sk.n(), rng);
        if !check_original_condition(&y, sk) {
            continue;
        }
        retained += 1;
        if !check_corrected_condition(&y, sk).0 {
            faulty += 1;
        }
    }
    let (fraction, std_error) = if retained == 0 {
        (0.0, 0.0)
    } else {
        let f = faulty as f64 / retained as f64;
        (f, (f * (1.0 - f) / retained as f64).sqrt())
    };
    Ok(MonteCarloEstimate {
        draws: samples,
        retained,
        faulty,
        fraction,
        std_error,
    })
}

/// Result of enumerating every unit `y` modulo `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Census {
    /// Units accepted by the original rule.
    pub eligible: u64,
    /// Accepted units that fail the corrected rule.
    pub faulty: u64,
}

impl Census {
    pub fn ratio(&self) -> BigRational {
        if self.eligible == 0 {
            return BigRational::zero();
        }
        BigRational::new(BigInt::from(self.faulty), BigInt::from(self.eligible))
    }
}

/// Enumerates all `y` in `(Z_n)*` for `n <= 2^20`.
pub fn census_y(sk: &PrivateKey) -> Result<Census> {
    let n = sk
        .n()
        .to_u64()
        .filter(|&n| n <= CENSUS_MAX_MODULUS)
        .ok_or_else(|| Error::Guard(format!("census needs n <= 2^20, got {}", sk.n())))?;
    let p = sk.p().to_u64().expect("p < n");
    let q = sk.q().to_u64().expect("q < n");
    let r = sk.r().value().to_u64().expect("r < n");
    let phi = (p - 1) * (q - 1);
    let exp_r = phi / r;
    let exp_s: Vec<u64> = sk
        .r()
        .primes()
        .map(|s| phi / s.to_u64().expect("s <= r"))
        .collect();

    let mut census = Census {
        eligible: 0,
        faulty: 0,
    };
    for y in 1..n {
        if y % p == 0 || y % q == 0 {
            continue;
        }
        if pow_mod_u64(y, exp_r, n) == 1 {
            continue;
        }
        census.eligible += 1;
        if exp_s.iter().any(|&e| pow_mod_u64(y, e, n) == 1) {
            census.faulty += 1;
        }
    }
    Ok(census)
}

fn pow_mod_u64(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let m = u128::from(modulus);
    let mut acc: u128 = 1;
    let mut b = u128::from(base % modulus);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// `bitlength(n) / bitlength(r)`: ciphertext size over cleartext size.
pub fn expansion_factor(pk: &PublicKey) -> f64 {
    pk.n().bits() as f64 / pk.r().value().bits() as f64
}

/// Divisors `u` of `r` with `1 < u < r`.
pub fn proper_collapse_factors(r: &FactoredInteger) -> Vec<BigUint> {
    r.divisors()
        .into_iter()
        .filter(|d| !d.is_one() && d != r.value())
        .collect()
}
