//! Key material and key generation.
//!
//! Three acceptance rules for the public base `y` are supported, see
//! [`ConditionMode`]. Only [`ConditionMode::Corrected`] (and the equivalent
//! [`ConditionMode::Bt94`] rule) guarantee unambiguous decryption; the
//! original rule is kept so that faulty keys can be produced and studied.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::RngCore;

use crate::audit::{check_bt94_condition, check_corrected_condition, check_original_condition};
use crate::error::{Error, Result};
use crate::numtheory::{
    compute_r, gen_prime, gen_prime_with_factor, is_probable_prime, random_unit, FactoredInteger,
};

/// Rejection-sampling cap when drawing `y`.
pub const MAX_Y_ATTEMPTS: usize = 10_000;
/// Cap on regenerating `(p, q)` when the cleartext modulus degenerates.
pub const MAX_KEY_ATTEMPTS: usize = 1_000;
/// Smallest modulus size accepted by [`keygen`].
pub const MIN_KEY_BITS: u64 = 16;

/// Public key `(n, y, r)`; `r` travels with its factorization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    n: BigUint,
    y: BigUint,
    r: FactoredInteger,
}

impl PublicKey {
    pub fn new(n: BigUint, y: BigUint, r: FactoredInteger) -> Result<Self> {
        if !y.gcd(&n).is_one() {
            return Err(Error::param("y must be a unit modulo n"));
        }
        if *r.value() <= BigUint::one() || *r.value() >= n {
            return Err(Error::param("r must satisfy 1 < r < n"));
        }
        Ok(PublicKey { n, y, r })
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn y(&self) -> &BigUint {
        &self.y
    }

    pub fn r(&self) -> &FactoredInteger {
        &self.r
    }
}

/// Private key: the factors `p`, `q` of `n` together with the public `r`
/// and `y`.
///
/// Construction only checks what is needed for the arithmetic to make sense
/// (distinct primes, `y` a unit, `1 < r < n`, `r | p - 1`); the full set of
/// key constraints is checked by [`validate_keypair`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrivateKey {
    p: BigUint,
    q: BigUint,
    r: FactoredInteger,
    y: BigUint,
    n: BigUint,
}

impl PrivateKey {
    pub fn new(p: BigUint, q: BigUint, r: FactoredInteger, y: BigUint) -> Result<Self> {
        if p == q {
            return Err(Error::param("p and q must differ"));
        }
        for (name, v) in [("p", &p), ("q", &q)] {
            if !is_probable_prime(v) {
                return Err(Error::param(format!("{name} = {v} is not prime")));
            }
        }
        let n = &p * &q;
        let y = y % &n;
        if !y.gcd(&n).is_one() {
            return Err(Error::param("y must be a unit modulo n"));
        }
        if *r.value() <= BigUint::one() || *r.value() >= n {
            return Err(Error::param("r must satisfy 1 < r < n"));
        }
        if !((&p - 1u8) % r.value()).is_zero() {
            return Err(Error::param("r must divide p - 1"));
        }
        Ok(PrivateKey { p, q, r, y, n })
    }

    /// Same primes and `r`, different public base.
    pub fn with_y(&self, y: BigUint) -> Result<Self> {
        PrivateKey::new(self.p.clone(), self.q.clone(), self.r.clone(), y)
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn r(&self) -> &FactoredInteger {
        &self.r
    }

    pub fn y(&self) -> &BigUint {
        &self.y
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    /// `(p - 1)(q - 1)`.
    pub fn phi(&self) -> BigUint {
        (&self.p - 1u8) * (&self.q - 1u8)
    }

    pub fn public(&self) -> PublicKey {
        PublicKey {
            n: self.n.clone(),
            y: self.y.clone(),
            r: self.r.clone(),
        }
    }
}

/// Which rule a key's `y` must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConditionMode {
    /// `y^(phi/r) != 1 (mod n)`. Accepts faulty keys when `r` is composite.
    Original,
    /// `y^(phi/s) != 1 (mod n)` for every prime `s | r`.
    Corrected,
    /// Relaxed constraints on `r` (`r | p-1`, `r^2 ∤ p-1`, `r ∤ q-1`) with
    /// `y^((p-1)/s) != 1 (mod p)` for every prime `s | r`.
    Bt94,
}

impl fmt::Display for ConditionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionMode::Original => "original",
            ConditionMode::Corrected => "corrected",
            ConditionMode::Bt94 => "bt94",
        })
    }
}

impl std::str::FromStr for ConditionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(ConditionMode::Original),
            "corrected" => Ok(ConditionMode::Corrected),
            "bt94" => Ok(ConditionMode::Bt94),
            other => Err(Error::parse(format!("unknown condition mode `{other}`"))),
        }
    }
}

/// How the cleartext modulus `r` is chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RMode {
    /// Draw `p`, `q` and take the largest admissible `r` (see
    /// [`compute_r`]).
    Algorithm1Max,
    /// Use this `r` and build `p` around it.
    Prescribed(FactoredInteger),
    /// A random `r` made of odd primes up to the given bound.
    SmoothTarget(u64),
}

impl fmt::Display for RMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RMode::Algorithm1Max => f.write_str("max"),
            RMode::Prescribed(r) => write!(f, "prescribed:{}", r.value()),
            RMode::SmoothTarget(bound) => write!(f, "smooth:{bound}"),
        }
    }
}

impl std::str::FromStr for RMode {
    type Err = Error;

    /// `max`, `prescribed:<int>` or `smooth:<bound>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "max" {
            return Ok(RMode::Algorithm1Max);
        }
        if let Some(v) = s.strip_prefix("prescribed:") {
            let v = crate::numtheory::parse_decimal(v)?;
            if v <= BigUint::one() {
                return Err(Error::parse("prescribed r must exceed 1"));
            }
            return FactoredInteger::factor(&v)
                .map(RMode::Prescribed)
                .map_err(|e| Error::parse(e.to_string()));
        }
        if let Some(v) = s.strip_prefix("smooth:") {
            let bound: u64 = v
                .parse()
                .ok()
                .filter(|_| v.bytes().all(|b| b.is_ascii_digit()))
                .ok_or_else(|| Error::parse(format!("bad smoothness bound `{v}`")))?;
            return Ok(RMode::SmoothTarget(bound));
        }
        Err(Error::parse(format!("unknown r mode `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyGenPolicy {
    /// Exact size of `n`. `p` gets `bits / 2` bits and `q` the rest.
    pub bits: u64,
    pub condition_mode: ConditionMode,
    pub r_mode: RMode,
}

impl KeyGenPolicy {
    pub fn new(bits: u64, condition_mode: ConditionMode, r_mode: RMode) -> Self {
        KeyGenPolicy {
            bits,
            condition_mode,
            r_mode,
        }
    }
}

/// Generates a key pair under `policy`.
///
/// `y` is drawn uniformly from the units modulo `n` and redrawn until it
/// satisfies the policy's condition.
pub fn keygen<R: RngCore + ?Sized>(policy: &KeyGenPolicy, rng: &mut R) -> Result<(PublicKey, PrivateKey)> {
    if policy.bits < MIN_KEY_BITS {
        return Err(Error::param(format!(
            "key size must be at least {MIN_KEY_BITS} bits, got {}",
            policy.bits
        )));
    }
    let bits = policy.bits;
    let mode = policy.condition_mode;

    let (p, q, r) = match &policy.r_mode {
        RMode::Algorithm1Max => primes_with_max_r(bits, rng)?,
        RMode::Prescribed(r) => {
            let (p, q) = primes_around_r(r, bits, mode, rng)?;
            (p, q, r.clone())
        }
        RMode::SmoothTarget(bound) => primes_with_smooth_r(*bound, bits, mode, rng)?,
    };
    let sk = finish_with_y(p, q, r, mode, rng)?;
    Ok((sk.public(), sk))
}

/// Key with a caller-chosen cleartext modulus, so that several keys can
/// share the same `r`.
pub fn keygen_with_common_r<R: RngCore + ?Sized>(
    r: &FactoredInteger,
    bits: u64,
    condition_mode: ConditionMode,
    rng: &mut R,
) -> Result<(PublicKey, PrivateKey)> {
    if *r.value() <= BigUint::one() || r.value().is_even() {
        return Err(Error::param("common r must be odd and greater than 1"));
    }
    keygen(
        &KeyGenPolicy::new(bits, condition_mode, RMode::Prescribed(r.clone())),
        rng,
    )
}

/// Draws `y` for fixed `(p, q, r)` under `mode`.
pub fn select_y<R: RngCore + ?Sized>(
    p: &BigUint,
    q: &BigUint,
    r: &FactoredInteger,
    mode: ConditionMode,
    rng: &mut R,
) -> Result<BigUint> {
    let probe = PrivateKey::new(p.clone(), q.clone(), r.clone(), BigUint::one())?;
    for _ in 0..MAX_Y_ATTEMPTS {
        let y = random_unit(probe.n(), rng);
        if y_condition_holds(&probe, &y, mode) {
            return Ok(y);
        }
    }
    Err(Error::RetryExhausted(format!(
        "no y satisfying the {mode} condition after {MAX_Y_ATTEMPTS} draws"
    )))
}

fn finish_with_y<R: RngCore + ?Sized>(
    p: BigUint,
    q: BigUint,
    r: FactoredInteger,
    mode: ConditionMode,
    rng: &mut R,
) -> Result<PrivateKey> {
    let y = select_y(&p, &q, &r, mode, rng)?;
    PrivateKey::new(p, q, r, y)
}

fn y_condition_holds(sk: &PrivateKey, y: &BigUint, mode: ConditionMode) -> bool {
    match mode {
        ConditionMode::Original => check_original_condition(y, sk),
        ConditionMode::Corrected => check_corrected_condition(y, sk).0,
        ConditionMode::Bt94 => check_bt94_condition(y, sk).0,
    }
}

fn primes_with_max_r<R: RngCore + ?Sized>(
    bits: u64,
    rng: &mut R,
) -> Result<(BigUint, BigUint, FactoredInteger)> {
    for _ in 0..MAX_KEY_ATTEMPTS {
        let p = gen_prime(bits / 2, rng)?;
        let q = gen_prime(bits - bits / 2, rng)?;
        if p == q || (&p * &q).bits() != bits {
            continue;
        }
        // a degenerate or unfactorable r just means another draw
        if let Ok(r) = compute_r(&p, &q) {
            return Ok((p, q, r));
        }
    }
    Err(Error::RetryExhausted(
        "no prime pair with a usable cleartext modulus".into(),
    ))
}

fn primes_around_r<R: RngCore + ?Sized>(
    r: &FactoredInteger,
    bits: u64,
    mode: ConditionMode,
    rng: &mut R,
) -> Result<(BigUint, BigUint)> {
    let rv = r.value();
    if *rv <= BigUint::one() {
        return Err(Error::param("r must exceed 1"));
    }
    if mode != ConditionMode::Bt94 && rv.is_even() {
        return Err(Error::param("r must be odd, since q - 1 is even"));
    }
    let q_bits = bits - bits / 2;
    // a p near the bottom of its range may leave no q giving a full-size n
    for _ in 0..MAX_KEY_ATTEMPTS / 10 {
        let p = gen_prime_with_factor(r, bits / 2, rng)?;
        for _ in 0..MAX_Y_ATTEMPTS / 100 {
            let q = gen_prime(q_bits, rng)?;
            if q == p || (&p * &q).bits() != bits {
                continue;
            }
            let q1 = &q - 1u8;
            let ok = match mode {
                ConditionMode::Bt94 => !(&q1 % rv).is_zero(),
                _ => q1.gcd(rv).is_one(),
            };
            if ok {
                return Ok((p, q));
            }
        }
    }
    Err(Error::RetryExhausted(format!("no {q_bits}-bit q compatible with r = {rv}")))
}

fn primes_with_smooth_r<R: RngCore + ?Sized>(
    bound: u64,
    bits: u64,
    mode: ConditionMode,
    rng: &mut R,
) -> Result<(BigUint, BigUint, FactoredInteger)> {
    let mut last = None;
    for _ in 0..MAX_KEY_ATTEMPTS / 10 {
        let r = random_smooth_r(bound, bits / 2, rng)?;
        // some r admit no prime p of the requested size; draw another
        match primes_around_r(&r, bits, mode, rng) {
            Ok((p, q)) => return Ok((p, q, r)),
            Err(e @ Error::RetryExhausted(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::RetryExhausted("no smooth r found".into())))
}

/// A random `r` built from odd primes up to `bound`, sized to leave room in a
/// `half`-bit prime for the cofactor.
fn random_smooth_r<R: RngCore + ?Sized>(bound: u64, half: u64, rng: &mut R) -> Result<FactoredInteger> {
    if !(3..=crate::numtheory::DEFAULT_SMOOTHNESS_BOUND).contains(&bound) {
        return Err(Error::param(format!("smoothness bound {bound} out of range [3, 10^6]")));
    }
    let slack = (half / 4).max(6);
    let budget = half.saturating_sub(slack);
    let primes: Vec<u64> = crate::numtheory::small_primes_up_to(bound)
        .into_iter()
        .filter(|&p| p > 2 && u64::from(64 - p.leading_zeros()) <= budget)
        .collect();
    if primes.is_empty() {
        return Err(Error::param(format!(
            "{half}-bit primes leave no room for a {bound}-smooth r"
        )));
    }
    let mut r = BigUint::one();
    let mut factors: Vec<(BigUint, u32)> = Vec::new();
    let mut misses = 0;
    while misses < 32 {
        let s = *primes.choose(rng).expect("checked non-empty");
        let next = &r * s;
        if next.bits() > budget {
            misses += 1;
            continue;
        }
        r = next;
        factors.push((BigUint::from(s), 1));
    }
    FactoredInteger::from_factors(factors)
}

/// A violated key constraint; the first one found is reported.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NotPrime(&'static str),
    EqualPrimes,
    RTrivial,
    RNotDividingPMinusOne,
    RNotCoprimeWithCofactor,
    RSquaredDividesPMinusOne,
    RNotCoprimeWithQMinusOne,
    RDividesQMinusOne,
    YNotUnit,
    OriginalCondition,
    CorrectedCondition { prime: BigUint },
    Bt94Condition { prime: BigUint },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotPrime(which) => write!(f, "{which} is not prime"),
            Violation::EqualPrimes => f.write_str("p = q"),
            Violation::RTrivial => f.write_str("r outside (1, n)"),
            Violation::RNotDividingPMinusOne => f.write_str("r does not divide p-1"),
            Violation::RNotCoprimeWithCofactor => f.write_str("gcd(r, (p-1)/r) != 1"),
            Violation::RSquaredDividesPMinusOne => f.write_str("r^2 divides p-1"),
            Violation::RNotCoprimeWithQMinusOne => f.write_str("gcd(r, q-1) != 1"),
            Violation::RDividesQMinusOne => f.write_str("r divides q-1"),
            Violation::YNotUnit => f.write_str("gcd(y, n) != 1"),
            Violation::OriginalCondition => f.write_str("y^(phi/r) = 1 mod n"),
            Violation::CorrectedCondition { prime } => {
                write!(f, "y^(phi/s) = 1 mod n at s = {prime}")
            }
            Violation::Bt94Condition { prime } => {
                write!(f, "y^((p-1)/s) = 1 mod p at s = {prime}")
            }
        }
    }
}

/// Re-checks every structural constraint and the `y` condition of `mode`.
pub fn validate_keypair(sk: &PrivateKey, mode: ConditionMode) -> std::result::Result<(), Violation> {
    let (p, q) = (sk.p(), sk.q());
    if !is_probable_prime(p) {
        return Err(Violation::NotPrime("p"));
    }
    if !is_probable_prime(q) {
        return Err(Violation::NotPrime("q"));
    }
    if p == q {
        return Err(Violation::EqualPrimes);
    }
    let r = sk.r().value();
    if *r <= BigUint::one() || r >= sk.n() {
        return Err(Violation::RTrivial);
    }
    let p1 = p - 1u8;
    let q1 = q - 1u8;
    let (cofactor, rem) = p1.div_rem(r);
    if !rem.is_zero() {
        return Err(Violation::RNotDividingPMinusOne);
    }
    match mode {
        ConditionMode::Bt94 => {
            if (&cofactor % r).is_zero() {
                return Err(Violation::RSquaredDividesPMinusOne);
            }
            if (&q1 % r).is_zero() {
                return Err(Violation::RDividesQMinusOne);
            }
        }
        _ => {
            if !cofactor.gcd(r).is_one() {
                return Err(Violation::RNotCoprimeWithCofactor);
            }
            if !q1.gcd(r).is_one() {
                return Err(Violation::RNotCoprimeWithQMinusOne);
            }
        }
    }
    let y = sk.y();
    if !y.gcd(sk.n()).is_one() {
        return Err(Violation::YNotUnit);
    }
    match mode {
        ConditionMode::Original => {
            if !check_original_condition(y, sk) {
                return Err(Violation::OriginalCondition);
            }
        }
        ConditionMode::Corrected => {
            if let Some(prime) = check_corrected_condition(y, sk).1.into_iter().next() {
                return Err(Violation::CorrectedCondition { prime });
            }
        }
        ConditionMode::Bt94 => {
            if let Some(prime) = check_bt94_condition(y, sk).1.into_iter().next() {
                return Err(Violation::Bt94Condition { prime });
            }
        }
    }
    Ok(())
}
