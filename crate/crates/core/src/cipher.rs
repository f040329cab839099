//! Encryption `E(m) = y^m u^r mod n`, decryption and the homomorphic
//! operations.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;

use crate::error::{Error, Result};
use crate::keys::{PrivateKey, PublicKey};
use crate::numtheory::{dlog, mod_inverse, parse_decimal, random_unit, BsgsTable, DlogStrategy};

/// A unit modulo `n`, tagged with its modulus.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ciphertext {
    value: BigUint,
    modulus: BigUint,
}

impl Ciphertext {
    /// Wraps `value` as a ciphertext under `pk`; it must be a unit below `n`.
    pub fn new(value: BigUint, pk: &PublicKey) -> Result<Self> {
        Self::with_modulus(value, pk.n().clone())
    }

    fn with_modulus(value: BigUint, modulus: BigUint) -> Result<Self> {
        if value >= modulus {
            return Err(Error::param("ciphertext must be reduced modulo n"));
        }
        if !value.gcd(&modulus).is_one() {
            return Err(Error::param("ciphertext must be a unit modulo n"));
        }
        Ok(Ciphertext { value, modulus })
    }

    /// Parses the bare decimal text form (surrounding whitespace allowed).
    pub fn parse(text: &str, pk: &PublicKey) -> Result<Self> {
        let value = parse_decimal(text.trim())?;
        Self::new(value, pk).map_err(|e| Error::parse(e.to_string()))
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    fn check_key(&self, n: &BigUint) -> Result<()> {
        if &self.modulus != n {
            return Err(Error::param("ciphertext belongs to a different modulus"));
        }
        Ok(())
    }
}

impl fmt::Display for Ciphertext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// A residue modulo `r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plaintext(BigUint);

impl Plaintext {
    /// Reduces `value` modulo `r`.
    pub fn new(value: BigUint, r: &BigUint) -> Self {
        Plaintext(value % r)
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }
}

impl fmt::Display for Plaintext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Decryption algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Scan `m = 0, 1, ...` for the smallest `m` with `y^-m c` an `r`-th
    /// residue modulo `n`. Defined for every key, faulty or not.
    Exhaustive,
    /// Baby-step giant-step in the order-`r` subgroup modulo `p`.
    Bsgs,
    /// Pohlig-Hellman over the factorization of `r`, modulo `p`.
    PohligHellman,
}

impl Backend {
    pub const ALL: [Backend; 3] = [Backend::Exhaustive, Backend::Bsgs, Backend::PohligHellman];
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Exhaustive => "exhaustive",
            Backend::Bsgs => "bsgs",
            Backend::PohligHellman => "pohlig-hellman",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Backend::Exhaustive),
            "bsgs" => Ok(Backend::Bsgs),
            "pohlig-hellman" | "pohlig_hellman" => Ok(Backend::PohligHellman),
            other => Err(Error::parse(format!("unknown backend `{other}`"))),
        }
    }
}

/// Encrypts `m` with a fresh nonce drawn uniformly from the units mod `n`.
pub fn encrypt<R: RngCore + ?Sized>(pk: &PublicKey, m: &BigUint, rng: &mut R) -> Result<Ciphertext> {
    let u = random_unit(pk.n(), rng);
    encrypt_with_nonce(pk, m, &u)
}

/// `y^m u^r mod n` for `0 <= m < r` and a unit `u`.
pub fn encrypt_with_nonce(pk: &PublicKey, m: &BigUint, u: &BigUint) -> Result<Ciphertext> {
    let n = pk.n();
    let r = pk.r().value();
    if m >= r {
        return Err(Error::param(format!("message {m} is not below r = {r}")));
    }
    if !u.gcd(n).is_one() {
        return Err(Error::param("nonce must be a unit modulo n"));
    }
    let value = pk.y().modpow(m, n) * u.modpow(r, n) % n;
    Ok(Ciphertext {
        value,
        modulus: n.clone(),
    })
}

/// `c^(phi/r) = 1 (mod n)`: whether `c` is an `r`-th residue, i.e. an
/// encryption of zero.
pub fn is_encryption_of_zero(sk: &PrivateKey, c: &Ciphertext) -> bool {
    let exp = sk.phi() / sk.r().value();
    c.value.modpow(&exp, sk.n()).is_one()
}

/// Decrypts with a one-off [`Decryptor`].
pub fn decrypt(sk: &PrivateKey, c: &Ciphertext, backend: Backend) -> Result<Plaintext> {
    Decryptor::new(sk.clone()).decrypt(c, backend)
}

/// Per-key decryption state. The baby-step table is built on first use of
/// the [`Backend::Bsgs`] backend and reused afterwards.
#[derive(Debug)]
pub struct Decryptor {
    sk: PrivateKey,
    phi_over_r: BigUint,
    /// `y^(phi/r) mod n`
    base_n: BigUint,
    p_minus_1_over_r: BigUint,
    /// `y^((p-1)/r) mod p`
    base_p: BigUint,
    table: OnceLock<BsgsTable>,
}

impl Decryptor {
    pub fn new(sk: PrivateKey) -> Self {
        let r = sk.r().value();
        let phi_over_r = sk.phi() / r;
        let base_n = sk.y().modpow(&phi_over_r, sk.n());
        let p_minus_1_over_r = (sk.p() - 1u8) / r;
        let base_p = sk.y().modpow(&p_minus_1_over_r, sk.p());
        Decryptor {
            sk,
            phi_over_r,
            base_n,
            p_minus_1_over_r,
            base_p,
            table: OnceLock::new(),
        }
    }

    pub fn key(&self) -> &PrivateKey {
        &self.sk
    }

    /// Recovers `m` from `c`.
    ///
    /// On keys passing the corrected condition every backend returns the
    /// unique plaintext. On faulty keys only [`Backend::Exhaustive`] has a
    /// fixed answer (the smallest candidate); the others return some member
    /// of the same class modulo the collapsed space.
    pub fn decrypt(&self, c: &Ciphertext, backend: Backend) -> Result<Plaintext> {
        c.check_key(self.sk.n())?;
        let r = self.sk.r();
        let m = match backend {
            Backend::Exhaustive => {
                let target = c.value.modpow(&self.phi_over_r, self.sk.n());
                dlog(&self.base_n, &target, self.sk.n(), r, DlogStrategy::Exhaustive)
            }
            Backend::Bsgs => {
                let target = c.value.modpow(&self.p_minus_1_over_r, self.sk.p());
                let table = match self.table.get() {
                    Some(t) => t,
                    None => {
                        let t = BsgsTable::new(&self.base_p, self.sk.p(), r.value())?;
                        self.table.get_or_init(|| t)
                    }
                };
                table.solve(&target)
            }
            Backend::PohligHellman => {
                let target = c.value.modpow(&self.p_minus_1_over_r, self.sk.p());
                dlog(&self.base_p, &target, self.sk.p(), r, DlogStrategy::PohligHellman)
            }
        };
        match m {
            Ok(m) => Ok(Plaintext(m)),
            Err(Error::NoSolution) => Err(Error::InvalidCiphertext),
            Err(e) => Err(e),
        }
    }
}

/// `c1 * c2 mod n`, an encryption of `m1 + m2 mod r`.
pub fn hom_add(pk: &PublicKey, c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext> {
    c1.check_key(pk.n())?;
    c2.check_key(pk.n())?;
    Ok(Ciphertext {
        value: &c1.value * &c2.value % pk.n(),
        modulus: pk.n().clone(),
    })
}

/// `c1 / c2 mod n`, an encryption of `m1 - m2 mod r`.
pub fn hom_sub(pk: &PublicKey, c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext> {
    c1.check_key(pk.n())?;
    c2.check_key(pk.n())?;
    let inv = mod_inverse(&c2.value, pk.n()).expect("ciphertexts are units");
    Ok(Ciphertext {
        value: &c1.value * inv % pk.n(),
        modulus: pk.n().clone(),
    })
}

/// `c^k mod n`, an encryption of `k * m mod r`.
pub fn hom_scale(pk: &PublicKey, c: &Ciphertext, k: &BigUint) -> Result<Ciphertext> {
    c.check_key(pk.n())?;
    Ok(Ciphertext {
        value: c.value.modpow(k, pk.n()),
        modulus: pk.n().clone(),
    })
}

/// Multiplies by a fresh encryption of zero.
pub fn rerandomize<R: RngCore + ?Sized>(pk: &PublicKey, c: &Ciphertext, rng: &mut R) -> Result<Ciphertext> {
    let u = random_unit(pk.n(), rng);
    rerandomize_with_nonce(pk, c, &u)
}

pub fn rerandomize_with_nonce(pk: &PublicKey, c: &Ciphertext, u: &BigUint) -> Result<Ciphertext> {
    let zero = encrypt_with_nonce(pk, &BigUint::zero(), u)?;
    hom_add(pk, c, &zero)
}

/// The ciphertext `1`, the encryption of zero with nonce one.
pub fn identity(pk: &PublicKey) -> Ciphertext {
    Ciphertext {
        value: BigUint::one(),
        modulus: pk.n().clone(),
    }
}
