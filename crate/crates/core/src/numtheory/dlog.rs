//! Discrete logarithms in subgroups of known, smooth order.
//!
//! Every strategy returns the *smallest* non-negative exponent. When the base
//! has full order the answer is unique below the order; when it does not (a
//! faulty key) the smallest representative is still well defined and all three
//! strategies agree on it.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::factored::FactoredInteger;
use crate::error::{Error, Result};

/// Largest baby-step table we are willing to build.
const MAX_BABY_STEPS: u64 = 1 << 26;
/// Largest order scanned by the exhaustive strategy.
const MAX_EXHAUSTIVE_ORDER: u64 = 1 << 36;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DlogStrategy {
    /// Linear scan `base^0, base^1, ...`; the reference implementation.
    Exhaustive,
    /// Shanks' baby-step giant-step, `O(sqrt(order))` group operations.
    BabyStepGiantStep,
    /// Pohlig-Hellman reduction to prime-order subproblems, recombined by CRT.
    PohligHellman,
}

/// Smallest `e >= 0` with `base^e = target (mod modulus)`, where the order of
/// `base` divides `order`.
pub fn dlog(
    base: &BigUint,
    target: &BigUint,
    modulus: &BigUint,
    order: &FactoredInteger,
    strategy: DlogStrategy,
) -> Result<BigUint> {
    if *modulus < BigUint::from(2u8) {
        return Err(Error::param("modulus must be at least 2"));
    }
    let base = base % modulus;
    let target = target % modulus;
    if !base.modpow(order.value(), modulus).is_one() {
        return Err(Error::InconsistentOrder {
            bound: order.value().to_string(),
        });
    }
    match strategy {
        DlogStrategy::Exhaustive => exhaustive(&base, &target, modulus, order.value()),
        DlogStrategy::BabyStepGiantStep => {
            BsgsTable::new(&base, modulus, order.value())?.solve(&target)
        }
        DlogStrategy::PohligHellman => pohlig_hellman(&base, &target, modulus, order),
    }
}

fn exhaustive(base: &BigUint, target: &BigUint, modulus: &BigUint, order: &BigUint) -> Result<BigUint> {
    let limit = order
        .to_u64()
        .filter(|&o| o <= MAX_EXHAUSTIVE_ORDER)
        .ok_or_else(|| Error::Guard(format!("order {order} too large for exhaustive search")))?;
    let mut acc = BigUint::one();
    for e in 0..limit {
        if acc == *target {
            return Ok(BigUint::from(e));
        }
        acc = acc * base % modulus;
        if acc.is_one() {
            // cycled through the whole subgroup
            break;
        }
    }
    Err(Error::NoSolution)
}

/// Precomputed baby steps for repeated logarithms to one base.
#[derive(Clone, Debug)]
pub struct BsgsTable {
    modulus: BigUint,
    step: u64,
    giant: BigUint,
    baby: HashMap<BigUint, u64>,
}

impl BsgsTable {
    /// Builds `ceil(sqrt(order))` baby steps of `base`.
    pub fn new(base: &BigUint, modulus: &BigUint, order: &BigUint) -> Result<Self> {
        let mut step = order.sqrt();
        if &step * &step < *order {
            step += 1u8;
        }
        let step = step
            .to_u64()
            .filter(|&s| s <= MAX_BABY_STEPS)
            .ok_or_else(|| Error::Guard(format!("order {order} too large for baby-step giant-step")))?
            .max(1);

        let base = base % modulus;
        let mut baby = HashMap::with_capacity(step as usize);
        let mut acc = BigUint::one();
        for j in 0..step {
            // keep the smallest exponent for repeated values
            baby.entry(acc.clone()).or_insert(j);
            acc = acc * &base % modulus;
        }
        // acc = base^step
        let giant = mod_inverse(&acc, modulus).ok_or_else(|| Error::param("base is not invertible"))?;
        Ok(BsgsTable {
            modulus: modulus.clone(),
            step,
            giant,
            baby,
        })
    }

    pub fn solve(&self, target: &BigUint) -> Result<BigUint> {
        let mut gamma = target % &self.modulus;
        for i in 0..self.step {
            if let Some(&j) = self.baby.get(&gamma) {
                return Ok(BigUint::from(i) * self.step + j);
            }
            gamma = gamma * &self.giant % &self.modulus;
        }
        Err(Error::NoSolution)
    }
}

fn pohlig_hellman(
    base: &BigUint,
    target: &BigUint,
    modulus: &BigUint,
    order: &FactoredInteger,
) -> Result<BigUint> {
    let n = order.value();
    let mut residues = Vec::with_capacity(order.factors().len());
    for (s, k) in order.factors() {
        let s_k = s.pow(*k);
        let cofactor = n / &s_k;
        let h = base.modpow(&cofactor, modulus);
        let t = target.modpow(&cofactor, modulus);

        // order of h is s^j for some j <= k
        let mut j = 0u32;
        let mut probe = h.clone();
        while !probe.is_one() {
            probe = probe.modpow(s, modulus);
            j += 1;
            if j > *k {
                return Err(Error::InconsistentOrder {
                    bound: n.to_string(),
                });
            }
        }
        if j == 0 {
            if !t.is_one() {
                return Err(Error::NoSolution);
            }
            continue;
        }

        let gamma = h.modpow(&s.pow(j - 1), modulus);
        let h_inv = mod_inverse(&h, modulus).ok_or_else(|| Error::param("base is not invertible"))?;
        let prime_order = FactoredInteger::from_factors([(s.clone(), 1)])?;
        let mut x = BigUint::zero();
        let mut s_i = BigUint::one();
        for i in 0..j {
            // strip the known low digits, then project onto the order-s subgroup
            let stripped = &t * h_inv.modpow(&x, modulus) % modulus;
            let a = stripped.modpow(&s.pow(j - 1 - i), modulus);
            let digit = prime_order_log(&gamma, &a, modulus, &prime_order)?;
            x += &digit * &s_i;
            s_i *= s;
        }
        residues.push((x, s.pow(j)));
    }

    let e = crt(&residues);
    if base.modpow(&e, modulus) != *target {
        return Err(Error::NoSolution);
    }
    Ok(e)
}

fn prime_order_log(gamma: &BigUint, a: &BigUint, modulus: &BigUint, order: &FactoredInteger) -> Result<BigUint> {
    match order.value().to_u64() {
        Some(s) if s <= 64 => exhaustive(gamma, a, modulus, order.value()),
        _ => BsgsTable::new(gamma, modulus, order.value())?.solve(a),
    }
}

/// Combines `x = a_i (mod m_i)` for pairwise coprime moduli; returns the
/// representative in `[0, prod m_i)`.
pub fn crt(residues: &[(BigUint, BigUint)]) -> BigUint {
    let mut x = BigUint::zero();
    let mut m = BigUint::one();
    for (a, mi) in residues {
        // x + m*t = a (mod mi)  =>  t = (a - x) * m^-1 (mod mi)
        let inv = mod_inverse(&(&m % mi), mi).unwrap_or_else(BigUint::zero);
        let diff = (BigInt::from(a.clone()) - BigInt::from(x.clone())).mod_floor(&BigInt::from(mi.clone()));
        let t = diff.to_biguint().unwrap_or_default() * inv % mi;
        x += &m * t;
        m *= mi;
    }
    x % m
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    if m.is_one() {
        return Some(BigUint::zero());
    }
    let a = BigInt::from(a % m);
    let m_int = BigInt::from(m.clone());
    let ext = a.extended_gcd(&m_int);
    if !ext.gcd.is_one() {
        return None;
    }
    let mut inv = ext.x.mod_floor(&m_int);
    if inv.is_negative() {
        inv += &m_int;
    }
    inv.to_biguint()
}
