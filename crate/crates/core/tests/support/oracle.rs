//! Brute-force reference computations on word-sized keys. Nothing here uses
//! the library under test.

#![allow(dead_code)]

use rand::Rng;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn totient(n: u64) -> u64 {
    (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64
}

/// Smallest generator of `(Z/pZ)*`, found by computing element orders.
pub fn primitive_root(p: u64) -> u64 {
    (2..p)
        .find(|&g| {
            let mut x = g;
            let mut k = 1;
            while x != 1 {
                x = x * g % p;
                k += 1;
            }
            k == p - 1
        })
        .expect("primes have generators")
}

/// `table[x] = log_g(x)` for every unit `x` mod `p`.
pub fn log_table(p: u64, g: u64) -> Vec<u64> {
    let mut table = vec![0; p as usize];
    let mut x = 1;
    for i in 0..p - 1 {
        table[x as usize] = i;
        x = x * g % p;
    }
    table
}

/// Membership table of the r-th residues `{u^r : u in (Z/nZ)*}`.
pub fn rth_residues(n: u64, r: u64) -> Vec<bool> {
    let mut set = vec![false; n as usize];
    for u in 1..n {
        if gcd(u, n) == 1 {
            set[pow_mod(u, r, n) as usize] = true;
        }
    }
    set
}

/// Smallest `m > 0` with `y^m` an r-th residue, i.e. the period of
/// `m -> E(m)`. Encryption is injective on `Z_r` exactly when this is `r`.
pub fn encryption_period(y: u64, n: u64, r: u64, residues: &[bool]) -> u64 {
    let mut x = 1;
    for m in 1..=r {
        x = x * y % n;
        if residues[x as usize] {
            return m;
        }
    }
    unreachable!("y^r is always an r-th residue")
}

/// `y^(phi/s) != 1 mod n` for every prime `s | r`.
pub fn condition_c(y: u64, n: u64, phi: u64, r: u64) -> bool {
    prime_divisors(r).into_iter().all(|s| pow_mod(y, phi / s, n) != 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SmallKey {
    pub p: u64,
    pub q: u64,
    pub r: u64,
}

impl SmallKey {
    pub fn n(&self) -> u64 {
        self.p * self.q
    }

    pub fn phi(&self) -> u64 {
        (self.p - 1) * (self.q - 1)
    }
}

/// Largest `r | p - 1` coprime to `q - 1`, by repeated division.
pub fn max_r(p: u64, q: u64) -> u64 {
    let mut r = p - 1;
    loop {
        let g = gcd(q - 1, r);
        if g == 1 {
            return r;
        }
        r /= g;
    }
}

/// Random distinct primes with `p` in `p_range`, `q` in `q_range` and the
/// maximal `r`, skipping pairs where `r` is 1 or prime (no proper collapse).
pub fn random_small_key<R: Rng>(rng: &mut R, p_range: (u64, u64), q_range: (u64, u64), composite_r: bool) -> SmallKey {
    loop {
        let p = rng.gen_range(p_range.0..=p_range.1);
        let q = rng.gen_range(q_range.0..=q_range.1);
        if p == q || p < 3 || q < 3 || !is_prime(p) || !is_prime(q) {
            continue;
        }
        let r = max_r(p, q);
        if r < 3 || (composite_r && is_prime(r)) {
            continue;
        }
        return SmallKey { p, q, r };
    }
}
