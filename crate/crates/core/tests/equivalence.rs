//! Key conditions and collapse factors cross-checked against brute force on
//! keys small enough to enumerate.

mod support;

use benaloh::audit::{
    actual_message_space, audit_y, census_y, check_corrected_condition, check_original_condition, craft_faulty_y,
    failure_probability_exact, proper_collapse_factors,
};
use benaloh::cipher::{decrypt, encrypt_with_nonce};
use benaloh::{Backend, FactoredInteger, PrivateKey};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::oracle::{self, SmallKey};

fn library_key(k: SmallKey, y: u64) -> PrivateKey {
    let r = FactoredInteger::factor_u64(k.r).unwrap();
    PrivateKey::new(k.p.into(), k.q.into(), r, y.into()).unwrap()
}

fn first_corrected_y(k: SmallKey) -> u64 {
    let (n, phi) = (k.n(), k.phi());
    (2..n)
        .find(|&y| oracle::gcd(y, n) == 1 && oracle::condition_c(y, n, phi, k.r))
        .unwrap()
}

#[test]
fn conditions_agree_with_generator_exponent() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..4 {
        let k = oracle::random_small_key(&mut rng, (100, 1000), (5, 40), false);
        let (n, r) = (k.n(), k.r);
        let g = oracle::primitive_root(k.p);
        let logs = oracle::log_table(k.p, g);
        let residues = oracle::rth_residues(n, r);
        let sk = library_key(k, 1);
        for y in 1..n {
            if oracle::gcd(y, n) != 1 {
                continue;
            }
            let alpha = logs[(y % k.p) as usize];
            let u = oracle::gcd(alpha, r);
            let period = oracle::encryption_period(y, n, r, &residues);
            let yb = BigUint::from(y);
            let corrected = check_corrected_condition(&yb, &sk).0;
            assert_eq!(corrected, u == 1, "{k:?} y={y}");
            assert_eq!(corrected, period == r, "{k:?} y={y}");
            assert_eq!(check_original_condition(&yb, &sk), !alpha.is_multiple_of(r), "{k:?} y={y}");
            if !alpha.is_multiple_of(r) {
                let space = actual_message_space(&yb, &sk).unwrap();
                assert_eq!(space, BigUint::from(r / u));
                assert_eq!(space, BigUint::from(period));
            }
        }
    }
}

#[test]
fn census_matches_enumeration_and_rho() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..6 {
        let k = oracle::random_small_key(&mut rng, (50, 600), (5, 60), true);
        let (n, phi, r) = (k.n(), k.phi(), k.r);
        let mut eligible = 0u64;
        let mut faulty = 0u64;
        for y in 1..n {
            if oracle::gcd(y, n) != 1 || oracle::pow_mod(y, phi / r, n) == 1 {
                continue;
            }
            eligible += 1;
            if !oracle::condition_c(y, n, phi, r) {
                faulty += 1;
            }
        }
        let census = census_y(&library_key(k, 1)).unwrap();
        assert_eq!((census.eligible, census.faulty), (eligible, faulty), "{k:?}");

        let rho = failure_probability_exact(&FactoredInteger::factor_u64(r).unwrap()).unwrap();
        let expected = BigRational::new(
            ((r - 1) - oracle::totient(r)).into(),
            (r - 1).into(),
        );
        assert_eq!(rho, expected);
        assert_eq!(census.ratio(), rho, "{k:?}");
    }
}

#[test]
fn crafted_bases_collapse_by_the_divisor() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..5 {
        let k = oracle::random_small_key(&mut rng, (100, 700), (5, 30), true);
        let (n, r) = (k.n(), k.r);
        let residues = oracle::rth_residues(n, r);
        let y0 = first_corrected_y(k);
        let sk = library_key(k, y0);
        for u in proper_collapse_factors(sk.r()) {
            let y = craft_faulty_y(&sk, sk.y(), &u).unwrap();
            let uu = u.to_u64().unwrap();
            let period = oracle::encryption_period(y.to_u64().unwrap(), n, r, &residues);
            assert_eq!(period, r / uu, "{k:?} u={uu}");
            let report = audit_y(&y, &sk);
            assert!(report.passes_original);
            assert!(!report.passes_corrected);
            assert_eq!(report.collapse_factor, u);
            assert_eq!(report.actual_space, BigUint::from(r / uu));
        }
    }
}

#[test]
fn faulty_decryption_reduces_mod_actual_space() {
    let sk = benaloh::fixtures::counterexample_key();
    let pk = sk.public();
    for m in 0..15u32 {
        let c = encrypt_with_nonce(&pk, &m.into(), &BigUint::from(2u8)).unwrap();
        for backend in Backend::ALL {
            assert_eq!(decrypt(&sk, &c, backend).unwrap().value(), &BigUint::from(m % 5), "{backend}");
        }
    }
}
