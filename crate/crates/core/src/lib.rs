//! Benaloh's dense probabilistic encryption, `E(m) = y^m u^r mod n`, in its
//! original and corrected key-generation forms, together with tools to audit
//! keys for an ambiguous cleartext space and small protocol demonstrations.
//!
//! ```
//! use benaloh::{cipher, fixtures, Backend};
//! use num_bigint::BigUint;
//!
//! let sk = fixtures::counterexample_key();
//! let c1 = cipher::encrypt_with_nonce(&sk.public(), &BigUint::from(1u8), &BigUint::from(12u8)).unwrap();
//! let c6 = cipher::encrypt_with_nonce(&sk.public(), &BigUint::from(6u8), &BigUint::from(4u8)).unwrap();
//! assert_eq!(c1, c6);
//! assert_eq!(cipher::decrypt(&sk, &c6, Backend::Bsgs).unwrap().value(), &BigUint::from(1u8));
//! ```

mod error;

pub mod apps;
pub mod audit;
pub mod cipher;
pub mod fixtures;
pub mod keyfile;
pub mod keys;
pub mod numtheory;

pub use audit::{audit, AuditReport};
pub use cipher::{Backend, Ciphertext, Decryptor, Plaintext};
pub use error::{Error, Result};
pub use keyfile::KeyFile;
pub use keys::{
    keygen, keygen_with_common_r, validate_keypair, ConditionMode, KeyGenPolicy, PrivateKey, PublicKey, RMode,
    Violation,
};
pub use numtheory::FactoredInteger;
