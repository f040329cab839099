//! Text serialization of keys.
//!
//! ```text
//! BENALOH PRIVATE KEY v1
//! n=43139
//! y=27
//! r=15
//! r_factors=3,5
//! p=241
//! q=179
//! ```
//!
//! Fields appear in exactly this order as `<name>=<value>` with no spaces;
//! integers are canonical decimal; the file ends with a newline. Public key
//! files stop after `r_factors`. The parser accepts only this canonical form,
//! so `serialize(parse(text)) == text` whenever parsing succeeds.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::keys::{PrivateKey, PublicKey};
use crate::numtheory::{parse_decimal, FactoredInteger};

pub const PUBLIC_HEADER: &str = "BENALOH PUBLIC KEY v1";
pub const PRIVATE_HEADER: &str = "BENALOH PRIVATE KEY v1";

/// Either kind of key file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KeyFile {
    Public(PublicKey),
    Private(PrivateKey),
}

impl KeyFile {
    pub fn public(&self) -> PublicKey {
        match self {
            KeyFile::Public(pk) => pk.clone(),
            KeyFile::Private(sk) => sk.public(),
        }
    }

    pub fn private(&self) -> Option<&PrivateKey> {
        match self {
            KeyFile::Public(_) => None,
            KeyFile::Private(sk) => Some(sk),
        }
    }

    pub fn serialize(&self) -> String {
        match self {
            KeyFile::Public(pk) => serialize_public(pk),
            KeyFile::Private(sk) => serialize_private(sk),
        }
    }
}

pub fn serialize_public(pk: &PublicKey) -> String {
    format!(
        "{PUBLIC_HEADER}\nn={}\ny={}\nr={}\nr_factors={}\n",
        pk.n(),
        pk.y(),
        pk.r().value(),
        pk.r()
    )
}

pub fn serialize_private(sk: &PrivateKey) -> String {
    format!(
        "{PRIVATE_HEADER}\nn={}\ny={}\nr={}\nr_factors={}\np={}\nq={}\n",
        sk.n(),
        sk.y(),
        sk.r().value(),
        sk.r(),
        sk.p(),
        sk.q()
    )
}

/// Parses a public or private key file.
pub fn parse_key_file(text: &str) -> Result<KeyFile> {
    let body = text
        .strip_suffix('\n')
        .ok_or_else(|| Error::parse("key file must end with a newline"))?;
    let mut lines = body.split('\n');
    let header = lines.next().unwrap_or_default();
    let private = match header {
        PUBLIC_HEADER => false,
        PRIVATE_HEADER => true,
        _ => return Err(Error::parse("unrecognized key file header")),
    };

    let mut field = |name: &str| -> Result<&str> {
        let line = lines
            .next()
            .ok_or_else(|| Error::parse(format!("missing field `{name}`")))?;
        line.strip_prefix(name)
            .and_then(|rest| rest.strip_prefix('='))
            .ok_or_else(|| Error::parse(format!("expected field `{name}`")))
    };

    let n = parse_decimal(field("n")?)?;
    let y = parse_decimal(field("y")?)?;
    let r = parse_decimal(field("r")?)?;
    let r_factors = FactoredInteger::parse_factor_list(field("r_factors")?)?;
    if r_factors.value() != &r {
        return Err(Error::parse("r_factors do not multiply to r"));
    }
    if y >= n {
        return Err(Error::parse("y must be reduced modulo n"));
    }

    let key = if private {
        let p = parse_decimal(field("p")?)?;
        let q = parse_decimal(field("q")?)?;
        if &p * &q != n {
            return Err(Error::parse("n is not p*q"));
        }
        let sk = PrivateKey::new(p, q, r_factors, y).map_err(|e| Error::parse(e.to_string()))?;
        KeyFile::Private(sk)
    } else {
        let pk = PublicKey::new(n, y, r_factors).map_err(|e| Error::parse(e.to_string()))?;
        KeyFile::Public(pk)
    };
    if lines.next().is_some() {
        return Err(Error::parse("trailing content after key fields"));
    }
    Ok(key)
}

pub fn parse_public_key(text: &str) -> Result<PublicKey> {
    parse_key_file(text).map(|k| k.public())
}

pub fn parse_private_key(text: &str) -> Result<PrivateKey> {
    match parse_key_file(text)? {
        KeyFile::Private(sk) => Ok(sk),
        KeyFile::Public(_) => Err(Error::parse("expected a private key file")),
    }
}

/// Parses one decimal integer per non-empty line.
pub fn parse_decimal_lines(text: &str) -> Result<Vec<BigUint>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(parse_decimal)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const FIXTURE_PRIVATE: &str =
        "BENALOH PRIVATE KEY v1\nn=43139\ny=27\nr=15\nr_factors=3,5\np=241\nq=179\n";
    const FIXTURE_PUBLIC: &str = "BENALOH PUBLIC KEY v1\nn=43139\ny=27\nr=15\nr_factors=3,5\n";

    #[test]
    fn fixture_serializes_bit_exact() {
        let sk = fixtures::counterexample_key();
        assert_eq!(serialize_private(&sk), FIXTURE_PRIVATE);
        assert_eq!(serialize_public(&sk.public()), FIXTURE_PUBLIC);
        assert_eq!(parse_private_key(FIXTURE_PRIVATE).unwrap(), sk);
        assert_eq!(parse_public_key(FIXTURE_PUBLIC).unwrap(), sk.public());
        assert_eq!(parse_public_key(FIXTURE_PRIVATE).unwrap(), sk.public());
        assert!(parse_private_key(FIXTURE_PUBLIC).is_err());
    }

    #[test]
    fn exponents_in_factor_list() {
        let r = FactoredInteger::from_u64_factors(&[(3, 2), (5, 1)]).unwrap();
        // p = 181 = 4*45 + 1, q = 179
        let sk = PrivateKey::new(181u32.into(), 179u32.into(), r, 2u32.into()).unwrap();
        let text = serialize_private(&sk);
        assert!(text.contains("\nr=45\nr_factors=3^2,5\n"));
        assert_eq!(parse_private_key(&text).unwrap(), sk);
    }

    #[test]
    fn rejects_non_canonical_text() {
        let bad = [
            "",
            "BENALOH PRIVATE KEY v1\nn=43139\ny=27\nr=15\nr_factors=3,5\np=241\nq=179",
            "BENALOH PRIVATE KEY v1\r\nn=43139\ny=27\nr=15\nr_factors=3,5\np=241\nq=179\n",
            "BENALOH PRIVATE KEY v2\nn=43139\ny=27\nr=15\nr_factors=3,5\np=241\nq=179\n",
            "BENALOH PRIVATE KEY v1\nn = 43139\ny=27\nr=15\nr_factors=3,5\np=241\nq=179\n",
            "BENALOH PRIVATE KEY v1\ny=27\nn=43139\nr=15\nr_factors=3,5\np=241\nq=179\n",
            "BENALOH PRIVATE KEY v1\nn=43139\ny=027\nr=15\nr_factors=3,5\np=241\nq=179\n",
            "BENALOH PRIVATE KEY v1\nn=43139\ny=27\nr=15\nr_factors=3,5\np=241\nq=179\n\n",
            "BENALOH PRIVATE KEY v1\nn=43139\ny=27\nr=15\nr_factors=15\np=241\nq=179\n",
            "BENALOH PRIVATE KEY v1\nn=43139\ny=27\nr=15\nr_factors=3,7\np=241\nq=179\n",
            "BENALOH PRIVATE KEY v1\nn=43140\ny=27\nr=15\nr_factors=3,5\np=241\nq=179\n",
            "BENALOH PRIVATE KEY v1\nn=43139\ny=241\nr=15\nr_factors=3,5\np=241\nq=179\n",
            "BENALOH PRIVATE KEY v1\nn=43139\ny=43140\nr=15\nr_factors=3,5\np=241\nq=179\n",
            "BENALOH PUBLIC KEY v1\nn=43139\ny=27\nr=15\nr_factors=3,5\np=241\n",
        ];
        for text in bad {
            assert!(parse_key_file(text).is_err(), "{text:?}");
        }
    }

    #[test]
    fn decimal_lines() {
        let v = parse_decimal_lines("1\n  24187 \n\n7\n").unwrap();
        assert_eq!(v, vec![1u32.into(), 24187u32.into(), 7u32.into()]);
        assert!(parse_decimal_lines("1\n-2\n").is_err());
    }
}
