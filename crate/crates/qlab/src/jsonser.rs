//! Serde helpers: big integers as decimal strings, rationals as "n/d"
//! strings, so JSON consumers never round.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serializer};

pub(crate) mod ratio_string {
    use super::*;

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_ratio(&raw).map_err(D::Error::custom)
    }
}

pub(crate) fn parse_ratio(raw: &str) -> Result<BigRational, String> {
    let (n, d) = match raw.split_once('/') {
        Some((n, d)) => (n, d),
        None => (raw, "1"),
    };
    let numer: BigInt = n.trim().parse().map_err(|_| format!("invalid numerator {n:?}"))?;
    let denom: BigInt = d.trim().parse().map_err(|_| format!("invalid denominator {d:?}"))?;
    if denom == BigInt::from(0) {
        return Err("denominator must be nonzero".into());
    }
    Ok(BigRational::new(numer, denom))
}

pub(crate) mod biguint_string {
    use super::*;

    pub fn serialize<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(|_| D::Error::custom(format!("invalid integer {raw:?}")))
    }
}

pub(crate) mod bigint_string {
    use super::*;

    pub fn serialize<S: Serializer>(n: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(|_| D::Error::custom(format!("invalid integer {raw:?}")))
    }
}

pub(crate) mod bigint_vec_string {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for n in v {
            seq.serialize_element(&n.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| s.parse().map_err(|_| D::Error::custom(format!("invalid integer {s:?}"))))
            .collect()
    }
}
