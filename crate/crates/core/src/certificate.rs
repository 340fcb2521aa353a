//! Machine-checkable witnesses. Every big integer travels as a decimal
//! string so nothing is truncated on the wire.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod dec {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.trim().parse().map_err(|_| serde::de::Error::custom(format!("not a decimal integer: {s:?}")))
    }
}

pub mod dec_vec {
    use num_bigint::BigInt;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| s.trim().parse().map_err(|_| serde::de::Error::custom(format!("not a decimal integer: {s:?}"))))
            .collect()
    }
}

pub mod dec_matrix {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<BigInt>>, D::Error> {
        let rows = Vec::<Vec<String>>::deserialize(d)?;
        rows.iter()
            .map(|r| {
                r.iter()
                    .map(|s| s.trim().parse().map_err(|_| serde::de::Error::custom(format!("not a decimal integer: {s:?}"))))
                    .collect()
            })
            .collect()
    }
}

/// One finite sum or product `s_α` with its (1-based, increasing) index set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexedValue {
    pub alpha: Vec<usize>,
    #[serde(with = "dec")]
    pub value: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Certificate {
    /// Every `n` in `[lo, hi]` has some `f ∈ F` with `op(f, n) ∈ A`.
    Syndetic {
        ground: String,
        #[serde(with = "dec_vec")]
        witness_f: Vec<BigInt>,
        #[serde(with = "dec")]
        horizon: BigInt,
        #[serde(with = "dec")]
        lo: BigInt,
        #[serde(with = "dec")]
        hi: BigInt,
    },
    /// `op(f, x) ∈ A` for every `f ∈ F`.
    ThickWitness {
        ground: String,
        #[serde(with = "dec_vec")]
        f: Vec<BigInt>,
        #[serde(with = "dec")]
        x: BigInt,
    },
    /// All `2^r − 1` finite sums/products of the generators lie in `A`.
    IpR {
        ground: String,
        #[serde(with = "dec_vec")]
        generators: Vec<BigInt>,
        values: Vec<IndexedValue>,
    },
    /// All finite sums/products of the generators avoid `A`.
    IpRRefutation {
        ground: String,
        #[serde(with = "dec_vec")]
        generators: Vec<BigInt>,
        values: Vec<IndexedValue>,
    },
    Ap {
        #[serde(with = "dec")]
        start: BigInt,
        #[serde(with = "dec")]
        step: BigInt,
        length: u64,
    },
    Gp {
        #[serde(with = "dec")]
        start: BigInt,
        #[serde(with = "dec")]
        ratio: BigInt,
        length: u64,
    },
    /// `s + Σ j_i d_i ∈ A` for all `j ∈ [1,n]^m`.
    GenAp {
        n: u32,
        #[serde(with = "dec")]
        s: BigInt,
        #[serde(with = "dec_vec")]
        d: Vec<BigInt>,
    },
    /// `s · Π d_i^{j_i} ∈ A` for all `j ∈ [1,n]^m`.
    GeoCube {
        n: u32,
        #[serde(with = "dec")]
        s: BigInt,
        #[serde(with = "dec_vec")]
        d: Vec<BigInt>,
    },
    /// `c (a + i d)^j ∈ A` for `1 <= i, j <= n`.
    GeoArith {
        n: u32,
        #[serde(with = "dec")]
        c: BigInt,
        #[serde(with = "dec")]
        a: BigInt,
        #[serde(with = "dec")]
        d: BigInt,
    },
    /// `op(s, M_{α,j}) ∈ A` for every column `j`.
    CombRich {
        ground: String,
        #[serde(with = "dec_matrix")]
        matrix: Vec<Vec<BigInt>>,
        alpha: Vec<usize>,
        #[serde(with = "dec")]
        s: BigInt,
    },
    /// A variable word over `[n]` (with `*` for the variable) whose `n`
    /// substitutions all lie in the word set. Words are indexed base `n`,
    /// first letter most significant, letter `c` as digit `c − 1`.
    CombLine { n: u32, r: u32, word: String },
    /// `x^k + F ⊆ gΓ` in `F_{p^m}` with the stated modulus.
    FieldWitness {
        p: u64,
        m: u32,
        modulus: Vec<u64>,
        k: u64,
        g: u32,
        #[serde(rename = "F")]
        f: Vec<u32>,
        x: u32,
    },
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Syndetic { .. } => "syndetic",
            Certificate::ThickWitness { .. } => "thick_witness",
            Certificate::IpR { .. } => "ip_r",
            Certificate::IpRRefutation { .. } => "ip_r_refutation",
            Certificate::Ap { .. } => "ap",
            Certificate::Gp { .. } => "gp",
            Certificate::GenAp { .. } => "gen_ap",
            Certificate::GeoCube { .. } => "geo_cube",
            Certificate::GeoArith { .. } => "geo_arith",
            Certificate::CombRich { .. } => "comb_rich",
            Certificate::CombLine { .. } => "comb_line",
            Certificate::FieldWitness { .. } => "field_witness",
        }
    }

    /// Whether checking needs a set (field witnesses are self-contained).
    pub fn needs_set(&self) -> bool {
        !matches!(self, Certificate::FieldWitness { .. })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::MalformedCertificate(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_keeps_big_values_exact() {
        let huge: BigInt = BigInt::from(4).pow(1024) + 3;
        let c = Certificate::Ap { start: huge.clone(), step: BigInt::from(1), length: 3 };
        let js = c.to_json();
        assert!(js.contains(&huge.to_string()));
        assert!(js.contains("\"kind\": \"ap\""));
        assert_eq!(Certificate::from_json(&js).unwrap(), c);
    }

    #[test]
    fn rejects_unknown_fields_and_numbers() {
        assert!(Certificate::from_json(r#"{"kind":"ap","start":"1","step":"1","length":2,"extra":1}"#).is_err());
        assert!(Certificate::from_json(r#"{"kind":"ap","start":1,"step":"1","length":2}"#).is_err());
        assert!(Certificate::from_json(r#"{"kind":"nope"}"#).is_err());
    }
}
