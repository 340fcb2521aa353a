use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finitefield::Field;

/// The five supported ambient semigroups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundKind {
    NaturalsAdditive,
    NaturalsMultiplicative,
    IntegersAdditive,
    FiniteFieldAdditive(u64),
    FiniteFieldMultiplicative(u64),
}

impl GroundKind {
    pub fn is_additive(self) -> bool {
        matches!(
            self,
            GroundKind::NaturalsAdditive | GroundKind::IntegersAdditive | GroundKind::FiniteFieldAdditive(_)
        )
    }

    pub fn is_integer(self) -> bool {
        !matches!(
            self,
            GroundKind::FiniteFieldAdditive(_) | GroundKind::FiniteFieldMultiplicative(_)
        )
    }
}

/// A commutative semigroup together with its operation.
#[derive(Clone)]
pub struct GroundStructure {
    pub kind: GroundKind,
    field: Option<Arc<Field>>,
}

impl fmt::Debug for GroundStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroundStructure({})", self)
    }
}

impl fmt::Display for GroundStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GroundKind::NaturalsAdditive => write!(f, "nat+"),
            GroundKind::NaturalsMultiplicative => write!(f, "nat*"),
            GroundKind::IntegersAdditive => write!(f, "int+"),
            GroundKind::FiniteFieldAdditive(q) => write!(f, "ff+:{q}"),
            GroundKind::FiniteFieldMultiplicative(q) => write!(f, "ff*:{q}"),
        }
    }
}

impl PartialEq for GroundStructure {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl GroundStructure {
    pub fn naturals_add() -> Self {
        Self { kind: GroundKind::NaturalsAdditive, field: None }
    }

    pub fn naturals_mul() -> Self {
        Self { kind: GroundKind::NaturalsMultiplicative, field: None }
    }

    pub fn integers_add() -> Self {
        Self { kind: GroundKind::IntegersAdditive, field: None }
    }

    pub fn field_add(field: Arc<Field>) -> Self {
        Self { kind: GroundKind::FiniteFieldAdditive(field.order()), field: Some(field) }
    }

    pub fn field_mul(field: Arc<Field>) -> Self {
        Self { kind: GroundKind::FiniteFieldMultiplicative(field.order()), field: Some(field) }
    }

    /// Parses `nat+`, `nat*`, `int+`, `ff+:Q`, `ff*:Q` (also `add`/`mul`
    /// shorthands for the naturals).
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "nat+" | "add" | "additive" => Ok(Self::naturals_add()),
            "nat*" | "mul" | "multiplicative" => Ok(Self::naturals_mul()),
            "int+" => Ok(Self::integers_add()),
            other => {
                let (tag, q) = other
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("unknown ground structure {other:?}")))?;
                let q: u64 = q.parse().map_err(|_| Error::Parse(format!("bad field order {q:?}")))?;
                let field = Arc::new(Field::with_order(q)?);
                match tag {
                    "ff+" => Ok(Self::field_add(field)),
                    "ff*" => Ok(Self::field_mul(field)),
                    _ => Err(Error::Parse(format!("unknown ground structure {other:?}"))),
                }
            }
        }
    }

    pub fn field(&self) -> Option<&Arc<Field>> {
        self.field.as_ref()
    }

    pub fn is_additive(&self) -> bool {
        self.kind.is_additive()
    }

    pub fn identity(&self) -> BigInt {
        if self.is_additive() {
            BigInt::zero()
        } else {
            BigInt::one()
        }
    }

    pub fn has_cancellation(&self) -> bool {
        !matches!(self.kind, GroundKind::FiniteFieldMultiplicative(_))
    }

    pub fn symbol(&self) -> char {
        if self.is_additive() {
            '+'
        } else {
            '·'
        }
    }

    pub(crate) fn inverse_symbol(&self) -> char {
        if self.is_additive() {
            '-'
        } else {
            '/'
        }
    }

    fn field_element(&self, x: &BigInt) -> Result<u32> {
        let q = self.field.as_ref().map(|f| f.order()).unwrap_or(0);
        x.to_u64()
            .filter(|&v| v < q)
            .map(|v| v as u32)
            .ok_or_else(|| Error::OutOfRange {
                set: format!("F_{q}"),
                value: x.clone(),
                lo: BigInt::zero(),
                hi: BigInt::from(q),
            })
    }

    pub fn op(&self, a: &BigInt, b: &BigInt) -> Result<BigInt> {
        match self.kind {
            GroundKind::NaturalsAdditive | GroundKind::IntegersAdditive => Ok(a + b),
            GroundKind::NaturalsMultiplicative => Ok(a * b),
            GroundKind::FiniteFieldAdditive(_) => {
                let f = self.field.as_ref().expect("field attached");
                Ok(BigInt::from(f.add(self.field_element(a)?, self.field_element(b)?)))
            }
            GroundKind::FiniteFieldMultiplicative(_) => {
                let f = self.field.as_ref().expect("field attached");
                Ok(BigInt::from(f.mul(self.field_element(a)?, self.field_element(b)?)))
            }
        }
    }

    /// Fast path for small naturals; `None` on overflow or for field grounds.
    pub fn op_u64(&self, a: u64, b: u64) -> Option<u64> {
        match self.kind {
            GroundKind::NaturalsAdditive | GroundKind::IntegersAdditive => a.checked_add(b),
            GroundKind::NaturalsMultiplicative => a.checked_mul(b),
            _ => None,
        }
    }

    /// Unique `x` with `op(s, x) = y`, if any (integer grounds only).
    pub fn preimage(&self, s: &BigInt, y: &BigInt) -> Option<BigInt> {
        match self.kind {
            GroundKind::NaturalsAdditive | GroundKind::IntegersAdditive => Some(y - s),
            GroundKind::NaturalsMultiplicative => {
                if s.is_zero() {
                    return None;
                }
                let (q, r) = y.div_rem(s);
                r.is_zero().then_some(q)
            }
            _ => None,
        }
    }

    pub fn in_carrier(&self, x: &BigInt) -> bool {
        match self.kind {
            GroundKind::NaturalsAdditive => !x.is_negative(),
            GroundKind::NaturalsMultiplicative => x.is_positive(),
            GroundKind::IntegersAdditive => true,
            GroundKind::FiniteFieldAdditive(q) | GroundKind::FiniteFieldMultiplicative(q) => {
                !x.is_negative() && x < &BigInt::from(q)
            }
        }
    }
}

impl Serialize for GroundStructure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GroundStructure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        GroundStructure::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grounds() -> Vec<GroundStructure> {
        vec![
            GroundStructure::naturals_add(),
            GroundStructure::naturals_mul(),
            GroundStructure::integers_add(),
            GroundStructure::parse("ff+:9").unwrap(),
            GroundStructure::parse("ff*:9").unwrap(),
            GroundStructure::parse("ff*:7").unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn operations_are_associative_and_commutative(a in 0u64..9, b in 0u64..9, c in 0u64..9) {
            for g in grounds() {
                let (a, b, c) = (BigInt::from(a % 7), BigInt::from(b % 7), BigInt::from(c % 7));
                let ab_c = g.op(&g.op(&a, &b).unwrap(), &c).unwrap();
                let a_bc = g.op(&a, &g.op(&b, &c).unwrap()).unwrap();
                prop_assert_eq!(ab_c, a_bc);
                prop_assert_eq!(g.op(&a, &b).unwrap(), g.op(&b, &a).unwrap());
            }
        }
    }

    #[test]
    fn identities() {
        for g in grounds() {
            for x in 0..7 {
                let x = BigInt::from(x);
                assert_eq!(g.op(&g.identity(), &x).unwrap(), x, "{g}");
            }
        }
    }

    #[test]
    fn roundtrip_names() {
        for g in grounds() {
            let s = serde_json::to_string(&g).unwrap();
            let back: GroundStructure = serde_json::from_str(&s).unwrap();
            assert_eq!(back, g);
        }
    }

    #[test]
    fn multiplicative_preimage_requires_divisibility() {
        let g = GroundStructure::naturals_mul();
        assert_eq!(g.preimage(&BigInt::from(3), &BigInt::from(12)), Some(BigInt::from(4)));
        assert_eq!(g.preimage(&BigInt::from(5), &BigInt::from(12)), None);
    }
}
