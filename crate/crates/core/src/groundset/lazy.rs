use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::Set;
use crate::error::{Error, Result};

pub type Membership = Arc<dyn Fn(&BigInt) -> Result<bool> + Send + Sync>;
pub type Enumerator = Arc<dyn Fn(&BigInt) -> Result<Vec<BigInt>> + Send + Sync>;
pub type FastMembership = Arc<dyn Fn(u64) -> Result<bool> + Send + Sync>;

/// How much of the set an enumerator promises to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    /// Every member `<= bound` is returned.
    Exact,
    /// Only members that were found (e.g. inside a search box) are returned.
    UnderApproximate,
}

/// A set given by a membership oracle and, optionally, an ordered enumerator.
/// Values may be far too large to store in a window.
#[derive(Clone)]
pub struct LazySet {
    descriptor: String,
    member: Membership,
    fast: Option<FastMembership>,
    enumerator: Option<(Enumerator, Exactness)>,
}

impl fmt::Debug for LazySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LazySet({})", self.descriptor)
    }
}

impl LazySet {
    pub fn new(descriptor: impl Into<String>, member: Membership) -> Self {
        Self { descriptor: descriptor.into(), member, fast: None, enumerator: None }
    }

    pub fn with_enumerator(mut self, enumerator: Enumerator, exactness: Exactness) -> Self {
        self.enumerator = Some((enumerator, exactness));
        self
    }

    pub fn with_fast_membership(mut self, fast: FastMembership) -> Self {
        self.fast = Some(fast);
        self
    }

    pub fn with_descriptor(mut self, descriptor: impl Into<String>) -> Self {
        self.descriptor = descriptor.into();
        self
    }
}

impl Set for LazySet {
    fn descriptor(&self) -> String {
        self.descriptor.clone()
    }

    fn contains(&self, x: &BigInt) -> Result<bool> {
        (self.member)(x)
    }

    fn contains_u64(&self, x: u64) -> Result<bool> {
        match &self.fast {
            Some(f) => f(x),
            None => (self.member)(&BigInt::from(x)),
        }
    }

    fn exactness(&self) -> Option<Exactness> {
        self.enumerator.as_ref().map(|(_, e)| *e)
    }

    fn enumerate_upto(&self, bound: &BigInt) -> Result<Vec<BigInt>> {
        match &self.enumerator {
            Some((e, _)) => e(bound),
            None => Err(Error::NotEnumerable(self.descriptor.clone())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerator_members_satisfy_predicate() {
        let squares = LazySet::new(
            "squares",
            Arc::new(|x: &BigInt| Ok(x.sqrt().pow(2) == *x)),
        )
        .with_enumerator(
            Arc::new(|b: &BigInt| {
                let mut out = Vec::new();
                let mut k = BigInt::from(1);
                while &(&k * &k) <= b {
                    out.push(&k * &k);
                    k += 1;
                }
                Ok(out)
            }),
            Exactness::Exact,
        );
        let got = squares.enumerate_upto(&BigInt::from(200)).unwrap();
        assert_eq!(got.len(), 14);
        for v in &got {
            assert!(squares.contains(v).unwrap());
        }
        // exact: nothing <= 200 is missing
        let brute = (1..=200).filter(|&x| squares.contains(&BigInt::from(x)).unwrap()).count();
        assert_eq!(brute, got.len());
    }

    #[test]
    fn no_enumerator_is_an_error() {
        let s = LazySet::new("all", Arc::new(|_: &BigInt| Ok(true)));
        assert!(matches!(s.enumerate_upto(&BigInt::from(3)), Err(Error::NotEnumerable(_))));
    }
}
