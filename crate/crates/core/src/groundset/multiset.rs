use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::error::{Error, Result};

/// Finite multiset: sorted support with positive multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMultiset {
    entries: Vec<(BigInt, u64)>,
    total: u64,
}

impl FiniteMultiset {
    /// Merges repeated elements; zero multiplicities are rejected.
    pub fn from_counts(counts: impl IntoIterator<Item = (BigInt, u64)>) -> Result<Self> {
        let mut map: BTreeMap<BigInt, u64> = BTreeMap::new();
        for (x, m) in counts {
            if m == 0 {
                return Err(Error::InvalidArgument(format!("element {x} has multiplicity 0")));
            }
            *map.entry(x).or_insert(0) += m;
        }
        let entries: Vec<_> = map.into_iter().collect();
        let total = entries.iter().map(|(_, m)| m).sum();
        Ok(Self { entries, total })
    }

    pub fn from_elements(elements: impl IntoIterator<Item = BigInt>) -> Self {
        Self::from_counts(elements.into_iter().map(|x| (x, 1))).expect("multiplicity 1")
    }

    /// `{lo, ..., hi}` each with multiplicity one.
    pub fn interval(lo: i64, hi: i64) -> Self {
        Self::from_elements((lo..=hi).map(BigInt::from))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BigInt, u64)> {
        self.entries.iter().map(|(x, m)| (x, *m))
    }

    pub fn support(&self) -> impl Iterator<Item = &BigInt> {
        self.entries.iter().map(|(x, _)| x)
    }

    pub fn multiplicity(&self, x: &BigInt) -> u64 {
        self.entries
            .binary_search_by(|(e, _)| e.cmp(x))
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Contiguous support `lo..=hi` with unit multiplicities, if that is
    /// what this multiset is.
    pub fn as_unit_interval(&self) -> Option<(BigInt, BigInt)> {
        let first = self.entries.first()?;
        let last = self.entries.last()?;
        let contiguous = self.entries.iter().all(|(_, m)| *m == 1)
            && (&last.0 - &first.0) == BigInt::from(self.entries.len() - 1);
        contiguous.then(|| (first.0.clone(), last.0.clone()))
    }
}
