use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{Exactness, Set};
use crate::error::{Error, Result};

/// Largest window (in bits) we are willing to materialize.
pub const MAX_WINDOW_BITS: u64 = 1 << 26;

/// Exact membership bitmap over `[lo, hi)`. Bit `i` of the bitmap stands for
/// the integer `lo + i`; `lo` itself may be astronomically large.
#[derive(Clone, PartialEq, Eq)]
pub struct IntegerWindowSet {
    lo: BigInt,
    hi: BigInt,
    len: u64,
    words: Vec<u64>,
}

impl std::fmt::Debug for IntegerWindowSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "IntegerWindowSet[{}, {}) with {} members", self.lo, self.hi, self.count())
    }
}

impl IntegerWindowSet {
    pub fn empty(lo: BigInt, hi: BigInt) -> Result<Self> {
        if hi < lo {
            return Err(Error::InvalidArgument(format!("window [{lo}, {hi}) has hi < lo")));
        }
        let len = (&hi - &lo).to_u64().unwrap_or(u64::MAX);
        if len > MAX_WINDOW_BITS {
            return Err(Error::WindowTooLarge { size: len, cap: MAX_WINDOW_BITS });
        }
        Ok(Self { lo, hi, len, words: vec![0; len.div_ceil(64) as usize] })
    }

    /// Window over `[lo, hi)` (both fitting in i64) holding the values
    /// accepted by `pred`.
    pub fn from_predicate(lo: BigInt, hi: BigInt, pred: impl Fn(i64) -> bool) -> Result<Self> {
        let mut w = Self::empty(lo, hi)?;
        let base = w.lo.to_i64().ok_or_else(|| Error::InvalidArgument("lo must fit in i64".into()))?;
        for i in 0..w.len {
            if pred(base + i as i64) {
                w.insert_offset(i);
            }
        }
        Ok(w)
    }

    pub fn from_members<'a>(lo: BigInt, hi: BigInt, members: impl IntoIterator<Item = &'a BigInt>) -> Result<Self> {
        let mut w = Self::empty(lo, hi)?;
        for m in members {
            w.insert(m)?;
        }
        Ok(w)
    }

    pub fn lo(&self) -> &BigInt {
        &self.lo
    }

    pub fn hi(&self) -> &BigInt {
        &self.hi
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn offset_of(&self, x: &BigInt) -> Option<u64> {
        if x < &self.lo || x >= &self.hi {
            return None;
        }
        (x - &self.lo).to_u64()
    }

    fn range_error(&self, x: &BigInt) -> Error {
        Error::OutOfRange {
            set: "window".into(),
            value: x.clone(),
            lo: self.lo.clone(),
            hi: self.hi.clone(),
        }
    }

    pub fn insert(&mut self, x: &BigInt) -> Result<()> {
        let i = self.offset_of(x).ok_or_else(|| self.range_error(x))?;
        self.insert_offset(i);
        Ok(())
    }

    pub fn insert_offset(&mut self, i: u64) {
        debug_assert!(i < self.len);
        self.words[(i / 64) as usize] |= 1 << (i % 64);
    }

    pub fn get_offset(&self, i: u64) -> bool {
        i < self.len && (self.words[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }

    /// Membership that treats values outside the window as absent.
    pub fn contains_lenient(&self, x: &BigInt) -> bool {
        self.offset_of(x).is_some_and(|i| self.get_offset(i))
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Offsets of members, ascending.
    pub fn offsets(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros() as u64;
                bits &= bits - 1;
                Some(wi as u64 * 64 + t)
            })
        })
    }

    pub fn members(&self) -> impl Iterator<Item = BigInt> + '_ {
        self.offsets().map(move |i| &self.lo + i)
    }

    /// Complement relative to the window.
    pub fn complement(&self) -> Self {
        let mut out = self.clone();
        for w in out.words.iter_mut() {
            *w = !*w;
        }
        out.clear_tail();
        out
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    fn same_frame(&self, other: &Self) -> Result<()> {
        if self.lo != other.lo || self.hi != other.hi {
            return Err(Error::InvalidArgument("windows have different ranges".into()));
        }
        Ok(())
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.same_frame(other)?;
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
        Ok(out)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.same_frame(other)?;
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
        Ok(out)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.lo == other.lo && self.hi == other.hi && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Bitmap bytes, least significant bit first: bit `i` of the stream is
    /// membership of `lo + i`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8) as usize;
        self.words.iter().flat_map(|w| w.to_le_bytes()).take(nbytes).collect()
    }

    pub fn to_json(&self) -> WindowJson {
        WindowJson {
            kind: "window".into(),
            lo: self.lo.to_string(),
            hi: self.hi.to_string(),
            bits: STANDARD.encode(self.to_bytes()),
        }
    }

    pub fn from_json(j: &WindowJson) -> Result<Self> {
        if j.kind != "window" {
            return Err(Error::Parse(format!("expected kind \"window\", got {:?}", j.kind)));
        }
        let lo: BigInt = j.lo.parse().map_err(|_| Error::Parse(format!("bad lo {:?}", j.lo)))?;
        let hi: BigInt = j.hi.parse().map_err(|_| Error::Parse(format!("bad hi {:?}", j.hi)))?;
        let mut w = Self::empty(lo, hi)?;
        let bytes = STANDARD.decode(&j.bits).map_err(|e| Error::Parse(e.to_string()))?;
        if bytes.len() as u64 != w.len.div_ceil(8) {
            return Err(Error::Parse(format!(
                "bitmap holds {} bytes, window of {} bits needs {}",
                bytes.len(),
                w.len,
                w.len.div_ceil(8)
            )));
        }
        for (i, chunk) in bytes.chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            w.words[i] = u64::from_le_bytes(buf);
        }
        if w.len % 8 != 0 {
            let stray = w.words.last().copied().unwrap_or(0) >> (w.len % 64);
            if stray != 0 {
                return Err(Error::Parse("bits set beyond the end of the window".into()));
            }
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowJson {
    pub kind: String,
    pub lo: String,
    pub hi: String,
    pub bits: String,
}

impl Set for IntegerWindowSet {
    fn descriptor(&self) -> String {
        format!("window[{},{})", self.lo, self.hi)
    }

    fn contains(&self, x: &BigInt) -> Result<bool> {
        let i = self.offset_of(x).ok_or_else(|| self.range_error(x))?;
        Ok(self.get_offset(i))
    }

    fn contains_u64(&self, x: u64) -> Result<bool> {
        match self.lo.to_u64() {
            Some(lo) if x >= lo && x - lo < self.len => Ok(self.get_offset(x - lo)),
            _ => self.contains(&BigInt::from(x)),
        }
    }

    fn domain(&self) -> Option<(BigInt, BigInt)> {
        Some((self.lo.clone(), self.hi.clone()))
    }

    fn exactness(&self) -> Option<Exactness> {
        Some(Exactness::Exact)
    }

    fn enumerate_upto(&self, bound: &BigInt) -> Result<Vec<BigInt>> {
        Ok(self.members().take_while(|m| m <= bound).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_inverted_and_oversized() {
        assert!(IntegerWindowSet::empty(BigInt::from(5), BigInt::from(4)).is_err());
        assert!(matches!(
            IntegerWindowSet::empty(BigInt::from(0), BigInt::from(MAX_WINDOW_BITS + 1)),
            Err(Error::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn huge_lo_is_fine() {
        let lo = BigInt::from(4u32).pow(256);
        let hi = &lo + 10;
        let mut w = IntegerWindowSet::empty(lo.clone(), hi).unwrap();
        w.insert(&(&lo + 3)).unwrap();
        assert!(w.contains(&(&lo + 3)).unwrap());
        assert!(!w.contains(&lo).unwrap());
        assert!(w.contains(&(&lo - 1)).is_err());
    }

    #[test]
    fn json_layout_is_lsb_first() {
        let w = IntegerWindowSet::from_predicate(BigInt::from(10), BigInt::from(20), |x| x == 10 || x == 19).unwrap();
        let j = w.to_json();
        // bit 0 -> byte 0 = 0b0000_0001, bit 9 -> byte 1 = 0b0000_0010
        assert_eq!(STANDARD.decode(&j.bits).unwrap(), vec![0x01, 0x02]);
        assert_eq!(j.lo, "10");
    }

    #[test]
    fn complement_stays_inside_window() {
        let w = IntegerWindowSet::from_predicate(BigInt::from(0), BigInt::from(70), |x| x % 2 == 0).unwrap();
        let c = w.complement();
        assert_eq!(c.count(), 35);
        assert_eq!(w.union(&c).unwrap().count(), 70);
    }

    proptest! {
        #[test]
        fn json_roundtrip(lo in -1000i64..1000, len in 0u64..300, seed in any::<u64>()) {
            let w = IntegerWindowSet::from_predicate(BigInt::from(lo), BigInt::from(lo + len as i64), |x| {
                (x as u64).wrapping_mul(seed | 1).rotate_left(17) % 3 == 0
            }).unwrap();
            let s = serde_json::to_string(&w.to_json()).unwrap();
            let back = IntegerWindowSet::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
            prop_assert_eq!(back, w);
        }
    }
}
