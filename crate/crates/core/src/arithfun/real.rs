//! Fixed-point reals with an explicit error radius.
//!
//! A value is `mant / 2^FRAC_BITS` and the true number lies within
//! `err / 2^FRAC_BITS` of it. Integers and dyadic rationals are exact
//! (`err == 0`); anything else carries a radius that every decision near a
//! boundary must respect.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const FRAC_BITS: u32 = 256;
const GUARD_BITS: u32 = 64;

#[derive(Clone, PartialEq, Eq)]
pub struct HpReal {
    mant: BigInt,
    err: BigUint,
}

impl fmt::Debug for HpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.20} (±{} ulp)", self.to_f64(), self.err)
    }
}

fn ceil_shift(x: BigUint, bits: u32) -> BigUint {
    let mask = (BigUint::one() << bits) - 1u32;
    let carry = !(&x & &mask).is_zero();
    (x >> bits) + if carry { 1u32 } else { 0u32 }
}

/// Round-half-up of `x / 2^bits`.
fn round_shift(x: &BigInt, bits: u32) -> (BigInt, bool) {
    let half = BigInt::one() << (bits - 1);
    let shifted: BigInt = (x + &half) >> bits;
    let exact = (&shifted << bits) == *x;
    (shifted, exact)
}

impl HpReal {
    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Self { mant: n.into() << FRAC_BITS, err: BigUint::zero() }
    }

    pub fn from_parts(mant: BigInt, err: BigUint) -> Self {
        Self { mant, err }
    }

    /// `num / den`, exact when the quotient is dyadic at this precision.
    pub fn from_ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let (num, den) = (num.into(), den.into());
        if den.is_zero() {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        let scaled = num << FRAC_BITS;
        let (q, r) = scaled.div_mod_floor(&den);
        let err = if r.is_zero() { BigUint::zero() } else { BigUint::one() };
        Ok(Self { mant: q, err })
    }

    /// `√k` for a non-negative integer `k`.
    pub fn sqrt_int(k: u64) -> Self {
        let scaled = BigInt::from(k) << (2 * FRAC_BITS);
        let root = scaled.sqrt();
        let exact = &root * &root == scaled;
        Self { mant: root, err: if exact { BigUint::zero() } else { BigUint::one() } }
    }

    /// Natural logarithm of a positive integer.
    pub fn ln_int(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("log 0".into()));
        }
        if n == 1 {
            return Ok(Self::zero());
        }
        let w = FRAC_BITS + GUARD_BITS;
        let k = 63 - n.leading_zeros();
        // y = n / 2^k in [1, 2)
        let y = BigInt::from(n) << (w - k);
        let one = BigInt::one() << w;
        let z = ((&y - &one) << w) / (&y + &one);
        let ln_y = atanh_fixed(&z, w) * 2;
        let ln2 = atanh_fixed(&((BigInt::one() << w) / 3), w) * 2;
        let total = ln_y + ln2 * k;
        let (mant, _) = round_shift(&total, GUARD_BITS);
        // working error is at most a few hundred guard ulps, well under one final ulp
        Ok(Self { mant, err: BigUint::from(2u32) })
    }

    /// Parses `3`, `-1.25`, `2/3`, `sqrt(2)`, `sqrt2`, `ln(3)`, and products
    /// of those joined by `*`, optionally followed by `/integer`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty real literal".into()));
        }
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest.trim()),
            None => (false, s),
        };
        let mut acc: Option<HpReal> = None;
        for factor in body.split('*') {
            let v = parse_factor(factor.trim())?;
            acc = Some(match acc {
                None => v,
                Some(a) => a.mul(&v),
            });
        }
        let v = acc.expect("at least one factor");
        Ok(if neg { v.neg() } else { v })
    }

    pub fn is_exact(&self) -> bool {
        self.err.is_zero()
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn err_ulps(&self) -> &BigUint {
        &self.err
    }

    pub fn neg(&self) -> Self {
        Self { mant: -&self.mant, err: self.err.clone() }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { mant: &self.mant + &o.mant, err: &self.err + &o.err }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { mant: &self.mant - &o.mant, err: &self.err + &o.err }
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        Self { mant: &self.mant * k, err: &self.err * k.magnitude() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let prod = &self.mant * &o.mant;
        let (mant, exact) = round_shift(&prod, FRAC_BITS);
        let cross = self.mant.magnitude() * &o.err + o.mant.magnitude() * &self.err + &self.err * &o.err;
        let mut err = ceil_shift(cross, FRAC_BITS);
        if !exact {
            err += 1u32;
        }
        Self { mant, err }
    }

    pub fn div_int(&self, k: &BigInt) -> Result<Self> {
        if k.is_zero() {
            return Err(Error::InvalidArgument("division by zero".into()));
        }
        let (q, r) = self.mant.div_mod_floor(k);
        let err = if r.is_zero() && self.err.is_zero() {
            BigUint::zero()
        } else {
            self.err.div_ceil(k.magnitude()) + 1u32
        };
        Ok(Self { mant: q, err })
    }

    pub fn floor(&self) -> BigInt {
        self.mant.div_floor(&(BigInt::one() << FRAC_BITS))
    }

    /// Fractional part of the centre value, as a numerator over `2^FRAC_BITS`.
    pub fn frac_mantissa(&self) -> BigUint {
        let m = self.mant.mod_floor(&(BigInt::one() << FRAC_BITS));
        m.to_biguint().expect("non-negative")
    }

    /// Fractional part truncated to 128 bits (a point of the torus).
    pub fn frac_u128(&self) -> u128 {
        let m = self.frac_mantissa() >> (FRAC_BITS - 128);
        m.to_u128().expect("fits")
    }

    pub fn to_f64(&self) -> f64 {
        let (sign, mag) = (self.mant.sign(), self.mant.magnitude());
        let bits = mag.bits();
        let v = if bits > 1000 {
            f64::INFINITY
        } else {
            let shift = bits.saturating_sub(64);
            let top = (mag >> shift).to_u64().unwrap_or(0) as f64;
            top * 2f64.powi(shift as i32 - FRAC_BITS as i32)
        };
        if sign == Sign::Minus {
            -v
        } else {
            v
        }
    }

    /// Circular distance from the fractional part of the centre value to
    /// `boundary`, both over `2^FRAC_BITS`.
    pub fn frac_distance_to(&self, boundary: &BigUint) -> BigUint {
        let one = BigUint::one() << FRAC_BITS;
        let f = self.frac_mantissa();
        let d = if f >= *boundary { &f - boundary } else { boundary - &f };
        let wrap = &one - &d;
        d.min(wrap)
    }

    /// Distance to the nearest integer, `‖x‖`, as a centre value.
    pub fn dist_to_int(&self) -> HpReal {
        let one = BigUint::one() << FRAC_BITS;
        let f = self.frac_mantissa();
        let d = f.clone().min(&one - &f);
        HpReal { mant: BigInt::from(d), err: self.err.clone() }
    }

    pub fn cmp_centre(&self, o: &Self) -> std::cmp::Ordering {
        self.mant.cmp(&o.mant)
    }

    /// Sign of `self - o` if the error balls are disjoint.
    pub fn definitely_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        let d = &self.mant - &o.mant;
        let radius = BigInt::from(&self.err + &o.err);
        if d.abs() <= radius {
            None
        } else {
            Some(d.sign().cmp(&Sign::NoSign))
        }
    }
}

fn parse_factor(f: &str) -> Result<HpReal> {
    let bad = || Error::Parse(format!("bad real factor {f:?}"));
    if let Some(inner) = f.strip_prefix("sqrt") {
        let inner = inner.trim();
        let (arg, rest) = match inner.strip_prefix('(') {
            Some(r) => {
                let close = r.find(')').ok_or_else(bad)?;
                (&r[..close], &r[close + 1..])
            }
            None => {
                let end = inner.find('/').unwrap_or(inner.len());
                (&inner[..end], &inner[end..])
            }
        };
        let k: u64 = arg.trim().parse().map_err(|_| bad())?;
        let v = HpReal::sqrt_int(k);
        return apply_divisor(v, rest.trim(), f);
    }
    if let Some(inner) = f.strip_prefix("ln(") {
        let close = inner.find(')').ok_or_else(bad)?;
        let k: u64 = inner[..close].trim().parse().map_err(|_| bad())?;
        return apply_divisor(HpReal::ln_int(k)?, inner[close + 1..].trim(), f);
    }
    if let Some((n, d)) = f.split_once('/') {
        let n = parse_decimal(n.trim()).ok_or_else(bad)?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        return n.div_int(&d);
    }
    parse_decimal(f).ok_or_else(bad)
}

fn apply_divisor(v: HpReal, rest: &str, f: &str) -> Result<HpReal> {
    if rest.is_empty() {
        return Ok(v);
    }
    let d = rest.strip_prefix('/').ok_or_else(|| Error::Parse(format!("bad real factor {f:?}")))?;
    let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(format!("bad divisor in {f:?}")))?;
    v.div_int(&d)
}

fn parse_decimal(s: &str) -> Option<HpReal> {
    let (neg, s) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{}{}", if int.is_empty() { "0" } else { int }, frac).parse().ok()?;
    let den = BigInt::from(10u32).pow(frac.len() as u32);
    let v = HpReal::from_ratio(digits, den).ok()?;
    Some(if neg { v.neg() } else { v })
}

/// `atanh(z)` for fixed-point `z` with `w` fractional bits, `|z| <= 1/3`.
fn atanh_fixed(z: &BigInt, w: u32) -> BigInt {
    let z2 = (z * z) >> w;
    let mut term = z.clone();
    let mut sum = BigInt::zero();
    let mut k = 1u32;
    while !term.is_zero() {
        sum += &term / k;
        term = (&term * &z2) >> w;
        k += 2;
    }
    sum
}

/// Real polynomial; `coeffs[i]` multiplies `x^i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    pub coeffs: Vec<HpReal>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<HpReal>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.mant.is_zero() && c.err.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(HpReal::zero());
        }
        Self { coeffs }
    }

    /// `c · x`.
    pub fn linear(c: HpReal) -> Self {
        Self::new(vec![HpReal::zero(), c])
    }

    /// Comma-separated coefficients, constant term first: `0,sqrt2`.
    pub fn parse(s: &str) -> Result<Self> {
        let coeffs = s.split(',').map(HpReal::parse).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(coeffs))
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn leading(&self) -> &HpReal {
        self.coeffs.last().expect("non-empty")
    }

    /// Exact evaluation at an integer; only coefficient errors propagate.
    pub fn eval_int(&self, x: &BigInt) -> HpReal {
        let mut acc = HpReal::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_int(x).add(c);
        }
        acc
    }

    pub fn eval(&self, x: &HpReal) -> HpReal {
        let mut acc = HpReal::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    /// `self(ξ·n + β)` re-expanded as a polynomial in `n`.
    pub fn compose_affine(&self, xi: &HpReal, beta: &HpReal) -> Poly {
        // Horner over polynomials: acc = acc * (ξ n + β) + c
        let mut acc: Vec<HpReal> = vec![HpReal::zero()];
        for c in self.coeffs.iter().rev() {
            let mut next = vec![HpReal::zero(); acc.len() + 1];
            for (i, a) in acc.iter().enumerate() {
                next[i] = next[i].add(&a.mul(beta));
                next[i + 1] = next[i + 1].add(&a.mul(xi));
            }
            next[0] = next[0].add(c);
            acc = next;
        }
        Poly::new(acc)
    }

    pub fn scale_int(&self, h: i64) -> Poly {
        let k = BigInt::from(h);
        Poly::new(self.coeffs.iter().map(|c| c.mul_int(&k)).collect())
    }

    pub fn torus(&self) -> TorusPoly {
        TorusPoly {
            coeffs: self.coeffs.iter().map(HpReal::frac_u128).collect(),
            coeff_err: self
                .coeffs
                .iter()
                .map(|c| {
                    // truncation to 128 bits plus the coefficient's own radius, in 2^-128 units
                    let own = ceil_shift(c.err.clone(), FRAC_BITS - 128).to_f64().unwrap_or(f64::INFINITY);
                    own + 1.0
                })
                .collect(),
        }
    }
}

/// Polynomial reduced mod 1 for fast evaluation at integers: coefficients
/// are 128-bit torus points and arithmetic wraps mod `2^128`.
#[derive(Clone, Debug)]
pub struct TorusPoly {
    coeffs: Vec<u128>,
    coeff_err: Vec<f64>,
}

impl TorusPoly {
    /// `{p(n)}` as a torus point.
    pub fn eval(&self, n: i64) -> u128 {
        let x = n as i128 as u128;
        let mut acc: u128 = 0;
        for &c in self.coeffs.iter().rev() {
            acc = acc.wrapping_mul(x).wrapping_add(c);
        }
        acc
    }

    /// Upper bound on `|{p(n)} - computed|` (as a real number in [0,1)).
    pub fn eval_err(&self, n: i64) -> f64 {
        let x = (n as f64).abs();
        let mut pow = 1.0;
        let mut e = 0.0;
        for ce in &self.coeff_err {
            e += ce * pow;
            pow *= x;
        }
        e * 2f64.powi(-128)
    }
}

pub fn torus_to_f64(t: u128) -> f64 {
    (t >> 64) as f64 / 2f64.powi(64) + (t as u64) as f64 / 2f64.powi(128)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_digits() {
        let r = HpReal::sqrt_int(2);
        assert!((r.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!(!r.is_exact());
        assert!(HpReal::sqrt_int(9).is_exact());
        assert_eq!(HpReal::sqrt_int(9).floor(), BigInt::from(3));
    }

    #[test]
    fn ln_matches_f64() {
        for n in [2u64, 3, 10, 1000, 123_456_789] {
            let l = HpReal::ln_int(n).unwrap();
            assert!((l.to_f64() - (n as f64).ln()).abs() < 1e-13, "n={n}");
        }
        // ln(8) = 3 ln(2) to full precision
        let l8 = HpReal::ln_int(8).unwrap();
        let l2 = HpReal::ln_int(2).unwrap().mul_int(&BigInt::from(3));
        assert!(l8.definitely_cmp(&l2).is_none());
    }

    #[test]
    fn parse_forms() {
        assert!(HpReal::parse("1/2").unwrap().is_exact());
        assert!(!HpReal::parse("1/3").unwrap().is_exact());
        assert_eq!(HpReal::parse("0.25").unwrap(), HpReal::from_ratio(1, 4).unwrap());
        let v = HpReal::parse("-2*sqrt(2)").unwrap();
        assert!((v.to_f64() + 2.0 * std::f64::consts::SQRT_2).abs() < 1e-14);
        let v = HpReal::parse("sqrt2/2").unwrap();
        assert!((v.to_f64() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(HpReal::parse("abc").is_err());
    }

    #[test]
    fn error_radius_covers_truth() {
        // (√2)^2 should be within its radius of 2
        let r = HpReal::sqrt_int(2);
        let sq = r.mul(&r);
        let two = HpReal::from_int(2);
        assert!(sq.definitely_cmp(&two).is_none());
        assert!(sq.err_ulps() > &BigUint::zero());
    }

    #[test]
    fn torus_eval_matches_exact() {
        let p = Poly::new(vec![HpReal::parse("1/3").unwrap(), HpReal::sqrt_int(2), HpReal::sqrt_int(3)]);
        let t = p.torus();
        for n in [-50i64, -1, 0, 1, 7, 1000, 99_999] {
            let exact = p.eval_int(&BigInt::from(n)).frac_u128();
            let fast = t.eval(n);
            let diff = exact.wrapping_sub(fast).min(fast.wrapping_sub(exact));
            assert!(diff < 1u128 << 100, "n={n}");
        }
    }

    #[test]
    fn compose_affine_expands() {
        // p(x) = x^2, p(2n + 1) = 4n^2 + 4n + 1
        let p = Poly::new(vec![HpReal::zero(), HpReal::zero(), HpReal::from_int(1)]);
        let q = p.compose_affine(&HpReal::from_int(2), &HpReal::from_int(1));
        assert_eq!(q.coeffs, vec![HpReal::from_int(1), HpReal::from_int(4), HpReal::from_int(4)]);
    }
}
