use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::arithfun::{big_omega, is_prime_u64, nu_p, HpReal, Poly, SieveTable, FRAC_BITS};
use crate::error::{Error, Result};
use crate::groundset::{Enumerator, Exactness, LazySet, Membership};

/// Decisions closer than `2^-BOUNDARY_BAND_BITS` to an interval endpoint are
/// refused unless both sides are exact.
pub const BOUNDARY_BAND_BITS: u32 = 64;

/// Largest bound a pointwise enumerator will scan.
const MAX_SCAN: u64 = 1 << 26;

fn band() -> BigUint {
    BigUint::one() << (FRAC_BITS - BOUNDARY_BAND_BITS)
}

fn one_ulps() -> BigUint {
    BigUint::one() << FRAC_BITS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hom {
    Omega,
    Nu(u64),
    Log,
}

impl fmt::Display for Hom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hom::Omega => write!(f, "omega"),
            Hom::Nu(p) => write!(f, "nu{p}"),
            Hom::Log => write!(f, "log"),
        }
    }
}

impl std::str::FromStr for Hom {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "omega" | "bigomega" => Ok(Hom::Omega),
            "log" | "ln" => Ok(Hom::Log),
            _ => {
                let p = s
                    .strip_prefix("nu")
                    .map(|r| r.trim_start_matches(['_', ':', '(']).trim_end_matches(')'))
                    .and_then(|r| r.parse::<u64>().ok())
                    .ok_or_else(|| Error::Parse(format!("unknown homomorphism {s:?}")))?;
                if !is_prime_u64(p) {
                    return Err(Error::NotPrime(p));
                }
                Ok(Hom::Nu(p))
            }
        }
    }
}

/// `[lo, hi)` inside `[0, 1]`.
#[derive(Debug, Clone)]
pub struct HalfOpen {
    pub lo: HpReal,
    pub hi: HpReal,
}

impl HalfOpen {
    pub fn new(lo: HpReal, hi: HpReal) -> Result<Self> {
        let zero = HpReal::zero();
        let one = HpReal::from_int(1);
        if lo.cmp_centre(&zero).is_lt() || hi.cmp_centre(&one).is_gt() || lo.cmp_centre(&hi).is_ge() {
            return Err(Error::InvalidArgument("need 0 <= lo < hi <= 1".into()));
        }
        Ok(Self { lo, hi })
    }

    /// Parses `lo,hi` or `[lo,hi)`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('[').trim_end_matches(')');
        let (a, b) = t.split_once(',').ok_or_else(|| Error::Parse(format!("interval {s:?}")))?;
        Self::new(HpReal::parse(a)?, HpReal::parse(b)?)
    }

    fn is_full(&self) -> bool {
        self.lo.mantissa().is_zero() && self.lo.is_exact() && self.hi == HpReal::from_int(1)
    }

    /// Whether `{v} ∈ [lo, hi)`, refusing to decide inside the boundary band.
    pub fn contains_frac(&self, v: &HpReal, what: &dyn Fn() -> String) -> Result<bool> {
        if self.is_full() {
            return Ok(true);
        }
        let one = one_ulps();
        for b in [&self.lo, &self.hi] {
            if v.is_exact() && b.is_exact() {
                continue;
            }
            let bm = b.mantissa().to_biguint().unwrap_or_default() % &one;
            let radius = band().max(v.err_ulps() + b.err_ulps());
            if v.frac_distance_to(&bm) <= radius {
                return Err(Error::BoundaryAmbiguity { what: what(), band: "2^-64".into() });
            }
        }
        let f = BigInt::from(v.frac_mantissa());
        Ok(&f >= self.lo.mantissa() && &f < self.hi.mantissa())
    }
}

impl fmt::Display for HalfOpen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo.to_f64(), self.hi.to_f64())
    }
}

fn scan_enumerator(member: Membership, start: u64) -> Enumerator {
    Arc::new(move |bound: &BigInt| {
        let top = bound.to_u64().unwrap_or(u64::MAX);
        if top > MAX_SCAN {
            return Err(Error::BudgetExceeded(format!("pointwise enumeration up to {bound}")));
        }
        let mut out = Vec::new();
        for n in start..=top {
            let x = BigInt::from(n);
            if member(&x)? {
                out.push(x);
            }
        }
        Ok(out)
    })
}

/// `{n >= 1 : {p(hom(n))} ∈ I}`.
pub fn level_set(p: &Poly, hom: Hom, interval: &HalfOpen) -> Result<LazySet> {
    if p.is_constant() {
        return Err(Error::InvalidArgument("polynomial must be non-constant".into()));
    }
    let descr = format!("level_set({hom}, {interval})");
    match hom {
        Hom::Omega | Hom::Nu(_) => {
            // hom(n) <= 64 for n < 2^64, so membership is a table lookup
            let table: Arc<Vec<Result<bool>>> = Arc::new(
                (0..=64u32)
                    .map(|k| {
                        let v = p.eval_int(&BigInt::from(k));
                        interval.contains_frac(&v, &|| format!("p({k})"))
                    })
                    .collect(),
            );
            let t = table.clone();
            let value = move |n: u64| -> Result<u32> {
                match hom {
                    Hom::Nu(q) => nu_p(n, q),
                    _ => big_omega(n),
                }
            };
            let member: Membership = Arc::new(move |x: &BigInt| {
                if x < &BigInt::one() {
                    return Ok(false);
                }
                let n = x.to_u64().ok_or_else(|| Error::OutOfRange {
                    set: "level set domain".into(),
                    value: x.clone(),
                    lo: BigInt::one(),
                    hi: BigInt::from(u64::MAX),
                })?;
                t[value(n)? as usize].clone()
            });
            let t = table.clone();
            let fast = Arc::new(move |n: u64| -> Result<bool> {
                if n == 0 {
                    return Ok(false);
                }
                t[value(n)? as usize].clone()
            });
            let t = table;
            let enumerate: Enumerator = Arc::new(move |bound: &BigInt| {
                let top = bound.to_u64().unwrap_or(u64::MAX);
                if top > MAX_SCAN {
                    return Err(Error::BudgetExceeded(format!("sieve up to {bound}")));
                }
                if top == 0 {
                    return Ok(Vec::new());
                }
                let sieve = SieveTable::new(top as u32);
                let mut out = Vec::new();
                for n in 1..=top as u32 {
                    let k = match hom {
                        Hom::Nu(q) => sieve.nu_p(n, q as u32),
                        _ => sieve.big_omega(n),
                    };
                    if t[k as usize].clone()? {
                        out.push(BigInt::from(n));
                    }
                }
                Ok(out)
            });
            Ok(LazySet::new(descr, member)
                .with_fast_membership(fast)
                .with_enumerator(enumerate, Exactness::Exact))
        }
        Hom::Log => {
            let p = p.clone();
            let interval = interval.clone();
            let cache: Arc<std::sync::Mutex<HashMap<u64, Result<bool>>>> = Default::default();
            let member: Membership = Arc::new(move |x: &BigInt| {
                if x < &BigInt::one() {
                    return Ok(false);
                }
                let n = x.to_u64().ok_or_else(|| Error::OutOfRange {
                    set: "level set domain".into(),
                    value: x.clone(),
                    lo: BigInt::one(),
                    hi: BigInt::from(u64::MAX),
                })?;
                if let Some(r) = cache.lock().expect("cache").get(&n) {
                    return r.clone();
                }
                let v = p.eval(&HpReal::ln_int(n)?);
                let r = interval.contains_frac(&v, &|| format!("p(log {n})"));
                let mut c = cache.lock().expect("cache");
                if c.len() < 1 << 16 {
                    c.insert(n, r.clone());
                }
                r
            });
            let en = scan_enumerator(member.clone(), 1);
            Ok(LazySet::new(descr, member).with_enumerator(en, Exactness::Exact))
        }
    }
}

/// `{n >= 1 : ‖n x‖ > eps/2}`.
pub fn dirichlet_avoider(x: &HpReal, eps: &HpReal) -> Result<LazySet> {
    if eps.cmp_centre(&HpReal::zero()).is_le() || eps.cmp_centre(&HpReal::from_int(1)).is_ge() {
        return Err(Error::InvalidArgument("eps must lie in (0, 1)".into()));
    }
    let half = eps.div_int(&BigInt::from(2))?;
    let xv = x.clone();
    let member: Membership = Arc::new(move |n: &BigInt| {
        if n < &BigInt::one() {
            return Ok(false);
        }
        let d = xv.mul_int(n).dist_to_int();
        let diff = d.mantissa() - half.mantissa();
        if !(d.is_exact() && half.is_exact()) {
            let radius = band().max(d.err_ulps() + half.err_ulps());
            if diff.magnitude() <= &radius {
                return Err(Error::BoundaryAmbiguity { what: format!("‖{n}·x‖"), band: "2^-64".into() });
            }
        }
        Ok(diff > BigInt::zero())
    });
    let en = scan_enumerator(member.clone(), 1);
    Ok(LazySet::new(format!("dirichlet(x={}, eps={})", x.to_f64(), eps.to_f64()), member)
        .with_enumerator(en, Exactness::Exact))
}

const MIXED_LEVELS: u32 = 12;

fn mixed_member(n: &BigInt) -> bool {
    if n < &BigInt::one() {
        return false;
    }
    if (n % 4u32) == BigInt::from(2) {
        return true;
    }
    let allowed: BigUint = (1..=MIXED_LEVELS).fold(BigUint::zero(), |acc, i| acc | (BigUint::one() << (1u64 << i)));
    let m = n.magnitude();
    (m & &allowed) == *m
}

/// `(4ℕ − 2) ∪ FS(2^{2^i})_{1 <= i <= 12}`.
pub fn intro_mixed_set() -> LazySet {
    let member: Membership = Arc::new(|n: &BigInt| Ok(mixed_member(n)));
    let enumerate: Enumerator = Arc::new(|bound: &BigInt| {
        let top = bound.to_u64().unwrap_or(u64::MAX);
        let cap = 1u64 << 24;
        if top / 4 > cap {
            return Err(Error::BudgetExceeded(format!("{bound} / 4 elements")));
        }
        let mut out: Vec<BigInt> = (1..).map(|k: u64| BigInt::from(4 * k - 2)).take_while(|x| x <= bound).collect();
        let powers: Vec<BigInt> = (1..=MIXED_LEVELS).map(|i| BigInt::one() << (1u64 << i)).collect();
        for mask in 1u32..(1 << MIXED_LEVELS) {
            let s: BigInt = (0..MIXED_LEVELS as usize).filter(|i| mask >> i & 1 == 1).map(|i| &powers[i]).sum();
            if &s <= bound && (&s % 4u32) != BigInt::from(2) {
                out.push(s);
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    });
    LazySet::new("intro_mixed", member).with_enumerator(enumerate, Exactness::Exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundset::Set;

    fn interval(a: &str, b: &str) -> HalfOpen {
        HalfOpen::new(HpReal::parse(a).unwrap(), HpReal::parse(b).unwrap()).unwrap()
    }

    #[test]
    fn half_omega_is_even_omega() {
        let p = Poly::parse("0,1/2").unwrap();
        let a = level_set(&p, Hom::Omega, &interval("0", "1/2")).unwrap();
        let n = 1_000_000u32;
        let en = a.enumerate_upto(&BigInt::from(n)).unwrap();
        // independent parity sieve by repeated division
        let mut parity = vec![0u8; n as usize + 1];
        let mut rest: Vec<u32> = (0..=n).collect();
        for q in 2..=n {
            if rest[q as usize] == q && crate::arithfun::is_prime_u64(q as u64) {
                let mut pk = q as u64;
                while pk <= n as u64 {
                    for m in (pk..=n as u64).step_by(pk as usize) {
                        parity[m as usize] ^= 1;
                        rest[m as usize] /= q;
                    }
                    pk *= q as u64;
                }
            }
        }
        let expect: Vec<BigInt> = (1..=n).filter(|&m| parity[m as usize] == 0).map(BigInt::from).collect();
        assert_eq!(en, expect);
        assert!(a.contains(&BigInt::from(12)).is_ok_and(|b| !b));
        assert!(a.contains(&BigInt::from(4)).unwrap());
    }

    #[test]
    fn sqrt2_omega_quarter() {
        let p = Poly::parse("0,sqrt(2)").unwrap();
        let a = level_set(&p, Hom::Omega, &interval("0", "1/4")).unwrap();
        assert!(!a.contains(&BigInt::from(2)).unwrap());
        // Ω = 0 gives {0} = 0
        assert!(a.contains(&BigInt::from(1)).unwrap());
        // {√2·3} ≈ 0.2426
        assert!(a.contains(&BigInt::from(8)).unwrap());
    }

    #[test]
    fn boundary_band_fails_loudly() {
        // {1 · (1/4 + 2^-100)} is within the band of 1/4
        let c = HpReal::parse("1/4").unwrap().add(&HpReal::from_parts(BigInt::one() << (FRAC_BITS - 100), BigUint::one()));
        let p = Poly::new(vec![HpReal::zero(), c]);
        let a = level_set(&p, Hom::Omega, &interval("0", "1/4")).unwrap();
        assert!(matches!(a.contains(&BigInt::from(2)), Err(Error::BoundaryAmbiguity { .. })));
        assert!(a.contains(&BigInt::from(1)).unwrap());
    }

    #[test]
    fn log_levels_of_powers_of_ten() {
        let p = Poly::parse("0,1").unwrap();
        let a = level_set(&p, Hom::Log, &interval("0", "0.1")).unwrap();
        let got: Vec<bool> = (0..6).map(|k| a.contains(&BigInt::from(10u64.pow(k))).unwrap()).collect();
        let expect: Vec<bool> = (0..6).map(|k| (k as f64 * 10f64.ln()).fract() < 0.1).collect();
        assert_eq!(got, expect);
        assert!(a.contains(&BigInt::one()).unwrap());
    }

    #[test]
    fn nu2_levels() {
        let p = Poly::parse("0,1/2").unwrap();
        let a = level_set(&p, Hom::Nu(2), &interval("1/2", "1")).unwrap();
        let en = a.enumerate_upto(&BigInt::from(40)).unwrap();
        let expect: Vec<BigInt> = (1..=40u64).filter(|n| n.trailing_zeros() % 2 == 1).map(BigInt::from).collect();
        assert_eq!(en, expect);
    }

    #[test]
    fn dirichlet_examples() {
        let a = dirichlet_avoider(&HpReal::parse("1/2").unwrap(), &HpReal::parse("0.4").unwrap()).unwrap();
        let en = a.enumerate_upto(&BigInt::from(20)).unwrap();
        assert_eq!(en, (1..=20).step_by(2).map(BigInt::from).collect::<Vec<_>>());
        let b = dirichlet_avoider(&HpReal::sqrt_int(2), &HpReal::parse("1/3").unwrap()).unwrap();
        let count = b.enumerate_upto(&BigInt::from(10_000)).unwrap().len() as f64;
        assert!((count / 10_000.0 - 2.0 / 3.0).abs() < 0.02, "{count}");
    }

    #[test]
    fn mixed_set() {
        let a = intro_mixed_set();
        for (n, m) in [(2, true), (20, true), (8, false), (4, true), (16, true), (6, true), (12, false), (0, false)] {
            assert_eq!(a.contains(&BigInt::from(n)).unwrap(), m, "{n}");
        }
        let en = a.enumerate_upto(&BigInt::from(300)).unwrap();
        let brute: Vec<BigInt> = (1..=300).filter(|&n| a.contains(&BigInt::from(n)).unwrap()).map(BigInt::from).collect();
        assert_eq!(en, brute);
        let huge = BigInt::one() << 4096u32;
        assert!(a.contains(&huge).unwrap());
        assert!(!a.contains(&(huge + 1)).unwrap());
    }
}
