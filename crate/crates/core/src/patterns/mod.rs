//! Finders for arithmetic and geometric progressions, generalized APs,
//! geometric cubes, geo-arithmetic configurations, FS/FP tables and
//! combinatorial lines.

mod hj;

pub use hj::{find_combinatorial_line, word_index, VariableWord, MAX_HJ_WORDS};

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::groundset::{members_in, GroundStructure, Set};

pub const MAX_AP_WINDOW: u64 = 1 << 22;
pub const MAX_CUBE_POINTS: u64 = 1 << 20;
pub const MAX_FS_RANK: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApCert {
    pub start: String,
    pub step: String,
    pub length: u64,
}

impl ApCert {
    pub fn certificate(&self) -> Certificate {
        Certificate::Ap {
            start: self.start.parse().expect("decimal"),
            step: self.step.parse().expect("decimal"),
            length: self.length,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GpCert {
    pub start: String,
    pub ratio: String,
    pub length: u64,
}

impl GpCert {
    pub fn certificate(&self) -> Certificate {
        Certificate::Gp {
            start: self.start.parse().expect("decimal"),
            ratio: self.ratio.parse().expect("decimal"),
            length: self.length,
        }
    }
}

fn bounded_members(a: &dyn Set, lo: &BigInt, hi: &BigInt) -> Result<Vec<BigInt>> {
    let span = (hi - lo).to_u64().unwrap_or(u64::MAX);
    if !a.is_exactly_enumerable() && span > MAX_AP_WINDOW {
        return Err(Error::WindowTooLarge { size: span, cap: MAX_AP_WINDOW });
    }
    let m = members_in(a, lo, hi)?;
    if m.len() as u64 > MAX_AP_WINDOW {
        return Err(Error::WindowTooLarge { size: m.len() as u64, cap: MAX_AP_WINDOW });
    }
    Ok(m)
}

/// Longest AP inside sorted offsets (bitmap membership). Ties: start asc,
/// then step asc.
fn longest_ap_offsets(offs: &[u64], span: u64) -> (u64, u64, u64) {
    let words = span.div_ceil(64) as usize;
    let mut bits = vec![0u64; words.max(1)];
    for &o in offs {
        bits[(o / 64) as usize] |= 1 << (o % 64);
    }
    let has = |x: u64| x < span && bits[(x / 64) as usize] >> (x % 64) & 1 == 1;
    let (mut bs, mut bd, mut bl) = (offs[0], 1u64, 1u64);
    let max = *offs.last().expect("non-empty");
    for (i, &x) in offs.iter().enumerate() {
        if bl >= 2 && x + bl > max {
            // even step 1 cannot beat the record from here on
            break;
        }
        for &y in &offs[i + 1..] {
            let d = y - x;
            // to beat bl we need x + bl*d <= max
            match bl.checked_mul(d).and_then(|v| v.checked_add(x)) {
                Some(v) if v <= max => {}
                _ => break,
            }
            if x >= d && has(x - d) {
                continue;
            }
            let mut len = 2;
            let mut z = y + d;
            while has(z) {
                len += 1;
                z += d;
            }
            if len > bl {
                (bs, bd, bl) = (x, d, len);
            }
        }
    }
    (bs, bd, bl)
}

fn longest_ap_big(members: &[BigInt]) -> (BigInt, BigInt, u64) {
    let set: HashSet<&BigInt> = members.iter().collect();
    let (mut bs, mut bd, mut bl) = (members[0].clone(), BigInt::one(), 1u64);
    let max = members.last().expect("non-empty");
    for (i, x) in members.iter().enumerate() {
        for y in &members[i + 1..] {
            let d = y - x;
            if x + &d * bl > *max {
                break;
            }
            if set.contains(&(x - &d)) {
                continue;
            }
            let mut len = 2;
            let mut z = y + &d;
            while set.contains(&z) {
                len += 1;
                z += &d;
            }
            if len > bl {
                (bs, bd, bl) = (x.clone(), d, len);
            }
        }
    }
    (bs, bd, bl)
}

/// Longest AP in `A ∩ [lo, hi)`; among the longest, least start then least
/// step. `None` when the set is empty there or the best is below `min_len`.
pub fn longest_ap(a: &dyn Set, lo: &BigInt, hi: &BigInt, min_len: u64) -> Result<Option<ApCert>> {
    let members = bounded_members(a, lo, hi)?;
    if members.is_empty() {
        return Ok(None);
    }
    let span = (hi - lo).to_u64();
    let (s, d, l) = match span {
        Some(span) if span <= 1 << 30 => {
            let offs: Vec<u64> = members.iter().map(|m| (m - lo).to_u64().expect("in window")).collect();
            let (s, d, l) = longest_ap_offsets(&offs, span);
            (lo + BigInt::from(s), BigInt::from(d), l)
        }
        _ => longest_ap_big(&members),
    };
    Ok((l >= min_len).then(|| ApCert { start: s.to_string(), step: d.to_string(), length: l }))
}

/// Longest GP with integer ratio `>= 2` in `A ∩ [lo, hi)`; ties broken by
/// least start, then least ratio.
pub fn longest_gp(a: &dyn Set, lo: &BigInt, hi: &BigInt) -> Result<Option<GpCert>> {
    let members = bounded_members(a, lo, hi)?;
    let positive: Vec<&BigInt> = members.iter().filter(|m| m.is_positive()).collect();
    if positive.is_empty() {
        return Ok(None);
    }
    let set: HashSet<&BigInt> = positive.iter().copied().collect();
    let max = *positive.last().expect("non-empty");
    let (mut bs, mut br, mut bl) = (positive[0].clone(), BigInt::from(2), 1u64);
    for (i, &x) in positive.iter().enumerate() {
        // beating bl needs x·r^bl <= max
        let r_max = (max / x).nth_root(bl as u32);
        if r_max < BigInt::from(2) {
            continue;
        }
        let later = &positive[i + 1..];
        let ratios: Vec<BigInt> = if r_max.clone() - 1 <= BigInt::from(later.len()) {
            let top = r_max.to_u64().expect("small");
            (2..=top).map(BigInt::from).filter(|r| set.contains(&(x * r))).collect()
        } else {
            later.iter().filter(|y| (**y % x).is_zero()).map(|y| *y / x).filter(|r| r >= &BigInt::from(2) && r <= &r_max).collect()
        };
        for r in ratios {
            if x * num_traits::pow(r.clone(), bl as usize) > *max {
                break;
            }
            if (x % &r).is_zero() && set.contains(&(x / &r)) {
                continue;
            }
            let mut len = 2;
            let mut z = x * &r * &r;
            while set.contains(&z) {
                len += 1;
                z *= &r;
            }
            if len > bl {
                (bs, br, bl) = (x.clone(), r, len);
            }
        }
    }
    Ok(Some(GpCert { start: bs.to_string(), ratio: br.to_string(), length: bl }))
}

fn member_or_absent(a: &dyn Set, x: &BigInt) -> Result<bool> {
    match a.contains(x) {
        Ok(b) => Ok(b),
        Err(Error::OutOfRange { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Search pools for the cube/configuration finders.
#[derive(Debug, Clone)]
pub struct Pools {
    pub s: Vec<BigInt>,
    pub d: Vec<BigInt>,
}

impl Pools {
    /// Both pools drawn from `A ∩ [1, bound]`, the default.
    pub fn from_set(a: &dyn Set, bound: u64) -> Result<Self> {
        let m = members_in(a, &BigInt::one(), &BigInt::from(bound + 1))?;
        Ok(Self { s: m.clone(), d: m })
    }
}

fn cube_points(n: u32, m: usize) -> Result<u64> {
    let pts = (n as u64).checked_pow(m as u32).filter(|&p| p <= MAX_CUBE_POINTS);
    pts.ok_or_else(|| Error::InvalidArgument(format!("n^m = {n}^{m} exceeds 2^20")))
}

/// Odometer over `[1, n]^m`.
fn for_each_exponent(n: u32, m: usize, mut f: impl FnMut(&[u32]) -> bool) -> bool {
    let mut j = vec![1u32; m];
    loop {
        if !f(&j) {
            return false;
        }
        let mut i = 0;
        loop {
            if i == m {
                return true;
            }
            if j[i] < n {
                j[i] += 1;
                break;
            }
            j[i] = 1;
            i += 1;
        }
    }
}

/// Lexicographically least `(s, d_1..d_m)` from the pools with every point
/// of the cube in `A`.
fn cube_search(
    a: &dyn Set,
    n: u32,
    m: usize,
    pools: &Pools,
    point: impl Fn(&BigInt, &[BigInt], &[u32]) -> BigInt + Sync,
) -> Result<Option<(BigInt, Vec<BigInt>)>> {
    cube_points(n, m)?;
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let found = crate::par::find_first(pools.s.clone(), |s| {
        let mut idx = vec![0usize; m];
        if pools.d.is_empty() {
            return None;
        }
        loop {
            let d: Vec<BigInt> = idx.iter().map(|&i| pools.d[i].clone()).collect();
            let mut err = None;
            let ok = for_each_exponent(n, m, |j| match member_or_absent(a, &point(&s, &d, j)) {
                Ok(b) => b,
                Err(e) => {
                    err = Some(e);
                    false
                }
            });
            if let Some(e) = err {
                return Some(Err(e));
            }
            if ok {
                return Some(Ok((s, d)));
            }
            // advance last coordinate fastest (lexicographic order)
            let mut k = m;
            loop {
                if k == 0 {
                    return None;
                }
                k -= 1;
                if idx[k] + 1 < pools.d.len() {
                    idx[k] += 1;
                    for t in idx.iter_mut().skip(k + 1) {
                        *t = 0;
                    }
                    break;
                }
            }
        }
    });
    found.transpose()
}

/// `s + Σ j_i d_i ∈ A` for all `j ∈ [1, n]^m`.
pub fn find_generalized_ap(a: &dyn Set, n: u32, m: usize, pools: &Pools) -> Result<Option<Certificate>> {
    let r = cube_search(a, n, m, pools, |s, d, j| {
        let mut v = s.clone();
        for (di, &ji) in d.iter().zip(j) {
            v += di * ji;
        }
        v
    })?;
    Ok(r.map(|(s, d)| Certificate::GenAp { n, s, d }))
}

/// `s · Π d_i^{j_i} ∈ A` for all `j ∈ [1, n]^m`; ratios below 2 are skipped.
pub fn find_geometric_cube(a: &dyn Set, n: u32, m: usize, pools: &Pools) -> Result<Option<Certificate>> {
    let pools = Pools { s: pools.s.clone(), d: pools.d.iter().filter(|d| **d >= BigInt::from(2)).cloned().collect() };
    let r = cube_search(a, n, m, &pools, |s, d, j| {
        let mut v = s.clone();
        for (di, &ji) in d.iter().zip(j) {
            v *= di.pow(ji);
        }
        v
    })?;
    Ok(r.map(|(s, d)| Certificate::GeoCube { n, s, d }))
}

/// Pools for [`find_geo_arithmetic`].
#[derive(Debug, Clone)]
pub struct GeoArithPools {
    pub c: Vec<BigInt>,
    pub a: Vec<BigInt>,
    pub d: Vec<BigInt>,
}

impl GeoArithPools {
    /// `c` from `A ∩ [1, bound]`, `a` and `d` from `[1, bound]`.
    pub fn default_for(set: &dyn Set, bound: u64) -> Result<Self> {
        let c = members_in(set, &BigInt::one(), &BigInt::from(bound + 1))?;
        let all: Vec<BigInt> = (1..=bound).map(BigInt::from).collect();
        Ok(Self { c, a: all.clone(), d: all })
    }
}

/// Lexicographically least `(c, a, d)` with `c (a + i d)^j ∈ A` for all
/// `1 <= i, j <= n`.
pub fn find_geo_arithmetic(set: &dyn Set, n: u32, pools: &GeoArithPools) -> Result<Option<Certificate>> {
    if n == 0 || (n as u64) * (n as u64) > MAX_CUBE_POINTS {
        return Err(Error::InvalidArgument(format!("n = {n} out of range")));
    }
    let found = crate::par::find_first(pools.c.clone(), |c| {
        for a in &pools.a {
            for d in &pools.d {
                let mut ok = true;
                'grid: for i in 1..=n {
                    let base = a + d * i;
                    let mut v = c.clone();
                    for _ in 1..=n {
                        v *= &base;
                        match member_or_absent(set, &v) {
                            Ok(true) => {}
                            Ok(false) => {
                                ok = false;
                                break 'grid;
                            }
                            Err(e) => return Some(Err(e)),
                        }
                    }
                }
                if ok {
                    return Some(Ok(Certificate::GeoArith { n, c: c.clone(), a: a.clone(), d: d.clone() }));
                }
            }
        }
        None
    });
    found.transpose()
}

/// All finite sums (or products) of a generator list.
#[derive(Debug, Clone, Serialize)]
pub struct FsTable {
    /// `(α, s_α)` in bitmask order, `α` 1-based and increasing.
    pub entries: Vec<(Vec<usize>, String)>,
    /// Values hit by more than one `α`, with every such `α`.
    pub duplicates: Vec<(String, Vec<Vec<usize>>)>,
}

pub fn fs_fp_enumerate(generators: &[BigInt], g: &GroundStructure) -> Result<FsTable> {
    let r = generators.len();
    if r == 0 {
        return Err(Error::InvalidArgument("no generators".into()));
    }
    if r > MAX_FS_RANK {
        return Err(Error::RankTooLarge { r, cap: MAX_FS_RANK });
    }
    let mut vals: Vec<BigInt> = Vec::with_capacity(1 << r);
    vals.push(g.identity());
    let mut entries = Vec::with_capacity((1 << r) - 1);
    let mut seen: HashMap<BigInt, Vec<usize>> = HashMap::new();
    for mask in 1usize..(1 << r) {
        let top = (usize::BITS - 1 - mask.leading_zeros()) as usize;
        let rest = mask & !(1 << top);
        let v = if rest == 0 { generators[top].clone() } else { g.op(&vals[rest], &generators[top])? };
        seen.entry(v.clone()).or_default().push(mask);
        vals.push(v);
    }
    let alpha = |mask: usize| (0..r).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect::<Vec<_>>();
    for (mask, v) in vals.iter().enumerate().skip(1) {
        entries.push((alpha(mask), v.to_string()));
    }
    let mut duplicates: Vec<(BigInt, Vec<Vec<usize>>)> = seen
        .into_iter()
        .filter(|(_, ms)| ms.len() > 1)
        .map(|(v, ms)| (v, ms.into_iter().map(alpha).collect()))
        .collect();
    duplicates.sort();
    Ok(FsTable { entries, duplicates: duplicates.into_iter().map(|(v, a)| (v.to_string(), a)).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundset::{IntegerWindowSet, LazySet};
    use std::sync::Arc;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn window(lo: i64, hi: i64, f: impl Fn(i64) -> bool) -> IntegerWindowSet {
        IntegerWindowSet::from_predicate(BigInt::from(lo), BigInt::from(hi), f).unwrap()
    }

    fn lazy(f: impl Fn(&BigInt) -> bool + Send + Sync + 'static) -> LazySet {
        LazySet::new("t", Arc::new(move |x: &BigInt| Ok(f(x))))
    }

    fn ap_oracle(members: &[i64]) -> (i64, i64, u64) {
        let set: HashSet<i64> = members.iter().copied().collect();
        let mut best = (members[0], 1i64, 1u64);
        for &s in members {
            for d in 1..=(members[members.len() - 1] - s).max(1) {
                let mut l = 0u64;
                while set.contains(&(s + d * l as i64)) {
                    l += 1;
                }
                let cand = (s, d, l);
                if l > best.2 || (l == best.2 && (s, d) < (best.0, best.1)) {
                    best = cand;
                }
            }
        }
        best
    }

    #[test]
    fn ap_examples() {
        let w = window(0, 10, |x| [1, 3, 5, 7].contains(&x));
        let c = longest_ap(&w, &BigInt::from(0), &BigInt::from(10), 1).unwrap().unwrap();
        assert_eq!((c.start.as_str(), c.step.as_str(), c.length), ("1", "2", 4));
        let evens = window(0, 10_000, |x| x % 2 == 0);
        let c = longest_ap(&evens, &BigInt::from(0), &BigInt::from(10_000), 1).unwrap().unwrap();
        assert_eq!((c.start.as_str(), c.step.as_str(), c.length), ("0", "2", 5000));
        let pow2 = window(1, 1_000_001, |x| x.count_ones() == 1);
        let c = longest_ap(&pow2, &BigInt::from(1), &BigInt::from(1_000_001), 1).unwrap().unwrap();
        assert_eq!(c.length, 2);
    }

    #[test]
    fn ap_matches_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..150 {
            let p = rng.gen_range(0.05..0.7);
            let members: Vec<i64> = (0..120).filter(|_| rng.gen_bool(p)).collect();
            if members.is_empty() {
                continue;
            }
            let set: HashSet<i64> = members.iter().copied().collect();
            let w = window(0, 120, |x| set.contains(&x));
            let c = longest_ap(&w, &BigInt::from(0), &BigInt::from(120), 1).unwrap().unwrap();
            let (s, d, l) = ap_oracle(&members);
            assert_eq!((c.start, c.step, c.length), (s.to_string(), d.to_string(), l), "{members:?}");
            let big = longest_ap_big(&ints(&members));
            assert_eq!((big.0, big.1, big.2), (BigInt::from(s), BigInt::from(d), l));
        }
    }

    #[test]
    fn ap_union_monotone() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let a: HashSet<i64> = (0..200).filter(|_| rng.gen_bool(0.2)).collect();
            let b: HashSet<i64> = (0..200).filter(|_| rng.gen_bool(0.2)).collect();
            let len = |f: &dyn Fn(i64) -> bool| {
                let w = window(0, 200, f);
                longest_ap(&w, &BigInt::from(0), &BigInt::from(200), 1).unwrap().map_or(0, |c| c.length)
            };
            let la = len(&|x| a.contains(&x));
            let lb = len(&|x| b.contains(&x));
            let lu = len(&|x| a.contains(&x) || b.contains(&x));
            assert!(lu >= la.max(lb));
        }
    }

    #[test]
    fn window_cap() {
        let n = lazy(|_| true);
        assert!(matches!(
            longest_ap(&n, &BigInt::from(0), &BigInt::from(MAX_AP_WINDOW + 1), 1),
            Err(Error::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn gp_examples() {
        let w = window(0, 30, |x| [3, 6, 12, 24].contains(&x));
        let c = longest_gp(&w, &BigInt::from(0), &BigInt::from(30)).unwrap().unwrap();
        assert_eq!((c.start.as_str(), c.ratio.as_str(), c.length), ("3", "2", 4));
        let odds = window(1, 100_001, |x| x % 2 == 1);
        let c = longest_gp(&odds, &BigInt::from(1), &BigInt::from(100_001)).unwrap().unwrap();
        assert_eq!((c.start.as_str(), c.ratio.as_str(), c.length), ("1", "3", 11));
    }

    #[test]
    fn gp_matches_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let members: Vec<i64> = (1..300).filter(|_| rng.gen_bool(0.3)).collect();
            if members.is_empty() {
                continue;
            }
            let set: HashSet<i64> = members.iter().copied().collect();
            let mut best = (members[0], 2i64, 1u64);
            for &s in &members {
                for r in 2..300 {
                    let mut l = 0;
                    let mut z = s;
                    while set.contains(&z) {
                        l += 1;
                        z *= r;
                    }
                    if l > best.2 {
                        best = (s, r, l);
                    }
                }
            }
            let w = window(0, 300, |x| set.contains(&x));
            let c = longest_gp(&w, &BigInt::from(0), &BigInt::from(300)).unwrap().unwrap();
            assert_eq!((c.start, c.ratio, c.length), (best.0.to_string(), best.1.to_string(), best.2));
        }
    }

    #[test]
    fn generalized_aps() {
        let nat = lazy(|x| x >= &BigInt::one());
        let pools = Pools { s: ints(&[1, 2, 3]), d: ints(&[1, 2, 3]) };
        let c = find_generalized_ap(&nat, 3, 2, &pools).unwrap().unwrap();
        assert_eq!(c, Certificate::GenAp { n: 3, s: BigInt::from(1), d: ints(&[1, 1]) });
        let evens = lazy(|x| (x % 2i32).is_zero() && x.is_positive());
        let pools = Pools::from_set(&evens, 20).unwrap();
        let c = find_generalized_ap(&evens, 2, 2, &pools).unwrap().unwrap();
        assert_eq!(c, Certificate::GenAp { n: 2, s: BigInt::from(2), d: ints(&[2, 2]) });
    }

    #[test]
    fn geometric_cubes() {
        let evens = lazy(|x| (x % 2i32).is_zero() && x.is_positive());
        let pools = Pools::from_set(&evens, 20).unwrap();
        let c = find_geometric_cube(&evens, 2, 2, &pools).unwrap().unwrap();
        assert_eq!(c, Certificate::GeoCube { n: 2, s: BigInt::from(2), d: ints(&[2, 2]) });
    }

    #[test]
    fn geo_arithmetic() {
        let nat = lazy(|x| x >= &BigInt::one());
        let p = GeoArithPools::default_for(&nat, 10).unwrap();
        let c = find_geo_arithmetic(&nat, 3, &p).unwrap().unwrap();
        assert_eq!(c, Certificate::GeoArith { n: 3, c: BigInt::from(1), a: BigInt::from(1), d: BigInt::from(1) });
        let fours = lazy(|x| (x % 4i32).is_zero() && x.is_positive());
        let p = GeoArithPools::default_for(&fours, 10).unwrap();
        let c = find_geo_arithmetic(&fours, 2, &p).unwrap().unwrap();
        assert_eq!(c, Certificate::GeoArith { n: 2, c: BigInt::from(4), a: BigInt::from(1), d: BigInt::from(1) });
    }

    #[test]
    fn fs_tables() {
        let add = GroundStructure::naturals_add();
        let t = fs_fp_enumerate(&ints(&[1, 2, 4]), &add).unwrap();
        let vals: Vec<&str> = t.entries.iter().map(|e| e.1.as_str()).collect();
        assert_eq!(vals, vec!["1", "2", "3", "4", "5", "6", "7"]);
        assert!(t.duplicates.is_empty());
        let t = fs_fp_enumerate(&ints(&[2, 2]), &add).unwrap();
        assert_eq!(t.duplicates, vec![("2".to_string(), vec![vec![1], vec![2]])]);
        let t = fs_fp_enumerate(&ints(&[4, 16, 256]), &add).unwrap();
        let vals: Vec<&str> = t.entries.iter().map(|e| e.1.as_str()).collect();
        assert_eq!(vals, vec!["4", "16", "20", "256", "260", "272", "276"]);
        for r in 1..=6 {
            let same = vec![BigInt::from(3); r];
            let t = fs_fp_enumerate(&same, &add).unwrap();
            let vs: HashSet<String> = t.entries.iter().map(|e| e.1.clone()).collect();
            assert_eq!(vs, (1..=r as i64).map(|k| (3 * k).to_string()).collect());
            let t = fs_fp_enumerate(&same, &GroundStructure::naturals_mul()).unwrap();
            let vs: HashSet<String> = t.entries.iter().map(|e| e.1.clone()).collect();
            assert_eq!(vs, (1..=r as u32).map(|k| 3i64.pow(k).to_string()).collect());
        }
        assert!(fs_fp_enumerate(&vec![BigInt::one(); 25], &add).is_err());
    }
}
