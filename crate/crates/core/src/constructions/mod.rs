//! Exact generators for the explicit sets: separated thick blocks, divisible
//! unions, finitely generated multiplicative semigroups, level sets of
//! arithmetic functions, Dirichlet avoiders and the mixed introductory set,
//! plus the product-matrix α-selection.

mod alpha;
mod levels;

pub use alpha::{alpha_no_3ap, has_nonconstant_3ap, product_ap_violations, AlphaOutcome};
pub use levels::{dirichlet_avoider, intro_mixed_set, level_set, Hom, HalfOpen, BOUNDARY_BAND_BITS};

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groundset::{Enumerator, Exactness, LazySet, Membership};

/// Bit length up to which symbolic values are materialized.
pub const MATERIALIZE_BITS: u64 = 1 << 24;

/// `base^exponent`, kept symbolic until it is needed as an integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExpExpr {
    pub base: u64,
    #[serde(serialize_with = "ser_big")]
    pub exponent: BigUint,
}

fn ser_big<S: serde::Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

impl ExpExpr {
    pub fn new(base: u64, exponent: impl Into<BigUint>) -> Self {
        Self { base, exponent: exponent.into() }
    }

    /// Exact `log2` when the base is a power of two.
    pub fn log2_exact(&self) -> Option<BigUint> {
        (self.base.is_power_of_two() && self.base > 1).then(|| &self.exponent * self.base.trailing_zeros())
    }

    /// Bit length of the value, when it can be stated without materializing.
    pub fn bits(&self) -> Option<BigUint> {
        self.log2_exact().map(|l| l + 1u32)
    }

    pub fn materialize(&self) -> Result<BigInt> {
        let est = (64 - self.base.leading_zeros()) as f64 * self.exponent.to_f64().unwrap_or(f64::INFINITY);
        if est > MATERIALIZE_BITS as f64 {
            return Err(Error::InvalidArgument(format!(
                "{}^{} has more than 2^24 bits",
                self.base, self.exponent
            )));
        }
        let e = self.exponent.to_u32().expect("bounded");
        Ok(BigInt::from(self.base).pow(e))
    }
}

/// One named hypothesis check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub construction: String,
    pub checks: Vec<Check>,
}

impl HypothesisReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

fn sorted_enumerator(elements: Arc<Vec<BigInt>>) -> Enumerator {
    Arc::new(move |bound: &BigInt| {
        let end = elements.partition_point(|x| x <= bound);
        Ok(elements[..end].to_vec())
    })
}

pub const MAX_THICK_BLOCKS: u32 = 6;

/// Blocks `[x_n, y_n]` with `x_n = 4^{4^n}` and `y_n = x_n + n`.
#[derive(Debug, Clone)]
pub struct ThickBlocks {
    pub i_max: u32,
    pub x: Vec<ExpExpr>,
    x_val: Vec<BigInt>,
}

impl ThickBlocks {
    pub fn new(i_max: u32) -> Result<Self> {
        if i_max == 0 || i_max > MAX_THICK_BLOCKS {
            return Err(Error::InvalidArgument(format!("i_max must be in 1..={MAX_THICK_BLOCKS}")));
        }
        let x: Vec<ExpExpr> = (1..=i_max).map(|n| ExpExpr::new(4, BigUint::from(4u32).pow(n))).collect();
        let x_val = x.iter().map(|e| e.materialize()).collect::<Result<Vec<_>>>()?;
        Ok(Self { i_max, x, x_val })
    }

    pub fn x(&self, n: u32) -> &BigInt {
        &self.x_val[n as usize - 1]
    }

    pub fn y(&self, n: u32) -> BigInt {
        self.x(n) + n
    }

    pub fn elements(&self) -> Vec<BigInt> {
        (1..=self.i_max).flat_map(|n| (0..=n).map(move |j| self.x(n) + j)).collect()
    }

    /// `max(y_n/2, y_{n−1}²) < x_n < y_n` for every block, decided on
    /// exponents: with `L_n = log2 x_n = 2·4^n` exactly and `y_n <= 2 x_n`
    /// (as `n < x_n`), `y_{n−1}² < 2^{2 L_{n−1} + 2} <= 2^{L_n}`.
    pub fn growth_report(&self) -> HypothesisReport {
        let mut checks = Vec::new();
        for n in 1..=self.i_max {
            let ln = self.x[n as usize - 1].log2_exact().expect("base 4");
            // n < x_n gives y_n < 2 x_n, i.e. y_n / 2 < x_n
            let n_small = BigUint::from(n).bits() as u64 <= 64 && BigUint::from(n.max(1)).bits() < ln.to_u64().unwrap_or(u64::MAX);
            let prev_ok = if n == 1 {
                true
            } else {
                let lp = self.x[n as usize - 2].log2_exact().expect("base 4");
                // y_{n-1} < 2^{lp + 1}, so y_{n-1}^2 < 2^{2 lp + 2}
                BigUint::from(2u32) * lp + 2u32 <= ln
            };
            checks.push(Check {
                name: format!("block {n}: max(y_n/2, y_(n-1)^2) < x_n < y_n"),
                holds: n_small && prev_ok,
                detail: format!("log2 x_{n} = {ln}"),
            });
        }
        HypothesisReport { construction: format!("thick_no_kxy(i_max={})", self.i_max), checks }
    }
}

/// Union of the blocks `[4^{4^n}, 4^{4^n} + n]`, `n = 1..=i_max`.
pub fn thick_no_kxy(i_max: u32) -> Result<(LazySet, ThickBlocks)> {
    let blocks = ThickBlocks::new(i_max)?;
    let b = blocks.clone();
    let member: Membership = Arc::new(move |q: &BigInt| {
        if !q.is_positive() {
            return Ok(false);
        }
        let bits = q.bits();
        for n in 1..=b.i_max {
            // compare bit lengths before touching the big values
            if b.x[n as usize - 1].bits().and_then(|v| v.to_u64()) != Some(bits) {
                continue;
            }
            let off = q - b.x(n);
            return Ok(!off.is_negative() && off <= BigInt::from(n));
        }
        Ok(false)
    });
    let elements = Arc::new(blocks.elements());
    let set = LazySet::new(format!("thick_no_kxy(i_max={i_max})"), member)
        .with_enumerator(sorted_enumerator(elements), Exactness::Exact);
    Ok((set, blocks))
}

/// A pattern `{kx, ky, kxy}` with `k >= 1`, `x, y >= 2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KxyPattern {
    pub k: String,
    pub x: String,
    pub y: String,
}

/// Scans all `(u, v, w) ∈ A³` for `u = kx`, `v = ky`, `w = kxy`: this forces
/// `k = uv / w`, which must divide both `u` and `v` with cofactors `>= 2`.
pub fn find_kxy(elements: &[BigInt]) -> Option<KxyPattern> {
    let items: Vec<(usize, usize)> = (0..elements.len()).flat_map(|i| (i..elements.len()).map(move |j| (i, j))).collect();
    crate::par::find_first(items, |(i, j)| {
        let (u, v) = (&elements[i], &elements[j]);
        let uv = u * v;
        for w in elements {
            if w.is_zero() {
                continue;
            }
            let (k, r) = uv.div_rem(w);
            if !r.is_zero() || !k.is_positive() {
                continue;
            }
            if (u % &k).is_zero() && (v % &k).is_zero() {
                let (x, y) = (u / &k, v / &k);
                if x >= BigInt::from(2) && y >= BigInt::from(2) {
                    return Some(KxyPattern { k: k.to_string(), x: x.to_string(), y: y.to_string() });
                }
            }
        }
        None
    })
}

/// Sequence choices for [`divisible_union`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DSeq {
    /// `2^{2^i}`
    DoubleExp,
    /// `i!`
    Factorial,
    /// `2^i`
    Pow2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ASeq {
    /// `{1, ..., i}`
    UpTo,
    /// `{1}`
    One,
}

impl std::str::FromStr for DSeq {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double_exp" | "tower" => Ok(DSeq::DoubleExp),
            "factorial" => Ok(DSeq::Factorial),
            "pow2" => Ok(DSeq::Pow2),
            _ => Err(Error::Parse(format!("unknown d sequence {s:?}"))),
        }
    }
}

impl std::str::FromStr for ASeq {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upto" => Ok(ASeq::UpTo),
            "one" => Ok(ASeq::One),
            _ => Err(Error::Parse(format!("unknown A sequence {s:?}"))),
        }
    }
}

impl DSeq {
    pub fn term(self, i: u32) -> BigInt {
        match self {
            DSeq::DoubleExp => BigInt::one() << (1u64 << i),
            DSeq::Factorial => (1..=i).fold(BigInt::one(), |acc, k| acc * k),
            DSeq::Pow2 => BigInt::one() << i,
        }
    }
}

impl ASeq {
    pub fn term(self, i: u32) -> Vec<BigInt> {
        match self {
            ASeq::UpTo => (1..=i).map(BigInt::from).collect(),
            ASeq::One => vec![BigInt::one()],
        }
    }
}

#[derive(Debug, Clone)]
pub struct DivisibleUnion {
    pub d: Vec<BigInt>,
    pub a: Vec<Vec<BigInt>>,
    pub elements: Vec<BigInt>,
}

impl DivisibleUnion {
    pub fn from_sequences(d: DSeq, a: ASeq, i_max: u32) -> Result<Self> {
        if i_max == 0 || i_max > 16 {
            return Err(Error::InvalidArgument("i_max must be in 1..=16".into()));
        }
        Self::new((1..=i_max).map(|i| d.term(i)).collect(), (1..=i_max).map(|i| a.term(i)).collect())
    }

    pub fn new(d: Vec<BigInt>, a: Vec<Vec<BigInt>>) -> Result<Self> {
        if d.len() != a.len() || d.is_empty() {
            return Err(Error::InvalidArgument("d and A must be non-empty and of equal length".into()));
        }
        if d.iter().any(|x| !x.is_positive()) || a.iter().flatten().any(|x| !x.is_positive()) || a.iter().any(|s| s.is_empty()) {
            return Err(Error::InvalidArgument("d_i and A_i must be positive and A_i non-empty".into()));
        }
        let mut elements: Vec<BigInt> = d.iter().zip(&a).flat_map(|(di, ai)| ai.iter().map(move |x| di * x)).collect();
        elements.sort();
        elements.dedup();
        Ok(Self { d, a, elements })
    }

    pub fn set(&self) -> LazySet {
        let d = self.d.clone();
        let a = self.a.clone();
        let member: Membership = Arc::new(move |x: &BigInt| {
            for (di, ai) in d.iter().zip(&a) {
                let (q, r) = x.div_rem(di);
                if r.is_zero() && ai.contains(&q) {
                    return Ok(true);
                }
            }
            Ok(false)
        });
        LazySet::new(format!("divisible_union(i_max={})", self.d.len()), member)
            .with_enumerator(sorted_enumerator(Arc::new(self.elements.clone())), Exactness::Exact)
    }

    /// `d_{i+1} − max(∪_{j<=i} d_j A_j) − d_i max A_i` for `i = 1..i_max−1`.
    pub fn growth_terms(&self) -> Vec<BigInt> {
        let mut out = Vec::new();
        let mut running_max = BigInt::zero();
        for i in 0..self.d.len() - 1 {
            let block_max = &self.d[i] * self.a[i].iter().max().expect("non-empty");
            running_max = running_max.max(block_max.clone());
            out.push(&self.d[i + 1] - &running_max - block_max);
        }
        out
    }

    /// Positive differences `d_i A_i − ∪_{j<=i} d_j A_j` per block, and the
    /// gaps `min B_{i+1} − max B_i − 1` between consecutive blocks.
    pub fn difference_gaps(&self) -> Vec<BigInt> {
        let mut earlier: Vec<BigInt> = Vec::new();
        let mut ranges: Vec<(BigInt, BigInt)> = Vec::new();
        for (di, ai) in self.d.iter().zip(&self.a) {
            let block: Vec<BigInt> = ai.iter().map(|x| di * x).collect();
            earlier.extend(block.iter().cloned());
            let mut diffs = Vec::new();
            for x in &block {
                for y in &earlier {
                    if x > y {
                        diffs.push(x - y);
                    }
                }
            }
            if let (Some(lo), Some(hi)) = (diffs.iter().min(), diffs.iter().max()) {
                ranges.push((lo.clone(), hi.clone()));
            }
        }
        ranges.windows(2).map(|w| &w[1].0 - &w[0].1 - 1).collect()
    }

    /// Largest number of ordered pairs sharing one positive difference.
    pub fn max_difference_multiplicity(&self) -> usize {
        let mut counts: HashMap<BigInt, usize> = HashMap::new();
        for (i, x) in self.elements.iter().enumerate() {
            for y in &self.elements[..i] {
                *counts.entry(x - y).or_default() += 1;
            }
        }
        counts.values().copied().max().unwrap_or(0)
    }

    pub fn report(&self) -> HypothesisReport {
        let g = self.growth_terms();
        let increasing = g.windows(2).all(|w| w[0] < w[1]);
        let chain = self.d.windows(2).all(|w| (&w[1] % &w[0]).is_zero());
        let gaps = self.difference_gaps();
        HypothesisReport {
            construction: format!("divisible_union(i_max={})", self.d.len()),
            checks: vec![
                Check {
                    name: "growth: d_(i+1) - max(union d_j A_j) - d_i max A_i strictly increasing".into(),
                    holds: increasing,
                    detail: format!("first terms {:?}", g.iter().take(4).map(|x| x.to_string()).collect::<Vec<_>>()),
                },
                Check {
                    name: "divisibility: d_i | d_j for i <= j".into(),
                    holds: chain,
                    detail: format!("{} terms", self.d.len()),
                },
                Check {
                    name: "difference-set gaps between blocks".into(),
                    holds: true,
                    detail: format!("bit lengths {:?}", gaps.iter().map(|x| x.bits()).collect::<Vec<_>>()),
                },
            ],
        }
    }
}

/// `∪ d_i A_i` with validation report.
pub fn divisible_union(d: DSeq, a: ASeq, i_max: u32) -> Result<(LazySet, HypothesisReport, DivisibleUnion)> {
    let du = DivisibleUnion::from_sequences(d, a, i_max)?;
    Ok((du.set(), du.report(), du))
}

/// The default `∪_{i<=12} 2^{2^i} {1..i}`.
pub fn default_divisible_union() -> DivisibleUnion {
    DivisibleUnion::from_sequences(DSeq::DoubleExp, ASeq::UpTo, 12).expect("valid defaults")
}

/// Members of the multiplicative semigroup generated by `gens` that are `<= bound`.
pub fn fg_mult_semigroup(gens: &[BigInt], bound: &BigInt) -> Result<LazySet> {
    if gens.is_empty() || gens.iter().any(|g| g < &BigInt::from(2)) {
        return Err(Error::InvalidArgument("generators must be at least 2".into()));
    }
    let mut gs = gens.to_vec();
    gs.sort();
    gs.dedup();
    let elements = {
        let mut seen: BTreeSet<BigInt> = BTreeSet::new();
        let mut frontier: Vec<BigInt> = gs.iter().filter(|g| *g <= bound).cloned().collect();
        while let Some(x) = frontier.pop() {
            if !seen.insert(x.clone()) {
                continue;
            }
            for g in &gs {
                let y = &x * g;
                if &y <= bound && !seen.contains(&y) {
                    frontier.push(y);
                }
            }
            if seen.len() > 1 << 24 {
                return Err(Error::BudgetExceeded("semigroup enumeration exceeds 2^24 elements".into()));
            }
        }
        seen.into_iter().collect::<Vec<_>>()
    };
    let gm = gs.clone();
    let b = bound.clone();
    let member: Membership = Arc::new(move |x: &BigInt| {
        if x > &b || x < &BigInt::from(2) {
            return Ok(false);
        }
        let mut memo: HashMap<BigInt, bool> = HashMap::new();
        Ok(in_semigroup(x, &gm, &mut memo))
    });
    let name = format!(
        "fg({}; bound={})",
        gs.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(","),
        bound
    );
    Ok(LazySet::new(name, member).with_enumerator(sorted_enumerator(Arc::new(elements)), Exactness::Exact))
}

fn in_semigroup(x: &BigInt, gens: &[BigInt], memo: &mut HashMap<BigInt, bool>) -> bool {
    if let Some(&v) = memo.get(x) {
        return v;
    }
    let mut hit = false;
    for g in gens {
        let (q, r) = x.div_rem(g);
        if r.is_zero() && (q.is_one() || (q > BigInt::one() && in_semigroup(&q, gens, memo))) {
            hit = true;
            break;
        }
    }
    memo.insert(x.clone(), hit);
    hit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundset::Set;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn thick_blocks_membership() {
        let (a, b) = thick_no_kxy(5).unwrap();
        let x2 = BigInt::from(4).pow(16);
        assert!(a.contains(&x2).unwrap());
        assert!(a.contains(&(&x2 + 2)).unwrap());
        assert!(!a.contains(&(&x2 + 3)).unwrap());
        assert!(!a.contains(&BigInt::from(10)).unwrap());
        assert_eq!(b.elements().len(), 20);
        assert!(b.growth_report().all_hold());
        let all = a.enumerate_upto(&b.y(5)).unwrap();
        assert_eq!(all.len(), 20);
        assert!(all.iter().all(|x| a.contains(x).unwrap()));
    }

    #[test]
    fn no_kxy_in_blocks_but_found_in_dense_sets() {
        let (_, b) = thick_no_kxy(5).unwrap();
        assert_eq!(find_kxy(&b.elements()), None);
        // {2·2, 2·3, 2·6} = {4, 6, 12}
        let p = find_kxy(&ints(&[4, 6, 12])).unwrap();
        assert_eq!((p.k.as_str(), p.x.as_str(), p.y.as_str()), ("2", "2", "3"));
    }

    #[test]
    fn kxy_scan_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let set: BTreeSet<i64> = (0..8).map(|_| rng.gen_range(1..60)).collect();
            let v: Vec<i64> = set.iter().copied().collect();
            let brute = (1..60).any(|k| {
                (2..60).any(|x| (2..60).any(|y| set.contains(&(k * x)) && set.contains(&(k * y)) && set.contains(&(k * x * y))))
            });
            assert_eq!(find_kxy(&ints(&v)).is_some(), brute, "{v:?}");
        }
    }

    #[test]
    fn exp_expr() {
        let e = ExpExpr::new(4, 16u32);
        assert_eq!(e.log2_exact().unwrap(), BigUint::from(32u32));
        assert_eq!(e.materialize().unwrap(), BigInt::one() << 32);
        assert!(ExpExpr::new(4, BigUint::from(4u32).pow(20)).materialize().is_err());
    }

    #[test]
    fn default_divisible_union_hypotheses() {
        let du = default_divisible_union();
        assert_eq!(du.elements.len(), 78);
        let r = du.report();
        assert!(r.all_hold(), "{r:?}");
        let gaps = du.difference_gaps();
        assert!(gaps.windows(2).skip(1).all(|w| w[0] < w[1]), "{gaps:?}");
        assert!(du.max_difference_multiplicity() <= 12);
    }

    #[test]
    fn factorial_chain() {
        let (_, r, du) = divisible_union(DSeq::Factorial, ASeq::One, 8).unwrap();
        assert!(r.checks[1].holds);
        assert_eq!(du.elements, ints(&[1, 2, 6, 24, 120, 720, 5040, 40320]));
        let (_, r, _) = divisible_union(DSeq::Pow2, ASeq::UpTo, 6).unwrap();
        assert!(r.checks[1].holds);
        assert!(!r.checks[0].holds);
    }

    #[test]
    fn semigroups() {
        let s = fg_mult_semigroup(&ints(&[2]), &BigInt::from(100)).unwrap();
        assert_eq!(s.enumerate_upto(&BigInt::from(100)).unwrap(), ints(&[2, 4, 8, 16, 32, 64]));
        let s = fg_mult_semigroup(&ints(&[2, 3]), &BigInt::from(30)).unwrap();
        let brute: Vec<i64> = (2..=30)
            .filter(|&n| {
                let mut m = n;
                while m % 2 == 0 {
                    m /= 2;
                }
                while m % 3 == 0 {
                    m /= 3;
                }
                m == 1
            })
            .collect();
        assert_eq!(brute, vec![2, 3, 4, 6, 8, 9, 12, 16, 18, 24, 27]);
        assert_eq!(s.enumerate_upto(&BigInt::from(30)).unwrap(), ints(&brute));
        for n in 1..=30 {
            assert_eq!(s.contains(&BigInt::from(n)).unwrap(), brute.contains(&n));
        }
        // FP(2, 2, ...) lies in ⟨2⟩
        let t = crate::patterns::fs_fp_enumerate(&ints(&[2; 5]), &crate::GroundStructure::naturals_mul()).unwrap();
        let big = fg_mult_semigroup(&ints(&[2, 3]), &BigInt::from(1000)).unwrap();
        assert!(t.entries.iter().all(|(_, v)| big.contains(&v.parse().unwrap()).unwrap()));
    }

    #[test]
    fn single_generator_semigroups_avoid_3aps() {
        for g in [2i64, 3, 5, 6, 10] {
            for bound in [100i64, 10_000, 1_000_000] {
                let s = fg_mult_semigroup(&ints(&[g]), &BigInt::from(bound)).unwrap();
                let ap = crate::patterns::longest_ap(&s, &BigInt::from(1), &BigInt::from(bound + 1), 1).unwrap().unwrap();
                assert!(ap.length <= 2, "g={g} bound={bound}");
            }
        }
    }
}
