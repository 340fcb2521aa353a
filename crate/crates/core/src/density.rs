//! Upper Banach density lower bounds over declared shift pools, Følner
//! windows for `(ℕ,+)` and `(ℕ,·)`, and lower-density profiles.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::arithfun::primes_upto;
use crate::error::{Error, Result};
use crate::groundset::{materialize, members_in, FiniteMultiset, GroundKind, GroundStructure, Set, MAX_WINDOW_BITS};

/// Upper limit on the number of window elements.
pub const MAX_FOLNER_ELEMENTS: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FolnerWindow {
    /// `{m+1, ..., m+n}`
    Additive { n: u64, m: i64 },
    /// `{m · p_1^{e_1} ⋯ p_n^{e_n} : 1 <= e_i <= n}` over the first `n` primes.
    Multiplicative { n: u32, m: u64 },
}

impl fmt::Display for FolnerWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FolnerWindow::Additive { n, m } => write!(f, "add:{n},{m}"),
            FolnerWindow::Multiplicative { n, m } => write!(f, "mult:{n},{m}"),
        }
    }
}

impl std::str::FromStr for FolnerWindow {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| Error::Parse(format!("window {s:?}: expected add:n,m or mult:n,m")))?;
        let (a, b) = rest.split_once(',').unwrap_or((rest, "0"));
        let bad = |_| Error::Parse(format!("window {s:?}"));
        match kind.trim() {
            "add" => Ok(FolnerWindow::Additive { n: a.trim().parse().map_err(bad)?, m: b.trim().parse().map_err(bad)? }),
            "mult" | "mul" => {
                let m = if rest.contains(',') { b.trim().parse().map_err(bad)? } else { 1 };
                Ok(FolnerWindow::Multiplicative { n: a.trim().parse().map_err(bad)?, m })
            }
            _ => Err(Error::Parse(format!("window kind {kind:?}"))),
        }
    }
}

impl FolnerWindow {
    pub fn ground(&self) -> GroundStructure {
        match self {
            FolnerWindow::Additive { .. } => GroundStructure::naturals_add(),
            FolnerWindow::Multiplicative { .. } => GroundStructure::naturals_mul(),
        }
    }

    pub fn size(&self) -> Result<u64> {
        let size = match *self {
            FolnerWindow::Additive { n, .. } => Some(n),
            FolnerWindow::Multiplicative { n, .. } => (n as u64).checked_pow(n),
        };
        match size {
            Some(s) if s <= MAX_FOLNER_ELEMENTS => Ok(s),
            _ => Err(Error::BudgetExceeded(format!("window {self} exceeds {MAX_FOLNER_ELEMENTS} elements"))),
        }
    }

    /// Sorted elements.
    pub fn elements(&self) -> Result<Vec<BigInt>> {
        self.size()?;
        match *self {
            FolnerWindow::Additive { n, m } => {
                if n == 0 {
                    return Err(Error::InvalidArgument("window size must be positive".into()));
                }
                Ok((1..=n).map(|i| BigInt::from(m) + i).collect())
            }
            FolnerWindow::Multiplicative { n, m } => {
                if n == 0 || m == 0 {
                    return Err(Error::InvalidArgument("need n >= 1 and m >= 1".into()));
                }
                let mut primes: Vec<u32> = Vec::new();
                let mut lim = 16u32;
                while primes.len() < n as usize {
                    primes = primes_upto(lim);
                    lim *= 2;
                }
                let mut out = vec![BigInt::from(m)];
                for &p in &primes[..n as usize] {
                    let powers: Vec<BigInt> = (1..=n).map(|e| BigInt::from(p).pow(e)).collect();
                    out = out.iter().flat_map(|x| powers.iter().map(move |q| x * q)).collect();
                }
                out.sort();
                out.dedup();
                Ok(out)
            }
        }
    }

    pub fn multiset(&self) -> Result<FiniteMultiset> {
        Ok(FiniteMultiset::from_elements(self.elements()?))
    }
}

fn ratio_str(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityEstimate {
    #[serde(serialize_with = "ser_ratio")]
    pub delta: BigRational,
    pub count: u64,
    pub size: u64,
    #[serde(serialize_with = "ser_dec")]
    pub best_shift: BigInt,
    pub window: String,
    pub shift_pool: String,
    /// Always true: the supremum over the semigroup is replaced by the pool.
    pub lower_bound_only: bool,
}

fn ser_ratio<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&ratio_str(r))
}

fn ser_dec<S: serde::Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// Parses `a..b` (inclusive), or a comma-separated list.
pub fn parse_pool(s: &str) -> Result<Vec<BigInt>> {
    let s = s.trim();
    let bad = || Error::Parse(format!("pool {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        let len = (&b - &a).to_u64().ok_or_else(bad)?;
        if len >= MAX_WINDOW_BITS {
            return Err(Error::WindowTooLarge { size: len, cap: MAX_WINDOW_BITS });
        }
        return Ok((0..=len).map(|i| &a + i).collect());
    }
    s.split(',').map(|t| t.trim().parse::<BigInt>().map_err(|_| bad())).collect()
}

fn pool_descriptor(pool: &[BigInt]) -> String {
    match (pool.first(), pool.last()) {
        (Some(a), Some(b)) if pool.len() > 4 && pool.windows(2).all(|w| &w[1] - &w[0] == BigInt::one()) => {
            format!("{a}..{b}")
        }
        _ => pool.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
    }
}

/// `|𝔉 ∩ A s⁻¹|` for each `s` in the pool, in pool order.
pub fn translate_counts(a: &dyn Set, f: &FiniteMultiset, pool: &[BigInt], g: &GroundStructure) -> Result<Vec<u64>> {
    if let (Some((lo, hi)), GroundKind::NaturalsAdditive | GroundKind::IntegersAdditive) = (f.as_unit_interval(), g.kind) {
        if let (Some(pmin), Some(pmax)) = (pool.iter().min(), pool.iter().max()) {
            let wlo: BigInt = &lo + pmin;
            let whi: BigInt = &hi + pmax + 1;
            if (&whi - &wlo).to_u64().is_some_and(|s| s <= MAX_WINDOW_BITS) {
                return sliding_counts(a, &lo, &hi, pool, &wlo, &whi);
            }
        }
    }
    let items: Vec<BigInt> = pool.to_vec();
    crate::par::map_collect(items, |s| {
        let mut count = 0u64;
        for (x, mult) in f.iter() {
            let y = g.op(x, &s)?;
            let hit = match y.to_u64() {
                Some(v) => a.contains_u64(v)?,
                None => a.contains(&y)?,
            };
            if hit {
                count += mult;
            }
        }
        Ok(count)
    })
    .into_iter()
    .collect()
}

fn sliding_counts(a: &dyn Set, lo: &BigInt, hi: &BigInt, pool: &[BigInt], wlo: &BigInt, whi: &BigInt) -> Result<Vec<u64>> {
    if let Some((dlo, dhi)) = a.domain() {
        if wlo < &dlo || whi > &dhi {
            let bad = if wlo < &dlo { wlo.clone() } else { whi - 1 };
            return Err(Error::OutOfRange { set: a.descriptor(), value: bad, lo: dlo, hi: dhi });
        }
    }
    let w = materialize(a, wlo, whi)?;
    let len = w.len() as usize;
    let mut prefix = vec![0u64; len + 1];
    for i in 0..len {
        prefix[i + 1] = prefix[i] + w.get_offset(i as u64) as u64;
    }
    Ok(pool
        .iter()
        .map(|s| {
            let start = (lo + s - wlo).to_usize().expect("inside window");
            let end = (hi + s - wlo).to_usize().expect("inside window") + 1;
            prefix[end] - prefix[start]
        })
        .collect())
}

/// `max_{s ∈ pool} |𝔉 ∩ A s⁻¹| / |𝔉|`, ties going to the least shift.
pub fn banach_density_lower_bound(a: &dyn Set, f: &FiniteMultiset, pool: &[BigInt], g: &GroundStructure) -> Result<DensityEstimate> {
    if pool.is_empty() {
        return Err(Error::InvalidArgument("shift pool is empty".into()));
    }
    if f.is_empty() {
        return Err(Error::InvalidArgument("window is empty".into()));
    }
    let counts = translate_counts(a, f, pool, g)?;
    let mut best = 0usize;
    for i in 1..pool.len() {
        if counts[i] > counts[best] || (counts[i] == counts[best] && pool[i] < pool[best]) {
            best = i;
        }
    }
    let size = f.total();
    Ok(DensityEstimate {
        delta: BigRational::new(counts[best].into(), size.into()),
        count: counts[best],
        size,
        best_shift: pool[best].clone(),
        window: describe_multiset(f),
        shift_pool: pool_descriptor(pool),
        lower_bound_only: true,
    })
}

fn describe_multiset(f: &FiniteMultiset) -> String {
    match f.as_unit_interval() {
        Some((lo, hi)) => format!("[{lo}..{hi}]"),
        None => format!("multiset(|F|={}, support={})", f.total(), f.support_len()),
    }
}

/// Pool elements `s` with `|𝔉 ∩ A s⁻¹| >= β |𝔉|`.
pub fn translate_level_set(a: &dyn Set, f: &FiniteMultiset, beta: &BigRational, pool: &[BigInt], g: &GroundStructure) -> Result<Vec<BigInt>> {
    if beta < &BigRational::zero() || beta > &BigRational::one() {
        return Err(Error::InvalidArgument("beta must lie in [0, 1]".into()));
    }
    let counts = translate_counts(a, f, pool, g)?;
    let size = BigRational::from_integer(f.total().into());
    Ok(pool
        .iter()
        .zip(counts)
        .filter(|(_, c)| BigRational::from_integer((*c).into()) >= beta * &size)
        .map(|(s, _)| s.clone())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub n: u64,
    pub count: u64,
    pub ratio: f64,
    pub running_inf: f64,
}

/// `1, 2, 5, 10, 20, 50, ...` up to `n_max`, then `n_max` itself.
pub fn checkpoints(n_max: u64) -> Vec<u64> {
    let mut out = BTreeSet::new();
    let mut base = 1u64;
    'outer: loop {
        for k in [1, 2, 5] {
            match base.checked_mul(k) {
                Some(v) if v <= n_max => {
                    out.insert(v);
                }
                _ => break 'outer,
            }
        }
        match base.checked_mul(10) {
            Some(b) => base = b,
            None => break,
        }
    }
    if n_max >= 1 {
        out.insert(n_max);
    }
    out.into_iter().collect()
}

/// Exact `|A ∩ [1, N]| / N` at geometric checkpoints with the running infimum.
pub fn lower_density_profile(a: &dyn Set, n_max: u64) -> Result<Vec<ProfilePoint>> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be positive".into()));
    }
    let members = members_in(a, &BigInt::one(), &BigInt::from(n_max + 1))?;
    let vals: Vec<u64> = members.iter().map(|x| x.to_u64().expect("bounded")).collect();
    let mut out = Vec::new();
    let mut inf = f64::INFINITY;
    for n in checkpoints(n_max) {
        let count = vals.partition_point(|&v| v <= n) as u64;
        let ratio = count as f64 / n as f64;
        inf = inf.min(ratio);
        out.push(ProfilePoint { n, count, ratio, running_inf: inf });
    }
    Ok(out)
}

/// `|sF △ F| / |F|`.
pub fn folner_drift(window: &FolnerWindow, s: &BigInt, g: &GroundStructure) -> Result<BigRational> {
    let f: BTreeSet<BigInt> = window.elements()?.into_iter().collect();
    let mut shifted = BTreeSet::new();
    for x in &f {
        shifted.insert(g.op(s, x)?);
    }
    let sym = shifted.symmetric_difference(&f).count();
    Ok(BigRational::new(sym.into(), f.len().into()))
}
