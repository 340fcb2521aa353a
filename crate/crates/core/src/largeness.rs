//! Finite-horizon certifiers and refuters for syndetic, thick, piecewise
//! syndetic, IP_r and combinatorially rich sets.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::certificate::{Certificate, IndexedValue};
use crate::error::{Error, Result};
use crate::groundset::{materialize, members_in, quotient_set, GroundStructure, IntegerWindowSet, Set, SetHandle};

pub const MAX_IP_RANK: usize = 20;
pub const MAX_RICHNESS_ROWS: usize = 20;

/// Membership where an undefined value (outside a window) counts as absent.
fn member_or_absent(a: &dyn Set, x: &BigInt) -> Result<bool> {
    match a.contains(x) {
        Ok(b) => Ok(b),
        Err(Error::OutOfRange { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SyndeticCertificate {
    pub ground: String,
    pub witness_f: Vec<String>,
    pub horizon: String,
    pub verified_range: (String, String),
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SyndeticOutcome {
    Certified(SyndeticCertificate),
    /// Least `n` in `[1, horizon]` with `op(f, n) ∉ A` for every `f`.
    Fails { n: String },
}

impl SyndeticOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, SyndeticOutcome::Certified(_))
    }

    pub fn certificate(&self) -> Option<Certificate> {
        match self {
            SyndeticOutcome::Certified(c) => Some(Certificate::Syndetic {
                ground: c.ground.clone(),
                witness_f: c.witness_f.iter().map(|s| s.parse().expect("decimal")).collect(),
                horizon: c.horizon.parse().expect("decimal"),
                lo: c.verified_range.0.parse().expect("decimal"),
                hi: c.verified_range.1.parse().expect("decimal"),
            }),
            SyndeticOutcome::Fails { .. } => None,
        }
    }
}

fn covered(a: &dyn Set, f: &[BigInt], fu: &[u64], n: u64, g: &GroundStructure) -> Result<bool> {
    for (fb, &fs) in f.iter().zip(fu) {
        let hit = match g.op_u64(fs, n) {
            Some(v) if fs != u64::MAX => a.contains_u64(v)?,
            _ => member_or_absent(a, &g.op(fb, &BigInt::from(n))?)?,
        };
        if hit {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Checks that `{op(f, n) : f ∈ F}` meets `A` for every `n` in `[1, horizon]`.
pub fn check_syndetic(a: &dyn Set, f: &[BigInt], horizon: u64, g: &GroundStructure) -> Result<SyndeticOutcome> {
    if f.is_empty() {
        return Err(Error::InvalidArgument("witness set F is empty".into()));
    }
    let fu: Vec<u64> = f.iter().map(|x| x.to_u64().unwrap_or(u64::MAX)).collect();
    const CHUNK: u64 = 4096;
    let chunks: Vec<(u64, u64)> = (0..horizon.div_ceil(CHUNK))
        .map(|c| (c * CHUNK + 1, ((c + 1) * CHUNK).min(horizon)))
        .collect();
    let first_fail = crate::par::find_first(chunks, |(lo, hi)| {
        for n in lo..=hi {
            match covered(a, f, &fu, n, g) {
                Ok(true) => {}
                Ok(false) => return Some(Ok(n)),
                Err(e) => return Some(Err(e)),
            }
        }
        None
    });
    match first_fail {
        Some(Ok(n)) => Ok(SyndeticOutcome::Fails { n: n.to_string() }),
        Some(Err(e)) => Err(e),
        None => Ok(SyndeticOutcome::Certified(SyndeticCertificate {
            ground: g.to_string(),
            witness_f: f.iter().map(|x| x.to_string()).collect(),
            horizon: horizon.to_string(),
            verified_range: ("1".into(), horizon.to_string()),
        })),
    }
}

/// Maximal runs of consecutive members in `[1, horizon]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThickProfile {
    pub horizon: String,
    /// `(start, length)`, sorted, disjoint and maximal within the horizon.
    pub runs: Vec<(String, u64)>,
    pub longest: u64,
}

impl ThickProfile {
    pub fn run_lengths(&self) -> Vec<u64> {
        self.runs.iter().map(|r| r.1).collect()
    }

    /// Longest run lying entirely at or below `n`.
    pub fn longest_below(&self, n: &BigInt) -> u64 {
        self.runs
            .iter()
            .filter(|(s, l)| s.parse::<BigInt>().map(|s| s + BigInt::from(*l) - 1 <= *n).unwrap_or(false))
            .map(|r| r.1)
            .max()
            .unwrap_or(0)
    }
}

fn runs_of(members: &[BigInt]) -> Vec<(BigInt, u64)> {
    let mut runs: Vec<(BigInt, u64)> = Vec::new();
    for m in members {
        match runs.last_mut() {
            Some((s, l)) if &(&*s + BigInt::from(*l)) == m => *l += 1,
            _ => runs.push((m.clone(), 1)),
        }
    }
    runs
}

/// Runs of consecutive integers in `A ∩ [1, horizon]`. Run structure is
/// always additive; in a multiplicative ground it is still recorded as a
/// statistic (multiplicative thickness is tested by [`mult_thick_witness`]).
pub fn thick_profile(a: &dyn Set, horizon: &BigInt, _g: &GroundStructure) -> Result<ThickProfile> {
    let members = members_in(a, &BigInt::one(), &(horizon + 1))?;
    let runs = runs_of(&members);
    let longest = runs.iter().map(|r| r.1).max().unwrap_or(0);
    Ok(ThickProfile {
        horizon: horizon.to_string(),
        runs: runs.into_iter().map(|(s, l)| (s.to_string(), l)).collect(),
        longest,
    })
}

/// Certificate for `op(f, x) ∈ A` for every `f ∈ F`.
pub fn thick_certificate(f: &[BigInt], x: &BigInt, g: &GroundStructure) -> Certificate {
    Certificate::ThickWitness { ground: g.to_string(), f: f.to_vec(), x: x.clone() }
}

/// Least `x` in `[1, bound]` with `op(f, x) ∈ A` for all `f ∈ F`.
pub fn mult_thick_witness(a: &dyn Set, f: &[BigInt], bound: &BigInt, g: &GroundStructure) -> Result<Option<BigInt>> {
    if f.is_empty() {
        return Ok(Some(BigInt::one()));
    }
    let ok = |x: &BigInt| -> Result<bool> {
        for fi in f {
            if !member_or_absent(a, &g.op(fi, x)?)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let f0 = &f[0];
    if a.is_exactly_enumerable() {
        // x = preimage of some member under f0
        let top = g.op(f0, bound)?;
        let mut candidates: Vec<BigInt> = a
            .enumerate_upto(&top)?
            .into_iter()
            .filter_map(|y| g.preimage(f0, &y))
            .filter(|x| x.is_positive() && x <= bound)
            .collect();
        candidates.sort();
        candidates.dedup();
        for x in candidates {
            if ok(&x)? {
                return Ok(Some(x));
            }
        }
        return Ok(None);
    }
    let b = bound.to_u64().filter(|&b| b <= crate::groundset::MAX_WINDOW_BITS).ok_or(Error::WindowTooLarge {
        size: bound.to_u64().unwrap_or(u64::MAX),
        cap: crate::groundset::MAX_WINDOW_BITS,
    })?;
    for x in 1..=b {
        if ok(&BigInt::from(x))? {
            return Ok(Some(BigInt::from(x)));
        }
    }
    Ok(None)
}

/// Runs of `B = ∪_{f∈F} f⁻¹A` within `[1, horizon]`.
pub fn check_piecewise_syndetic(a: SetHandle, f: &[BigInt], horizon: &BigInt, g: &GroundStructure) -> Result<ThickProfile> {
    if f.is_empty() {
        return Err(Error::InvalidArgument("F is empty".into()));
    }
    let quotients: Vec<crate::groundset::LazySet> =
        f.iter().map(|fi| quotient_set(Arc::clone(&a), fi.clone(), g.clone())).collect();
    let all_exact = quotients.iter().all(|q| q.is_exactly_enumerable());
    let mut members: Vec<BigInt> = if all_exact {
        let mut v = Vec::new();
        for q in &quotients {
            v.extend(q.enumerate_upto(horizon)?.into_iter().filter(|x| x.is_positive()));
        }
        v
    } else {
        let h = horizon.to_u64().filter(|&h| h <= crate::groundset::MAX_WINDOW_BITS).ok_or(Error::WindowTooLarge {
            size: horizon.to_u64().unwrap_or(u64::MAX),
            cap: crate::groundset::MAX_WINDOW_BITS,
        })?;
        let mut v = Vec::new();
        for x in 1..=h {
            let xb = BigInt::from(x);
            for fi in f {
                if member_or_absent(&*a, &g.op(fi, &xb)?)? {
                    v.push(xb.clone());
                    break;
                }
            }
        }
        v
    };
    members.sort();
    members.dedup();
    let runs = runs_of(&members);
    let longest = runs.iter().map(|r| r.1).max().unwrap_or(0);
    Ok(ThickProfile {
        horizon: horizon.to_string(),
        runs: runs.into_iter().map(|(s, l)| (s.to_string(), l)).collect(),
        longest,
    })
}

/// Generators `s_1 < ... < s_r` and all `2^r − 1` combined values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IpCertificate {
    pub ground: String,
    pub r: usize,
    pub generators: Vec<String>,
    /// Indexed by bitmask − 1 (bit `i` ↔ generator `i + 1`).
    pub values: Vec<(Vec<usize>, String)>,
}

impl IpCertificate {
    fn build(g: &GroundStructure, gens: &[BigInt]) -> Result<Self> {
        let values = fs_values(gens, g)?;
        Ok(Self {
            ground: g.to_string(),
            r: gens.len(),
            generators: gens.iter().map(|x| x.to_string()).collect(),
            values: values.into_iter().map(|(a, v)| (a, v.to_string())).collect(),
        })
    }

    pub fn generators(&self) -> Vec<BigInt> {
        self.generators.iter().map(|s| s.parse().expect("decimal")).collect()
    }

    fn indexed(&self) -> (Vec<BigInt>, Vec<IndexedValue>) {
        (
            self.generators(),
            self.values
                .iter()
                .map(|(a, v)| IndexedValue { alpha: a.clone(), value: v.parse().expect("decimal") })
                .collect(),
        )
    }

    pub fn certificate(&self) -> Certificate {
        let (generators, values) = self.indexed();
        Certificate::IpR { ground: self.ground.clone(), generators, values }
    }

    pub fn refutation_certificate(&self) -> Certificate {
        let (generators, values) = self.indexed();
        Certificate::IpRRefutation { ground: self.ground.clone(), generators, values }
    }
}

/// `s_α` for every non-empty `α`, in bitmask order, combining in
/// increasing index order.
fn fs_values(gens: &[BigInt], g: &GroundStructure) -> Result<Vec<(Vec<usize>, BigInt)>> {
    let r = gens.len();
    let mut vals: Vec<BigInt> = Vec::with_capacity(1 << r);
    vals.push(g.identity());
    let mut out = Vec::with_capacity((1 << r) - 1);
    for mask in 1usize..(1 << r) {
        let top = usize::BITS - 1 - mask.leading_zeros();
        let rest = mask & !(1 << top);
        let v = if rest == 0 { gens[top as usize].clone() } else { g.op(&vals[rest], &gens[top as usize])? };
        vals.push(v.clone());
        let alpha = (0..r).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
        out.push((alpha, v));
    }
    Ok(out)
}

/// Depth-first search for strictly increasing generators drawn from
/// `candidates`, keeping every partial FS set inside `A`.
fn ip_search(a: &dyn Set, candidates: &[BigInt], r: usize, g: &GroundStructure) -> Result<Option<Vec<BigInt>>> {
    fn extend(
        a: &dyn Set,
        cands: &[BigInt],
        from: usize,
        r: usize,
        g: &GroundStructure,
        gens: &mut Vec<BigInt>,
        sums: &mut Vec<BigInt>,
    ) -> Result<bool> {
        if gens.len() == r {
            return Ok(true);
        }
        for idx in from..cands.len() {
            if cands.len() - idx < r - gens.len() {
                break;
            }
            let s = &cands[idx];
            let base = sums.len();
            let mut ok = true;
            for i in 0..base {
                let v = g.op(&sums[i], s)?;
                if !member_or_absent(a, &v)? {
                    ok = false;
                    break;
                }
                sums.push(v);
            }
            if ok {
                sums.push(s.clone());
                gens.push(s.clone());
                if extend(a, cands, idx + 1, r, g, gens, sums)? {
                    return Ok(true);
                }
                gens.pop();
            }
            sums.truncate(base);
        }
        Ok(false)
    }
    let firsts: Vec<usize> = (0..candidates.len()).collect();
    let found = crate::par::find_first(firsts, |i| {
        let mut gens = vec![candidates[i].clone()];
        let mut sums = vec![candidates[i].clone()];
        match extend(a, candidates, i + 1, r, g, &mut gens, &mut sums) {
            Ok(true) => Some(Ok(gens)),
            Ok(false) => None,
            Err(e) => Some(Err(e)),
        }
    });
    found.transpose()
}

fn check_rank(r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidArgument("r must be at least 1".into()));
    }
    if r > MAX_IP_RANK {
        return Err(Error::RankTooLarge { r, cap: MAX_IP_RANK });
    }
    Ok(())
}

/// Lexicographically least `s_1 < ... < s_r <= search_bound` whose finite
/// sums (or products) all lie in `A`. `None` means none within the bound.
/// Values outside a window's range count as absent.
pub fn ip_r_certificate(a: &dyn Set, r: usize, g: &GroundStructure, search_bound: &BigInt) -> Result<Option<IpCertificate>> {
    check_rank(r)?;
    let lo = if g.is_additive() { BigInt::one() } else { BigInt::from(2) };
    let candidates = match a.domain() {
        Some((dlo, dhi)) => {
            let hi = (search_bound + BigInt::one()).min(dhi);
            members_in(a, &lo.max(dlo), &hi)?
        }
        None => members_in(a, &lo, &(search_bound + 1))?,
    };
    ip_search(a, &candidates, r, g)?.map(|gens| IpCertificate::build(g, &gens)).transpose()
}

/// Like [`ip_r_certificate`] but over an explicit list of candidate
/// generators (e.g. the enumerated members of a sparse set).
pub fn ip_r_among(a: &dyn Set, candidates: &[BigInt], r: usize, g: &GroundStructure) -> Result<Option<IpCertificate>> {
    check_rank(r)?;
    let mut c = candidates.to_vec();
    c.sort();
    c.dedup();
    ip_search(a, &c, r, g)?.map(|gens| IpCertificate::build(g, &gens)).transpose()
}

/// Searches the complement of `A` inside `[lo, hi)` for an IP_r set, which
/// refutes `A ∈ IP_r*`. `None` is inconclusive.
pub fn ip_r_star_refute(a: &dyn Set, r: usize, lo: &BigInt, hi: &BigInt, g: &GroundStructure) -> Result<Option<IpCertificate>> {
    check_rank(r)?;
    let w = materialize(a, lo, hi)?;
    let comp = w.complement();
    let bound = hi - 1;
    ip_r_certificate(&comp, r, g, &bound)
}

/// Witness for combinatorial richness of one matrix: `α ⊆ [r]` (1-based)
/// and a shift `s` with `op(s, M_{α,j}) ∈ A` for every column `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RichnessWitness {
    pub alpha: Vec<usize>,
    pub s: String,
}

/// Non-empty subsets of `0..r` in lexicographic order of their sorted
/// element lists.
fn lex_subsets(r: usize) -> Vec<Vec<usize>> {
    fn go(r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let start = cur.last().map_or(0, |&l| l + 1);
        for i in start..r {
            cur.push(i);
            out.push(cur.clone());
            go(r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::with_capacity((1 << r) - 1);
    go(r, &mut Vec::new(), &mut out);
    out
}

/// Exhaustive over `α` (lexicographic), then `s` in pool order.
pub fn combinatorial_richness_witness(
    a: &dyn Set,
    m: &[Vec<BigInt>],
    g: &GroundStructure,
    pool: &[BigInt],
) -> Result<Option<RichnessWitness>> {
    let r = m.len();
    if r == 0 {
        return Err(Error::InvalidArgument("matrix has no rows".into()));
    }
    if r > MAX_RICHNESS_ROWS {
        return Err(Error::RankTooLarge { r, cap: MAX_RICHNESS_ROWS });
    }
    let n = m[0].len();
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument("matrix rows have different lengths".into()));
    }
    let subsets = lex_subsets(r);
    let found = crate::par::find_first(subsets, |alpha| {
        let cols: Result<Vec<BigInt>> = (0..n)
            .map(|j| {
                let mut acc = m[alpha[0]][j].clone();
                for &i in &alpha[1..] {
                    acc = g.op(&acc, &m[i][j])?;
                }
                Ok(acc)
            })
            .collect();
        let cols = match cols {
            Ok(c) => c,
            Err(e) => return Some(Err(e)),
        };
        for s in pool {
            let mut all = true;
            for c in &cols {
                match g.op(s, c).and_then(|v| member_or_absent(a, &v)) {
                    Ok(true) => {}
                    Ok(false) => {
                        all = false;
                        break;
                    }
                    Err(e) => return Some(Err(e)),
                }
            }
            if all {
                return Some(Ok(RichnessWitness { alpha: alpha.iter().map(|i| i + 1).collect(), s: s.to_string() }));
            }
        }
        None
    });
    found.transpose()
}

pub fn richness_certificate(w: &RichnessWitness, m: &[Vec<BigInt>], g: &GroundStructure) -> Certificate {
    Certificate::CombRich {
        ground: g.to_string(),
        matrix: m.to_vec(),
        alpha: w.alpha.clone(),
        s: w.s.parse().expect("decimal"),
    }
}

/// Window snapshot helper for callers that want `ip_r_certificate` over a
/// bitmap they already hold.
pub fn ip_r_in_window(w: &IntegerWindowSet, r: usize, g: &GroundStructure) -> Result<Option<IpCertificate>> {
    let bound: BigInt = w.hi() - 1;
    if bound.is_zero() || bound.is_negative() {
        return Ok(None);
    }
    ip_r_certificate(w, r, g, &bound)
}
