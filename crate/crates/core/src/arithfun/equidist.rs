use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::real::{torus_to_f64, HpReal, Poly, FRAC_BITS};
use crate::error::{Error, Result};

/// Points of the circle `[0,1)` stored as 128-bit fixed-point fractions.
#[derive(Debug, Clone)]
pub struct TorusSample {
    points: Vec<u128>,
    source: String,
    /// Upper bound on the absolute error of any stored point.
    point_err: f64,
}

impl TorusSample {
    pub fn from_points(points: Vec<u128>, source: impl Into<String>) -> Self {
        Self { points, source: source.into(), point_err: 0.0 }
    }

    /// `{p(n)}` for `n = 1..=count`.
    pub fn from_poly(p: &Poly, count: u64) -> Self {
        let t = p.torus();
        let points = (1..=count as i64).map(|n| t.eval(n)).collect();
        Self { points, source: format!("poly deg {} n=1..{count}", p.degree()), point_err: t.eval_err(count as i64) }
    }

    /// Each `x` reduced mod 1.
    pub fn from_f64(xs: &[f64]) -> Self {
        let points = xs
            .iter()
            .map(|&x| {
                let f = x - x.floor();
                (f * 2f64.powi(64)) as u128 * (1u128 << 64)
            })
            .collect();
        Self { points, source: "f64 literals".into(), point_err: 2f64.powi(-52) }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[u128] {
        &self.points
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.points.iter().map(|&p| torus_to_f64(p)).collect()
    }
}

/// Normalized exponential sum with an error estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeylSum {
    pub re: f64,
    pub im: f64,
    /// Bound on `|computed - true|` for the normalized value.
    pub error_bound: f64,
}

impl WeylSum {
    pub fn magnitude(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(&mut self, o: Compensated) {
        self.add(o.sum);
        self.add(o.c);
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

fn phase(t: u128) -> f64 {
    // signed reading keeps the angle in [-π, π)
    (t as i128) as f64 * 2f64.powi(-128) * 2.0 * PI
}

fn exp_sum(points: impl Iterator<Item = u128>) -> (Compensated, Compensated, u64) {
    let mut re = Compensated::default();
    let mut im = Compensated::default();
    let mut n = 0;
    for t in points {
        let (s, c) = phase(t).sin_cos();
        re.add(c);
        im.add(s);
        n += 1;
    }
    (re, im, n)
}

/// Per-term floating error of `e^{2πiθ}` plus summation error, relative to 1.
const TERM_FLOAT_ERR: f64 = 8.0 * f64::EPSILON;

/// `(1/N) Σ_{n=M+1}^{M+N} e^{2πi f(n)}`.
pub fn weyl_sum(f: &Poly, m: i64, count: u64) -> Result<WeylSum> {
    if count == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let t = f.torus();
    let start = m + 1;
    let end = m
        .checked_add(count as i64)
        .ok_or_else(|| Error::InvalidArgument("M + N overflows".into()))?;
    const CHUNK: i64 = 1 << 14;
    let chunks: Vec<(i64, i64)> = (0..)
        .map(|k| start + k * CHUNK)
        .take_while(|&a| a <= end)
        .map(|a| (a, (a + CHUNK - 1).min(end)))
        .collect();
    let parts = crate::par::map_collect(chunks, |(a, b)| exp_sum((a..=b).map(|n| t.eval(n))));
    let (mut re, mut im) = (Compensated::default(), Compensated::default());
    for (r, i, _) in parts {
        re.merge(r);
        im.merge(i);
    }
    let phase_err = t.eval_err(start.abs().max(end.abs())) * 2.0 * PI;
    let n = count as f64;
    Ok(WeylSum {
        re: re.value() / n,
        im: im.value() / n,
        error_bound: phase_err + TERM_FLOAT_ERR + n * f64::EPSILON,
    })
}

/// Extreme discrepancy `sup_{[a,b)} |#{x_n ∈ [a,b)}/N − (b − a)|`.
///
/// With the points sorted as `x_1 <= ... <= x_N`, the supremum equals
/// `1/N + max_i (i/N − x_i) − min_i (i/N − x_i)`.
pub fn discrepancy(sample: &TorusSample) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    let mut pts = sample.points.clone();
    pts.sort_unstable();
    let n = pts.len() as f64;
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    for (i, &p) in pts.iter().enumerate() {
        let v = (i + 1) as f64 / n - torus_to_f64(p);
        hi = hi.max(v);
        lo = lo.min(v);
    }
    Ok((1.0 / n + hi - lo).min(1.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct LevequeBound {
    /// `min(1, (6/π² (Σ_{h<=H} |W_h|²/h² + 1/H))^{1/3})`.
    pub bound: f64,
    /// The truncated sum `Σ_{h<=H} |W_h|²/h²`.
    pub truncated: f64,
    /// Tail allowance `1/H` (inside the cube root, before the 6/π² factor).
    pub tail: f64,
    pub h: u64,
}

/// Upper bound on the discrepancy from the first `H` Weyl sums of the
/// sample, with the tail `Σ_{h>H} 1/h² < 1/H` added rigorously.
pub fn leveque_bound(sample: &TorusSample, h_max: u64) -> Result<LevequeBound> {
    if h_max == 0 {
        return Err(Error::InvalidArgument("H must be at least 1".into()));
    }
    if sample.is_empty() {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    let n = sample.len() as f64;
    let hs: Vec<u64> = (1..=h_max).collect();
    let terms = crate::par::map_collect(hs, |h| {
        let (re, im, _) = exp_sum(sample.points.iter().map(|&p| p.wrapping_mul(h as u128)));
        let mag = re.value().hypot(im.value()) / n;
        let err = sample.point_err * h as f64 * 2.0 * PI + TERM_FLOAT_ERR + n * f64::EPSILON;
        let m = (mag + err).min(1.0);
        m * m / (h as f64 * h as f64)
    });
    let mut acc = Compensated::default();
    for t in terms {
        acc.add(t);
    }
    let truncated = acc.value();
    let tail = 1.0 / h_max as f64;
    let raw = (6.0 / (PI * PI) * (truncated + tail)).cbrt();
    Ok(LevequeBound { bound: raw.min(1.0), truncated, tail, h: h_max })
}

/// Result of an ε-density threshold search.
#[derive(Debug, Clone, Serialize)]
pub struct DenseThreshold {
    /// Least `N` that works for every pool element, if one was found.
    pub n: Option<u64>,
    /// Least `N` per pool element (`None` where `n_max` was not enough).
    pub per_beta: Vec<Option<u64>>,
    /// Always true: a finite pool cannot certify uniformity over all real β.
    pub pool_uniform_only: bool,
    pub diagnostic: String,
}

/// Tracks the circular gaps of a growing point set and how many of them
/// are at least `eps`.
struct GapTracker {
    points: BTreeSet<u128>,
    eps: u128,
    wide: usize,
}

impl GapTracker {
    fn new(eps: u128) -> Self {
        Self { points: BTreeSet::new(), eps, wide: 0 }
    }

    fn is_wide(&self, gap: Option<u128>) -> bool {
        // None encodes the full circle (single point)
        gap.is_none_or(|g| g >= self.eps)
    }

    fn neighbours(&self, x: u128) -> (u128, u128) {
        let pred = self.points.range(..x).next_back().or_else(|| self.points.iter().next_back()).copied();
        let succ = self.points.range(x..).next().or_else(|| self.points.iter().next()).copied();
        (pred.expect("non-empty"), succ.expect("non-empty"))
    }

    fn insert(&mut self, x: u128) {
        if self.points.contains(&x) {
            return;
        }
        match self.points.len() {
            0 => {
                self.points.insert(x);
                self.wide = 1;
            }
            1 => {
                let a = *self.points.iter().next().expect("one point");
                self.points.insert(x);
                let g1 = x.wrapping_sub(a);
                let g2 = a.wrapping_sub(x);
                self.wide = self.is_wide(Some(g1)) as usize + self.is_wide(Some(g2)) as usize;
            }
            _ => {
                let (a, b) = self.neighbours(x);
                let old = b.wrapping_sub(a);
                if self.is_wide(Some(old)) {
                    self.wide -= 1;
                }
                self.points.insert(x);
                self.wide += self.is_wide(Some(x.wrapping_sub(a))) as usize;
                self.wide += self.is_wide(Some(b.wrapping_sub(x))) as usize;
            }
        }
    }

    fn dense(&self) -> bool {
        self.wide == 0
    }
}

fn eps_to_u128(eps: &HpReal) -> Result<u128> {
    let zero = HpReal::zero();
    let one = HpReal::from_int(1);
    if eps.cmp_centre(&zero) != std::cmp::Ordering::Greater || eps.cmp_centre(&one) != std::cmp::Ordering::Less {
        return Err(Error::InvalidArgument("ε must lie in (0, 1)".into()));
    }
    Ok(eps.frac_u128())
}

/// Least `N <= n_max` such that `{p(nξ + β)}_{n=1..N}` has every circular gap
/// below `ε`, simultaneously for every `β` in the pool.
pub fn epsilon_dense_threshold(
    p: &Poly,
    xi: &HpReal,
    eps: &HpReal,
    beta_pool: &[HpReal],
    n_max: u64,
) -> Result<DenseThreshold> {
    if beta_pool.is_empty() {
        return Err(Error::InvalidArgument("β pool is empty".into()));
    }
    let e = eps_to_u128(eps)?;
    let polys: Vec<Poly> = beta_pool.iter().map(|b| p.compose_affine(xi, b)).collect();
    let per_beta = crate::par::map_collect(polys, |q| {
        let t = q.torus();
        let mut g = GapTracker::new(e);
        for n in 1..=n_max {
            g.insert(t.eval(n as i64));
            if g.dense() {
                return Some(n);
            }
        }
        None
    });
    let n = per_beta.iter().copied().collect::<Option<Vec<u64>>>().and_then(|v| v.into_iter().max());
    let diagnostic = match n {
        Some(n) => format!("ε-dense for all {} pool values by N = {n}; uniformity over all real β is not certified", beta_pool.len()),
        None => {
            let failing = per_beta.iter().filter(|x| x.is_none()).count();
            format!("{failing} of {} pool values never became ε-dense up to N = {n_max} (rational leading behaviour?)", beta_pool.len())
        }
    };
    Ok(DenseThreshold { n, per_beta, pool_uniform_only: true, diagnostic })
}

/// Continued-fraction convergents `p_k / q_k` of `x`, stopping at `max_terms`
/// or once the expansion is no longer determined by the stored precision.
pub fn convergents(x: &HpReal, max_terms: usize) -> Vec<(BigInt, BigInt)> {
    let denom = BigInt::one() << FRAC_BITS;
    let mut num = x.mantissa().clone();
    let mut den = denom;
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let mut out = Vec::new();
    let limit = BigInt::one() << (FRAC_BITS / 2 - 8);
    for _ in 0..max_terms {
        if den.is_zero() {
            break;
        }
        let (a, r) = num.div_mod_floor(&den);
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        if q2.abs() > limit {
            break;
        }
        out.push((p2.clone(), q2.clone()));
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        num = den;
        den = r;
    }
    out
}
