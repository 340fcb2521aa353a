//! Norm forms: exact evaluation, coordinate multiplication for the preset
//! families, enumeration of represented values, closure checks, AP search
//! and relative prime density.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::arithfun::primes_upto;
use crate::error::{Error, Result};
use crate::groundset::{Exactness, Set};
use crate::patterns::{longest_ap, ApCert};

/// Largest coordinate box `(2B+1)^vars` that will be scanned.
pub const MAX_BOX_POINTS: u64 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Preset {
    /// `x² − a y²` over `ℤ[√a]`.
    Quadratic { a: i64 },
    /// `x³ + a y³ + a² z³ − 3a xyz` over `ℤ[∛a]`.
    Cubic { a: i64 },
}

/// Homogeneous integer polynomial given by monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormForm {
    pub degree: u32,
    pub vars: usize,
    pub monomials: Vec<(BigInt, Vec<u32>)>,
    pub preset: Option<Preset>,
}

impl fmt::Display for NormForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.preset {
            Some(Preset::Quadratic { a }) => write!(f, "quadratic:a={a}"),
            Some(Preset::Cubic { a }) => write!(f, "cubic:a={a}"),
            None => {
                let terms: Vec<String> = self
                    .monomials
                    .iter()
                    .map(|(c, e)| format!("{c}:{}", e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
                    .collect();
                write!(f, "form:{}", terms.join(";"))
            }
        }
    }
}

impl NormForm {
    pub fn new(monomials: Vec<(BigInt, Vec<u32>)>) -> Result<Self> {
        let vars = monomials.first().map(|(_, e)| e.len()).ok_or_else(|| Error::InvalidArgument("form has no monomials".into()))?;
        if vars == 0 || monomials.iter().any(|(_, e)| e.len() != vars) {
            return Err(Error::InvalidArgument("monomials must share a positive number of variables".into()));
        }
        let degree: u32 = monomials[0].1.iter().sum();
        if degree == 0 || monomials.iter().any(|(_, e)| e.iter().sum::<u32>() != degree) {
            return Err(Error::InvalidArgument("form must be homogeneous of positive degree".into()));
        }
        let monomials = monomials.into_iter().filter(|(c, _)| !c.is_zero()).collect();
        Ok(Self { degree, vars, monomials, preset: None })
    }

    pub fn quadratic(a: i64) -> Self {
        let m = vec![(BigInt::from(1), vec![2, 0]), (BigInt::from(-a), vec![0, 2])];
        Self { preset: Some(Preset::Quadratic { a }), ..Self::new(m).expect("valid") }
    }

    pub fn cubic(a: i64) -> Self {
        let a2 = BigInt::from(a) * a;
        let m = vec![
            (BigInt::from(1), vec![3, 0, 0]),
            (BigInt::from(a), vec![0, 3, 0]),
            (a2, vec![0, 0, 3]),
            (BigInt::from(-3 * a), vec![1, 1, 1]),
        ];
        Self { preset: Some(Preset::Cubic { a }), ..Self::new(m).expect("valid") }
    }

    /// `quadratic:a`, `quadratic:a=-1`, `cubic:a=2`, or
    /// `form:c:e1,e2;c:e1,e2;...` for a user form.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s.split_once(':').ok_or_else(|| Error::Parse(format!("norm form {s:?}")))?;
        let param = || -> Result<i64> {
            rest.trim().trim_start_matches("a=").parse().map_err(|_| Error::Parse(format!("norm form parameter {rest:?}")))
        };
        match kind {
            "quadratic" => Ok(Self::quadratic(param()?)),
            "cubic" => Ok(Self::cubic(param()?)),
            "form" => {
                let mut monos = Vec::new();
                for term in rest.split(';') {
                    let (c, e) = term.split_once(':').ok_or_else(|| Error::Parse(format!("monomial {term:?}")))?;
                    let c: BigInt = c.trim().parse().map_err(|_| Error::Parse(format!("coefficient {c:?}")))?;
                    let e = e
                        .split(',')
                        .map(|x| x.trim().parse::<u32>().map_err(|_| Error::Parse(format!("exponent {x:?}"))))
                        .collect::<Result<Vec<_>>>()?;
                    monos.push((c, e));
                }
                Self::new(monos)
            }
            _ => Err(Error::Parse(format!("unknown norm form {kind:?}"))),
        }
    }

    fn check_arity(&self, n: usize) -> Result<()> {
        if n != self.vars {
            return Err(Error::ArityMismatch { expected: self.vars, got: n });
        }
        Ok(())
    }

    pub fn eval(&self, z: &[BigInt]) -> Result<BigInt> {
        self.check_arity(z.len())?;
        let mut total = BigInt::zero();
        for (c, e) in &self.monomials {
            let mut term = c.clone();
            for (x, &k) in z.iter().zip(e) {
                term *= x.pow(k);
            }
            total += term;
        }
        Ok(total)
    }

    /// Small-coordinate evaluation; `None` on overflow.
    fn eval_i128(&self, z: &[i64]) -> Option<i128> {
        let mut total: i128 = 0;
        for (c, e) in &self.monomials {
            let mut term = c.to_i128()?;
            for (&x, &k) in z.iter().zip(e) {
                term = term.checked_mul((x as i128).checked_pow(k)?)?;
            }
            total = total.checked_add(term)?;
        }
        Some(total)
    }

    pub fn eval_i64(&self, z: &[i64]) -> Result<BigInt> {
        self.check_arity(z.len())?;
        match self.eval_i128(z) {
            Some(v) => Ok(BigInt::from(v)),
            None => self.eval(&z.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>()),
        }
    }

    /// Coordinate product `z ∘ w` with `Ψ(z ∘ w) = Ψ(z) Ψ(w)`.
    pub fn ring_mul(&self, z: &[BigInt], w: &[BigInt]) -> Result<Vec<BigInt>> {
        let preset = self.preset.ok_or_else(|| Error::NoRingStructure(self.to_string()))?;
        self.check_arity(z.len())?;
        self.check_arity(w.len())?;
        Ok(match preset {
            Preset::Quadratic { a } => {
                let a = BigInt::from(a);
                vec![&z[0] * &w[0] + &a * &z[1] * &w[1], &z[0] * &w[1] + &z[1] * &w[0]]
            }
            Preset::Cubic { a } => {
                let a = BigInt::from(a);
                let (x1, y1, z1) = (&z[0], &z[1], &z[2]);
                let (x2, y2, z2) = (&w[0], &w[1], &w[2]);
                vec![
                    x1 * x2 + &a * (y1 * z2 + z1 * y2),
                    x1 * y2 + y1 * x2 + &a * z1 * z2,
                    x1 * z2 + y1 * y2 + z1 * x2,
                ]
            }
        })
    }
}

/// Values `|Ψ(z)| ∈ (0, V]` found in the box `[−B, B]^vars`, each with its
/// lexicographically least witness.
#[derive(Debug, Clone)]
pub struct RepresentedSet {
    pub form: NormForm,
    pub box_b: i64,
    pub limit: BigInt,
    values: Vec<BigInt>,
    witnesses: Vec<Vec<i64>>,
}

impl RepresentedSet {
    pub fn values(&self) -> &[BigInt] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn witness(&self, v: &BigInt) -> Option<&[i64]> {
        self.values.binary_search(v).ok().map(|i| self.witnesses[i].as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BigInt, &[i64])> {
        self.values.iter().zip(self.witnesses.iter().map(|w| w.as_slice()))
    }

    /// Always under-approximate: values may have witnesses outside the box.
    pub fn exactness(&self) -> Exactness {
        Exactness::UnderApproximate
    }
}

impl Set for RepresentedSet {
    fn descriptor(&self) -> String {
        format!("normform({}, B={}, V={})", self.form, self.box_b, self.limit)
    }

    fn contains(&self, x: &BigInt) -> Result<bool> {
        Ok(self.values.binary_search(x).is_ok())
    }

    fn exactness(&self) -> Option<Exactness> {
        Some(Exactness::UnderApproximate)
    }

    fn enumerate_upto(&self, bound: &BigInt) -> Result<Vec<BigInt>> {
        let end = self.values.partition_point(|x| x <= bound);
        Ok(self.values[..end].to_vec())
    }
}

/// Positive values `|Ψ(z)| <= V` over the box `[-B, B]^vars`, each with its
/// lex-least witness `z`.
pub fn enumerate_represented(form: &NormForm, b: i64, v: &BigInt) -> Result<RepresentedSet> {
    if b < 0 {
        return Err(Error::InvalidArgument("box must be non-negative".into()));
    }
    let side = 2 * b as u64 + 1;
    let points = side.checked_pow(form.vars as u32).filter(|&p| p <= MAX_BOX_POINTS);
    if points.is_none() {
        return Err(Error::WindowTooLarge { size: side.saturating_pow(form.vars as u32), cap: MAX_BOX_POINTS });
    }
    let leading: Vec<i64> = (-b..=b).collect();
    let parts = crate::par::map_collect(leading, |x0| -> Result<BTreeMap<BigInt, Vec<i64>>> {
        let mut found: BTreeMap<BigInt, Vec<i64>> = BTreeMap::new();
        let mut z = vec![-b; form.vars];
        z[0] = x0;
        loop {
            let val = form.eval_i64(&z)?.abs();
            if val.is_positive() && &val <= v {
                found.entry(val).or_insert_with(|| z.clone());
            }
            // odometer over coordinates 1.., last coordinate fastest
            let mut i = form.vars;
            loop {
                if i == 1 {
                    return Ok(found);
                }
                i -= 1;
                if z[i] < b {
                    z[i] += 1;
                    break;
                }
                z[i] = -b;
            }
        }
    });
    let mut merged: BTreeMap<BigInt, Vec<i64>> = BTreeMap::new();
    for part in parts {
        for (k, w) in part? {
            merged.entry(k).or_insert(w);
        }
    }
    let (values, witnesses) = merged.into_iter().unzip();
    Ok(RepresentedSet { form: form.clone(), box_b: b, limit: v.clone(), values, witnesses })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosureReport {
    pub pairs: usize,
    pub in_set: usize,
    /// Products recovered through the coordinate product of witnesses.
    pub via_ring_mul: usize,
    pub failures: Vec<(String, String)>,
    pub note: String,
}

/// Samples pairs `u, v` and checks that `uv` is represented: by lookup when
/// `uv <= V`, otherwise (or if the lookup misses) through `ring_mul` of the
/// stored witnesses.
pub fn closure_check(r: &RepresentedSet, samples: usize, seed: u64) -> Result<ClosureReport> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let vals = r.values();
    let mut report = ClosureReport {
        pairs: 0,
        in_set: 0,
        via_ring_mul: 0,
        failures: Vec::new(),
        note: "the enumeration is an under-approximation of the represented set".into(),
    };
    if vals.is_empty() {
        return Ok(report);
    }
    let big = |w: &[i64]| w.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
    for _ in 0..samples {
        let (i, j) = (rng.gen_range(0..vals.len()), rng.gen_range(0..vals.len()));
        let prod = &vals[i] * &vals[j];
        report.pairs += 1;
        if prod <= r.limit && r.contains(&prod)? {
            report.in_set += 1;
            continue;
        }
        let z = r.form.ring_mul(&big(&r.witnesses[i]), &big(&r.witnesses[j]))?;
        if r.form.eval(&z)?.abs() == prod {
            report.via_ring_mul += 1;
        } else {
            report.failures.push((vals[i].to_string(), vals[j].to_string()));
        }
    }
    Ok(report)
}

/// Longest AP among represented values in `[1, hi)`; `None` below `target_len`.
pub fn ap_search(r: &RepresentedSet, target_len: u64, hi: &BigInt) -> Result<Option<ApCert>> {
    let top: BigInt = (&r.limit + 1u32).min(hi.clone());
    longest_ap(r, &BigInt::from(1), &top, target_len)
}

#[derive(Debug, Clone, Serialize)]
pub struct PrimeDensity {
    pub n: u64,
    pub primes: u64,
    pub represented: u64,
    pub ratio: String,
    pub ratio_f64: f64,
    pub under_approximate: bool,
}

/// `|R ∩ P ∩ [1, N]| / |P ∩ [1, N]|`.
pub fn prime_relative_density(r: &RepresentedSet, n: u64) -> Result<PrimeDensity> {
    if BigInt::from(n) > r.limit {
        return Err(Error::InvalidArgument(format!("N = {n} exceeds the enumeration limit {}", r.limit)));
    }
    let n32 = u32::try_from(n).map_err(|_| Error::InvalidArgument("N must fit in 32 bits".into()))?;
    let primes = primes_upto(n32);
    let hit = primes.iter().filter(|&&p| r.values.binary_search(&BigInt::from(p)).is_ok()).count() as u64;
    let total = primes.len() as u64;
    let ratio = if total == 0 { BigRational::zero() } else { BigRational::new(hit.into(), total.into()) };
    Ok(PrimeDensity {
        n,
        primes: total,
        represented: hit,
        ratio: format!("{}/{}", ratio.numer(), ratio.denom()),
        ratio_f64: ratio.to_f64().unwrap_or(0.0),
        under_approximate: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn cubic_values() {
        let f = NormForm::cubic(2);
        assert_eq!(f.eval(&b(&[1, 0, 0])).unwrap(), BigInt::from(1));
        assert_eq!(f.eval(&b(&[0, 1, 0])).unwrap(), BigInt::from(2));
        assert_eq!(f.eval(&b(&[1, 1, 1])).unwrap(), BigInt::from(1));
        assert!(matches!(f.eval(&b(&[1, 1])), Err(Error::ArityMismatch { expected: 3, got: 2 })));
    }

    #[test]
    fn ring_products() {
        let f = NormForm::cubic(2);
        let w = b(&[3, -1, 4]);
        assert_eq!(f.ring_mul(&b(&[1, 0, 0]), &w).unwrap(), w);
        assert_eq!(f.ring_mul(&b(&[0, 1, 0]), &b(&[0, 1, 0])).unwrap(), b(&[0, 0, 1]));
        assert_eq!(f.ring_mul(&b(&[0, 1, 0]), &b(&[0, 0, 1])).unwrap(), b(&[2, 0, 0]));
        let user = NormForm::parse("form:1:2,0;1:0,2").unwrap();
        assert!(matches!(user.ring_mul(&b(&[1, 0]), &b(&[1, 0])), Err(Error::NoRingStructure(_))));
    }

    #[test]
    fn multiplicativity_on_small_boxes() {
        for f in [NormForm::quadratic(-1), NormForm::quadratic(2), NormForm::quadratic(5), NormForm::cubic(2), NormForm::cubic(3)] {
            let r = if f.vars == 2 { 5 } else { 2 };
            let pts: Vec<Vec<BigInt>> = if f.vars == 2 {
                (-r..=r).flat_map(|x| (-r..=r).map(move |y| b(&[x, y]))).collect()
            } else {
                (-r..=r).flat_map(|x| (-r..=r).flat_map(move |y| (-r..=r).map(move |z| b(&[x, y, z])))).collect()
            };
            for z in &pts {
                for w in &pts {
                    let lhs = f.eval(&f.ring_mul(z, w).unwrap()).unwrap();
                    assert_eq!(lhs, f.eval(z).unwrap() * f.eval(w).unwrap(), "{f} {z:?} {w:?}");
                }
            }
        }
    }

    #[test]
    fn two_squares() {
        let r = enumerate_represented(&NormForm::quadratic(-1), 10, &BigInt::from(50)).unwrap();
        for v in [1, 2, 4, 5, 8, 9, 10, 13, 50] {
            assert!(r.contains(&BigInt::from(v)).unwrap(), "{v}");
        }
        for v in [3, 7, 21] {
            assert!(!r.contains(&BigInt::from(v)).unwrap(), "{v}");
        }
        let brute: Vec<BigInt> = (1..=50i64).filter(|&n| (0..8).any(|x| (0..8).any(|y| x * x + y * y == n))).map(BigInt::from).collect();
        assert_eq!(r.values(), brute.as_slice());
        for (v, w) in r.iter() {
            assert_eq!(&r.form.eval_i64(w).unwrap().abs(), v);
        }
        assert_eq!(r.witness(&BigInt::from(1)).unwrap(), &[-10i64 + 9, 0][..]);
    }

    #[test]
    fn cubic_contains_cubes_and_two() {
        let r = enumerate_represented(&NormForm::cubic(2), 20, &BigInt::from(100)).unwrap();
        for x in 1..=4 {
            assert!(r.contains(&BigInt::from(x * x * x)).unwrap());
        }
        assert!(r.contains(&BigInt::from(2)).unwrap());
    }

    #[test]
    fn closure_through_witnesses() {
        let r = enumerate_represented(&NormForm::cubic(2), 6, &BigInt::from(2000)).unwrap();
        let c = closure_check(&r, 100, 7).unwrap();
        assert_eq!(c.pairs, 100);
        assert!(c.failures.is_empty());
        assert_eq!(c.in_set + c.via_ring_mul, 100);
    }

    #[test]
    fn ap_and_prime_density() {
        let q = enumerate_represented(&NormForm::quadratic(-1), 100, &BigInt::from(10_000)).unwrap();
        let ap = ap_search(&q, 4, &BigInt::from(10_001)).unwrap().unwrap();
        assert!(ap.length >= 4);
        let d = prime_relative_density(&q, 10_000).unwrap();
        assert!((d.ratio_f64 - 0.5).abs() < 0.05, "{}", d.ratio_f64);
        let c = enumerate_represented(&NormForm::cubic(2), 22, &BigInt::from(10_000)).unwrap();
        assert!(ap_search(&c, 3, &BigInt::from(10_001)).unwrap().is_some());
        assert!(prime_relative_density(&c, 10_000).unwrap().represented > 0);
        assert!(prime_relative_density(&c, 10_001).is_err());
        let lin = enumerate_represented(&NormForm::parse("form:1:1").unwrap(), 10, &BigInt::from(10)).unwrap();
        let ap = ap_search(&lin, 1, &BigInt::from(11)).unwrap().unwrap();
        assert_eq!((ap.start.as_str(), ap.step.as_str(), ap.length), ("1", "1", 10));
        assert_eq!(prime_relative_density(&lin, 10).unwrap().ratio, "1/1");
    }

    #[test]
    fn box_cap() {
        assert!(enumerate_represented(&NormForm::cubic(2), 400, &BigInt::from(10)).is_err());
    }
}
