//! Finite fields `F_q`, `q = p^m <= 2^20`, with elements encoded as integers
//! `Σ c_i p^i` (coefficients of `1, t, ..., t^{m-1}`), and brute-force
//! verification of the k-th power translation property.

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::arithfun::{factor_u64, is_prime_u64};
use crate::error::{Error, Result};

pub const MAX_FIELD_ORDER: u64 = 1 << 20;

/// Descriptor of a constructed field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldSpec {
    pub p: u64,
    pub m: u32,
    /// Coefficients `c_0..c_{m-1}` of the monic modulus `t^m + Σ c_i t^i`.
    pub modulus: Vec<u64>,
    pub q: u64,
}

pub struct Field {
    spec: FieldSpec,
    primitive: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "F_{}", self.spec.q)
    }
}

fn digits(mut x: u64, p: u64, m: u32) -> Vec<u64> {
    (0..m)
        .map(|_| {
            let d = x % p;
            x /= p;
            d
        })
        .collect()
}

fn undigits(ds: &[u64], p: u64) -> u64 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// `a·b mod modulus` on coefficient vectors (modulus monic, implicit leading 1).
fn poly_mulmod(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let m = modulus.len();
    let mut prod = vec![0u64; 2 * m];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for d in (m..2 * m).rev() {
        let c = prod[d];
        if c == 0 {
            continue;
        }
        prod[d] = 0;
        // t^m = -Σ modulus_i t^i
        for (i, &mi) in modulus.iter().enumerate() {
            prod[d - m + i] = (prod[d - m + i] + (p - mi % p) * c) % p;
        }
    }
    prod.truncate(m);
    prod
}

/// Remainder of `a` by monic `b` (both as full coefficient vectors, `b` including its leading 1).
fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let c = *r.last().expect("non-empty");
        let shift = r.len() - 1 - db;
        for (i, &bi) in b.iter().enumerate() {
            r[shift + i] = (r[shift + i] + (p - bi) * c) % p;
        }
        r.pop();
    }
    r
}

fn is_irreducible(modulus: &[u64], p: u64) -> bool {
    let m = modulus.len();
    let mut full = modulus.to_vec();
    full.push(1);
    for d in 1..=m / 2 {
        let count = p.pow(d as u32);
        for enc in 0..count {
            let mut g = digits(enc, p, d as u32);
            g.push(1);
            if poly_rem(&full, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// `(p, m)` with `q = p^m`, or an error if `q` is not a prime power.
pub fn prime_power(q: u64) -> Result<(u64, u32)> {
    if q < 2 {
        return Err(Error::InvalidArgument(format!("{q} is not a field order")));
    }
    let fs = factor_u64(q);
    let p = fs[0];
    if fs.iter().any(|&f| f != p) {
        return Err(Error::InvalidArgument(format!("{q} is not a prime power")));
    }
    Ok((p, fs.len() as u32))
}

impl Field {
    /// Builds `F_{p^m}` with the least monic irreducible modulus, ordered by
    /// the encoding of its lower coefficients.
    pub fn new(p: u64, m: u32) -> Result<Self> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        if m == 0 {
            return Err(Error::InvalidArgument("extension degree must be at least 1".into()));
        }
        let q = p
            .checked_pow(m)
            .filter(|&q| q <= MAX_FIELD_ORDER)
            .ok_or_else(|| Error::InvalidArgument(format!("{p}^{m} exceeds 2^20")))?;
        let modulus = if m == 1 {
            vec![0]
        } else {
            (0..p.pow(m))
                .map(|enc| digits(enc, p, m))
                .find(|c| is_irreducible(c, p))
                .ok_or_else(|| Error::Internal(format!("no irreducible of degree {m} over F_{p}")))?
        };
        let spec = FieldSpec { p, m, modulus, q };
        let order = q - 1;
        let prime_factors = {
            let mut f = if order > 1 { factor_u64(order) } else { Vec::new() };
            f.dedup();
            f
        };
        let naive_pow = |x: u64, mut e: u64| {
            let mut base = digits(x, p, m);
            let mut acc = digits(1, p, m);
            while e > 0 {
                if e & 1 == 1 {
                    acc = poly_mulmod(&acc, &base, &spec.modulus, p);
                }
                base = poly_mulmod(&base, &base, &spec.modulus, p);
                e >>= 1;
            }
            undigits(&acc, p)
        };
        let primitive = (1..q)
            .find(|&g| prime_factors.iter().all(|&r| naive_pow(g, order / r) != 1))
            .ok_or_else(|| Error::Internal(format!("no primitive element in F_{q}")))? as u32;
        let mut exp = Vec::with_capacity(2 * order as usize);
        let mut log = vec![0u32; q as usize];
        let gd = digits(primitive as u64, p, m);
        let mut cur = digits(1, p, m);
        for i in 0..order {
            let v = undigits(&cur, p);
            exp.push(v as u32);
            log[v as usize] = i as u32;
            cur = poly_mulmod(&cur, &gd, &spec.modulus, p);
        }
        if undigits(&cur, p) != 1 {
            return Err(Error::Internal(format!("primitive element of F_{q} has wrong order")));
        }
        exp.extend_from_within(..);
        Ok(Self { spec, primitive, exp, log })
    }

    pub fn with_order(q: u64) -> Result<Self> {
        let (p, m) = prime_power(q)?;
        Self::new(p, m)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn order(&self) -> u64 {
        self.spec.q
    }

    pub fn characteristic(&self) -> u64 {
        self.spec.p
    }

    pub fn primitive(&self) -> u32 {
        self.primitive
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        let p = self.spec.p;
        if self.spec.m == 1 {
            return ((a as u64 + b as u64) % p) as u32;
        }
        let (mut a, mut b) = (a as u64, b as u64);
        let (mut out, mut place) = (0u64, 1u64);
        for _ in 0..self.spec.m {
            out += ((a % p + b % p) % p) * place;
            a /= p;
            b /= p;
            place *= p;
        }
        out as u32
    }

    pub fn neg(&self, a: u32) -> u32 {
        let p = self.spec.p;
        let mut a = a as u64;
        let (mut out, mut place) = (0u64, 1u64);
        for _ in 0..self.spec.m {
            out += ((p - a % p) % p) * place;
            a /= p;
            place *= p;
        }
        out as u32
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let n = (self.spec.q - 1) as u32;
        Some(self.exp[((n - self.log[a as usize]) % n) as usize])
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = self.spec.q - 1;
        self.exp[((self.log[a as usize] as u64 * (e % n)) % n) as usize]
    }

    /// Discrete logarithm to the base of [`Field::primitive`].
    pub fn log(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.log[a as usize])
    }

    pub fn exp(&self, i: u64) -> u32 {
        self.exp[(i % (self.spec.q - 1)) as usize]
    }

    /// Multiplicative order of a nonzero element.
    pub fn element_order(&self, a: u32) -> Option<u64> {
        let n = self.spec.q - 1;
        self.log(a).map(|l| n / n.gcd(&(l as u64)))
    }

    /// Checks the field axioms on `samples` random triples.
    pub fn spot_check_axioms(&self, samples: usize, seed: u64) -> Result<()> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let q = self.spec.q as u32;
        for _ in 0..samples {
            let (a, b, c) = (rng.gen_range(0..q), rng.gen_range(0..q), rng.gen_range(0..q));
            let ok = self.add(a, self.add(b, c)) == self.add(self.add(a, b), c)
                && self.mul(a, self.mul(b, c)) == self.mul(self.mul(a, b), c)
                && self.add(a, b) == self.add(b, a)
                && self.mul(a, b) == self.mul(b, a)
                && self.mul(a, self.add(b, c)) == self.add(self.mul(a, b), self.mul(a, c))
                && self.add(a, self.neg(a)) == 0
                && self.add(a, 0) == a
                && self.mul(a, 1) == a
                && (a == 0 || self.mul(a, self.inv(a).expect("nonzero")) == 1);
            if !ok {
                return Err(Error::Internal(format!("field axiom failed in F_{q} at ({a},{b},{c})")));
            }
        }
        Ok(())
    }
}

/// `F_{p^m}` with axioms spot-checked on 1000 triples.
pub fn field_build(p: u64, m: u32) -> Result<Field> {
    let f = Field::new(p, m)?;
    f.spot_check_axioms(1000, p ^ ((m as u64) << 32))?;
    Ok(f)
}

/// The subgroup `Γ` of nonzero k-th powers.
#[derive(Debug, Clone, Serialize)]
pub struct PowerSubgroup {
    pub k: u64,
    pub q: u64,
    /// `gcd(k, q − 1)`, the index of `Γ` in `F_q^*`.
    pub index: u64,
    /// Sorted by encoding.
    pub elements: Vec<u32>,
}

impl PowerSubgroup {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: u32) -> bool {
        self.elements.binary_search(&x).is_ok()
    }
}

pub fn kth_power_subgroup(field: &Field, k: u64) -> Result<PowerSubgroup> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let n = field.order() - 1;
    let index = k.gcd(&n);
    let mut elements: Vec<u32> = (0..n / index).map(|j| field.exp(j * index)).collect();
    elements.sort_unstable();
    Ok(PowerSubgroup { k, q: field.order(), index, elements })
}

/// Whether `y ∈ gΓ`, where `Γ` has index `index`.
fn in_coset(field: &Field, index: u64, g: u32, y: u32) -> bool {
    match (field.log(y), field.log(g)) {
        (Some(ly), Some(lg)) => (ly as u64 + index * field.order() - lg as u64) % index == 0,
        _ => false,
    }
}

/// Least nonzero `x` (by encoding) with `x^k + F ⊆ gΓ`.
pub fn witness_translate(field: &Field, k: u64, f: &[u32], g: u32) -> Result<Option<u32>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let q = field.order();
    if g == 0 || g as u64 >= q {
        return Err(Error::InvalidArgument(format!("coset representative {g} is not a nonzero element of F_{q}")));
    }
    if let Some(&bad) = f.iter().find(|&&v| v as u64 >= q) {
        return Err(Error::InvalidArgument(format!("{bad} is not an element of F_{q}")));
    }
    let index = k.gcd(&(q - 1));
    Ok((1..q as u32).find(|&x| {
        let xk = field.pow(x, k);
        f.iter().all(|&v| in_coset(field, index, g, field.add(xk, v)))
    }))
}

/// Certificate for `x^k + F ⊆ gΓ`, carrying the modulus so the field can be
/// rebuilt independently.
pub fn witness_certificate(field: &Field, k: u64, f: &[u32], g: u32, x: u32) -> crate::certificate::Certificate {
    let spec = field.spec();
    crate::certificate::Certificate::FieldWitness {
        p: spec.p,
        m: spec.m,
        modulus: spec.modulus.clone(),
        k,
        g,
        f: f.to_vec(),
        x,
    }
}

/// Which fields an empirical threshold scan covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldFamily {
    Prime,
    All,
}

impl std::str::FromStr for FieldFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prime" => Ok(Self::Prime),
            "all" => Ok(Self::All),
            _ => Err(Error::Parse(format!("field family must be prime|all, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldFailure {
    pub q: u64,
    /// A set `F` with no `x ≠ 0` such that `x^k + F ⊆ Γ`.
    #[serde(rename = "F")]
    pub f: Vec<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub n: usize,
    pub k: u64,
    pub qmin: u64,
    pub qmax: u64,
    pub family: FieldFamily,
    pub fields_checked: usize,
    /// Least `Q` such that every field in range with `q >= Q` passes.
    pub threshold: Option<u64>,
    pub failures: Vec<FieldFailure>,
    pub note: String,
}

pub const DEFAULT_THRESHOLD_BUDGET: u64 = 1 << 36;

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Self(vec![0; len.div_ceil(64)])
    }
    fn set(&mut self, i: u32) {
        self.0[i as usize / 64] |= 1 << (i % 64);
    }
    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
    fn ones(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                (w != 0).then(|| {
                    let b = w.trailing_zeros();
                    w &= w - 1;
                    wi as u32 * 64 + b
                })
            })
        })
    }
}

/// Searches one field for a set `F` of size `min(n, q)` with no translate
/// `x^k + F ⊆ Γ`. Returns the first failing set found.
///
/// Symmetry used: for `c ∈ Γ`, `x^k + cF ⊆ Γ ⟺ (x^k/c) + F ⊆ Γ`, and
/// `x^k/c` is again a nonzero k-th power. Every `Γ`-orbit of sets therefore
/// contains a set holding `0` or a representative `g^j` (`0 <= j < index`)
/// of a coset of `Γ`, so only such sets are scanned.
fn field_failure(field: &Field, k: u64, n: usize) -> Option<Vec<u32>> {
    let q = field.order() as usize;
    let index = k.gcd(&(q as u64 - 1));
    let size = n.min(q);
    let mut gamma = Bits::new(q);
    for j in 0..(q as u64 - 1) / index {
        gamma.set(field.exp(j * index));
    }
    // reach[f] = {t : t + f ∈ Γ}
    let reach: Vec<Bits> = (0..q as u32)
        .map(|f| {
            let mut b = Bits::new(q);
            for y in gamma.ones() {
                b.set(field.sub(y, f));
            }
            b
        })
        .collect();
    let full_words = {
        let mut b = Bits::new(q);
        for i in 0..q as u32 {
            b.set(i);
        }
        b.0
    };
    let mut anchors = vec![0u32];
    anchors.extend((0..index).map(|j| field.exp(j)));

    fn extend(
        set: &mut Vec<u32>,
        feasible: &Bits,
        start: u32,
        size: usize,
        q: u32,
        reach: &[Bits],
        full: &[u64],
    ) -> Option<Vec<u32>> {
        if feasible.is_empty() {
            return Some(set.clone());
        }
        if set.len() == size {
            return None;
        }
        if set.len() + 1 == size {
            // a last element f fails iff it avoids every reach[t], t feasible
            let mut cover = vec![0u64; full.len()];
            for t in feasible.ones() {
                for (c, r) in cover.iter_mut().zip(&reach[t as usize].0) {
                    *c |= r;
                }
                if cover == full {
                    return None;
                }
            }
            // reach is symmetric: t + f ∈ Γ ⟺ f ∈ reach[t]
            let missing = (0..q).find(|&f| cover[f as usize / 64] >> (f % 64) & 1 == 0)?;
            let mut out = set.clone();
            out.push(missing);
            return Some(out);
        }
        for f in start..q {
            if set.contains(&f) {
                continue;
            }
            set.push(f);
            let next = feasible.and(&reach[f as usize]);
            let r = extend(set, &next, f + 1, size, q, reach, full);
            set.pop();
            if r.is_some() {
                return r;
            }
        }
        None
    }

    for &a in &anchors {
        let mut set = vec![a];
        let feasible = gamma.and(&reach[a as usize]);
        if let Some(mut fail) = extend(&mut set, &feasible, 0, size, q as u32, &reach, &full_words) {
            fail.sort_unstable();
            fail.dedup();
            return Some(fail);
        }
    }
    None
}

fn binom(n: u64, k: u64) -> u64 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r.min(u64::MAX as u128) as u64
}

/// Scans every field with `qmin <= q <= qmax` in the family and returns the
/// least `Q` above which all of them admit, for every `F` with `|F| <= n`,
/// some `x ≠ 0` with `x^k + F ⊆ Γ`.
pub fn empirical_threshold(
    n: usize,
    k: u64,
    qmin: u64,
    qmax: u64,
    family: FieldFamily,
    budget: u64,
) -> Result<ThresholdReport> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidArgument("n and k must be at least 1".into()));
    }
    if qmax > MAX_FIELD_ORDER {
        return Err(Error::InvalidArgument(format!("qmax {qmax} exceeds 2^20")));
    }
    let orders: Vec<u64> = (qmin.max(2)..=qmax)
        .filter(|&q| match family {
            FieldFamily::Prime => is_prime_u64(q),
            FieldFamily::All => prime_power(q).is_ok(),
        })
        .collect();
    let cost: u64 = orders
        .iter()
        .map(|&q| {
            let index = k.gcd(&(q - 1));
            let size = (n as u64).min(q);
            (index + 1)
                .saturating_mul(binom(q - 1, size.saturating_sub(1)))
                .saturating_mul(q.div_ceil(64))
        })
        .fold(0u64, |a, b| a.saturating_add(b));
    if cost > budget {
        return Err(Error::BudgetExceeded(format!(
            "threshold scan needs about {cost} word operations, budget is {budget}"
        )));
    }
    let results = crate::par::map_collect(orders.clone(), |q| -> Result<Option<FieldFailure>> {
        let field = Field::with_order(q)?;
        Ok(field_failure(&field, k, n).map(|f| FieldFailure { q, f }))
    });
    let mut failures = Vec::new();
    for r in results {
        if let Some(f) = r? {
            failures.push(f);
        }
    }
    let threshold = match failures.last() {
        None => orders.first().copied(),
        Some(last) => orders.iter().copied().find(|&q| q > last.q),
    };
    Ok(ThresholdReport {
        n,
        k,
        qmin,
        qmax,
        family,
        fields_checked: orders.len(),
        threshold,
        failures,
        note: "range-relative observation; not a bound on the true threshold".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modpow(mut b: u64, mut e: u64, p: u64) -> u64 {
        let mut r = 1 % p;
        b %= p;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    }

    /// Independent oracle for prime fields: Euler-style power test and plain
    /// modular arithmetic, over every set of size exactly `min(n, p)`.
    fn prime_field_fails(p: u64, k: u64, n: usize) -> bool {
        let d = k.gcd(&(p - 1));
        let is_power = |y: u64| y % p != 0 && modpow(y, (p - 1) / d, p) == 1;
        let size = n.min(p as usize);
        let mut idx: Vec<u64> = (0..size as u64).collect();
        loop {
            let ok = (1..p).any(|x| {
                let xk = modpow(x, k, p);
                idx.iter().all(|&f| is_power(xk + f))
            });
            if !ok {
                return true;
            }
            // next combination
            let mut i = size;
            loop {
                if i == 0 {
                    return false;
                }
                i -= 1;
                if idx[i] < p - (size - i) as u64 {
                    idx[i] += 1;
                    for j in i + 1..size {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    #[test]
    fn small_fields() {
        let f7 = field_build(7, 1).unwrap();
        assert_eq!(f7.add(1, 6), 0);
        assert_eq!(f7.mul(3, 5), 1);
        let f4 = field_build(2, 2).unwrap();
        assert_eq!(f4.spec().modulus, vec![1, 1]);
        // t = 2, t + 1 = 3
        assert_eq!(f4.mul(2, 2), 3);
        let f9 = field_build(3, 2).unwrap();
        assert_eq!(f9.element_order(f9.primitive()), Some(8));
        let brute_order = |g: u32| (1..=8u64).find(|&e| f9.pow(g, e) == 1).unwrap();
        assert_eq!(brute_order(f9.primitive()), 8);
        assert!(Field::new(6, 1).is_err());
        assert!(Field::with_order(12).is_err());
    }

    #[test]
    fn moduli_are_irreducible_and_least() {
        for (p, m) in [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (5, 2), (7, 2), (2, 8), (3, 4)] {
            let f = Field::new(p, m).unwrap();
            let c = &f.spec().modulus;
            // no root in F_p for degree > 1 (necessary check)
            for r in 0..p {
                let v = c.iter().rev().fold(1u64, |acc, &ci| (acc * r + ci) % p);
                assert_ne!(v, 0, "p={p} m={m} root {r}");
            }
            let enc = undigits(c, p);
            for smaller in 0..enc {
                assert!(!is_irreducible(&digits(smaller, p, m), p));
            }
            f.spot_check_axioms(1000, 1).unwrap();
        }
    }

    #[test]
    fn power_subgroups() {
        let f7 = Field::new(7, 1).unwrap();
        let g = kth_power_subgroup(&f7, 2).unwrap();
        assert_eq!((g.elements.clone(), g.index), (vec![1, 2, 4], 2));
        assert_eq!(kth_power_subgroup(&f7, 1).unwrap().len(), 6);
        let g3 = kth_power_subgroup(&f7, 3).unwrap();
        assert_eq!((g3.elements.clone(), g3.index), (vec![1, 6], 3));
    }

    #[test]
    fn subgroup_closure_and_size() {
        for q in [2u64, 3, 4, 5, 7, 8, 9, 16, 25, 27, 32, 49, 64, 81, 125, 128, 243, 256, 343, 512, 625, 729, 1021, 1024] {
            let f = Field::with_order(q).unwrap();
            for k in 1..=6 {
                let g = kth_power_subgroup(&f, k).unwrap();
                assert_eq!(g.len() as u64 * g.index, q - 1);
                let direct: std::collections::BTreeSet<u32> = (1..q as u32).map(|x| f.pow(x, k)).collect();
                assert_eq!(direct.into_iter().collect::<Vec<_>>(), g.elements);
                if q <= 256 {
                    for &a in &g.elements {
                        assert!(g.contains(f.inv(a).unwrap()));
                        for &b in &g.elements {
                            assert!(g.contains(f.mul(a, b)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn witnesses() {
        let f7 = Field::new(7, 1).unwrap();
        assert_eq!(witness_translate(&f7, 2, &[1], 1).unwrap(), Some(1));
        assert_eq!(witness_translate(&f7, 2, &[], 1).unwrap(), Some(1));
        let f3 = Field::new(3, 1).unwrap();
        assert_eq!(witness_translate(&f3, 2, &[1], 1).unwrap(), None);
    }

    #[test]
    fn per_field_failure_matches_oracle() {
        for p in crate::arithfun::primes_upto(60).into_iter().map(u64::from) {
            for (n, k) in [(1usize, 2u64), (2, 2), (1, 3), (3, 2), (2, 3), (1, 1), (2, 1)] {
                let f = Field::new(p, 1).unwrap();
                let fast = field_failure(&f, k, n);
                assert_eq!(fast.is_some(), prime_field_fails(p, k, n), "p={p} n={n} k={k}");
                if let Some(bad) = fast {
                    assert_eq!(witness_translate(&f, k, &bad, 1).unwrap(), None);
                }
            }
        }
    }

    #[test]
    fn extension_field_failures_match_direct_scan() {
        for q in [4u64, 8, 9, 16, 25, 27] {
            let f = Field::with_order(q).unwrap();
            for (n, k) in [(1usize, 2u64), (2, 2), (1, 3)] {
                let direct = (0..q as u32).any(|a| (0..q as u32).any(|b| {
                    let set: Vec<u32> = if n == 1 { vec![a] } else { vec![a, b] };
                    witness_translate(&f, k, &set, 1).unwrap().is_none()
                }));
                assert_eq!(field_failure(&f, k, n).is_some(), direct, "q={q} n={n} k={k}");
            }
        }
    }

    #[test]
    fn threshold_k1_is_first_field() {
        let r = empirical_threshold(1, 1, 3, 200, FieldFamily::Prime, DEFAULT_THRESHOLD_BUDGET).unwrap();
        assert_eq!(r.threshold, Some(3));
        assert!(r.failures.is_empty());
    }

    #[test]
    fn threshold_squares_single_element() {
        let r = empirical_threshold(1, 2, 2, 500, FieldFamily::Prime, DEFAULT_THRESHOLD_BUDGET).unwrap();
        let t = r.threshold.unwrap();
        assert!(r.failures.iter().all(|f| f.q < t));
        assert!(r.failures.iter().any(|f| f.q == 3));
        for p in crate::arithfun::primes_upto(500).into_iter().map(u64::from) {
            assert_eq!(prime_field_fails(p, 2, 1), r.failures.iter().any(|f| f.q == p), "p={p}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            empirical_threshold(3, 2, 2, 2000, FieldFamily::Prime, 10),
            Err(Error::BudgetExceeded(_))
        ));
    }
}
