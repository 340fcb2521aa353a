//! Certificate checker. Recomputes every claim from the raw set with its own
//! arithmetic; nothing here calls into the searchers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::certificate::{Certificate, IndexedValue};
use crate::error::{Error, Result};
use crate::groundset::Set;

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub kind: String,
    pub ok: bool,
    pub claims_checked: u64,
    pub failures: Vec<String>,
}

impl VerifyReport {
    fn new(kind: &str) -> Self {
        Self { kind: kind.into(), ok: true, claims_checked: 0, failures: Vec::new() }
    }

    fn fail(&mut self, msg: String) {
        self.ok = false;
        if self.failures.len() < 32 {
            self.failures.push(msg);
        }
    }
}

/// Binary operation named by a ground string.
#[derive(Debug, Clone, Copy)]
enum Op {
    Add,
    Mul,
    AddMod(u64),
    MulMod(u64),
}

fn prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn op_of(ground: &str) -> Result<Op> {
    match ground.trim() {
        "nat+" | "int+" | "add" | "additive" => Ok(Op::Add),
        "nat*" | "mul" | "multiplicative" => Ok(Op::Mul),
        other => {
            let (tag, q) = other.split_once(':').ok_or_else(|| Error::MalformedCertificate(format!("ground {other:?}")))?;
            let q: u64 = q.parse().map_err(|_| Error::MalformedCertificate(format!("ground {other:?}")))?;
            if !prime(q) {
                return Err(Error::MalformedCertificate(format!(
                    "ground {other:?}: the checker handles prime fields only"
                )));
            }
            match tag {
                "ff+" => Ok(Op::AddMod(q)),
                "ff*" => Ok(Op::MulMod(q)),
                _ => Err(Error::MalformedCertificate(format!("ground {other:?}"))),
            }
        }
    }
}

fn apply(op: Op, a: &BigInt, b: &BigInt) -> BigInt {
    match op {
        Op::Add => a + b,
        Op::Mul => a * b,
        Op::AddMod(q) => (a + b).mod_floor(&BigInt::from(q)),
        Op::MulMod(q) => (a * b).mod_floor(&BigInt::from(q)),
    }
}

fn in_set(set: &dyn Set, x: &BigInt, report: &mut VerifyReport, claim: &str) -> bool {
    report.claims_checked += 1;
    match set.contains(x) {
        Ok(true) => true,
        Ok(false) => {
            report.fail(format!("{claim}: {x} is not in the set"));
            false
        }
        Err(e) => {
            report.fail(format!("{claim}: membership of {x} undecided ({e})"));
            false
        }
    }
}

fn not_in_set(set: &dyn Set, x: &BigInt, report: &mut VerifyReport, claim: &str) {
    report.claims_checked += 1;
    match set.contains(x) {
        Ok(false) => {}
        Ok(true) => report.fail(format!("{claim}: {x} is in the set")),
        Err(e) => report.fail(format!("{claim}: membership of {x} undecided ({e})")),
    }
}

/// Largest horizon a syndetic certificate is re-checked over.
pub const MAX_SYNDETIC_RECHECK: u64 = 1 << 26;

/// Checks `cert` against `set`. Structural problems are errors; false
/// claims are reported as failures.
pub fn verify(cert: &Certificate, set: Option<&dyn Set>) -> Result<VerifyReport> {
    let mut rep = VerifyReport::new(cert.kind());
    if let Certificate::FieldWitness { p, m, modulus, k, g, f, x } = cert {
        check_field_witness(*p, *m, modulus, *k, *g, f, *x, &mut rep)?;
        return Ok(rep);
    }
    let set = set.ok_or_else(|| Error::InvalidArgument(format!("a set is required to verify a {} certificate", cert.kind())))?;
    match cert {
        Certificate::Syndetic { ground, witness_f, lo, hi, .. } => {
            let op = op_of(ground)?;
            if witness_f.is_empty() {
                return Err(Error::MalformedCertificate("empty witness set".into()));
            }
            let span = (hi - lo).to_u64().ok_or_else(|| Error::MalformedCertificate("range".into()))?;
            if span >= MAX_SYNDETIC_RECHECK {
                return Err(Error::BudgetExceeded(format!("range of {span} points")));
            }
            let mut n = lo.clone();
            while &n <= hi {
                rep.claims_checked += 1;
                let hit = witness_f.iter().any(|f| set.contains(&apply(op, f, &n)).unwrap_or(false));
                if !hit {
                    rep.fail(format!("no f in F with f{n} in the set"));
                }
                n += 1;
            }
        }
        Certificate::ThickWitness { ground, f, x } => {
            let op = op_of(ground)?;
            for fi in f {
                in_set(set, &apply(op, fi, x), &mut rep, &format!("f = {fi}"));
            }
        }
        Certificate::IpR { ground, generators, values } => {
            check_fs(op_of(ground)?, generators, values, &mut rep)?;
            for iv in values {
                in_set(set, &iv.value, &mut rep, &format!("alpha {:?}", iv.alpha));
            }
        }
        Certificate::IpRRefutation { ground, generators, values } => {
            check_fs(op_of(ground)?, generators, values, &mut rep)?;
            for iv in values {
                not_in_set(set, &iv.value, &mut rep, &format!("alpha {:?}", iv.alpha));
            }
        }
        Certificate::Ap { start, step, length } => {
            if *length >= 2 && !step.is_positive() {
                return Err(Error::MalformedCertificate("step must be positive".into()));
            }
            let mut v = start.clone();
            for i in 0..*length {
                in_set(set, &v, &mut rep, &format!("term {i}"));
                v += step;
            }
        }
        Certificate::Gp { start, ratio, length } => {
            if *length >= 2 && ratio < &BigInt::from(2) {
                return Err(Error::MalformedCertificate("ratio must be at least 2".into()));
            }
            let mut v = start.clone();
            for i in 0..*length {
                in_set(set, &v, &mut rep, &format!("term {i}"));
                v *= ratio;
            }
        }
        Certificate::GenAp { n, s, d } => {
            for j in cube(*n, d.len())? {
                let v = d.iter().zip(&j).fold(s.clone(), |acc, (di, &ji)| acc + di * ji);
                in_set(set, &v, &mut rep, &format!("j = {j:?}"));
            }
        }
        Certificate::GeoCube { n, s, d } => {
            if d.iter().any(|x| x < &BigInt::from(2)) {
                return Err(Error::MalformedCertificate("ratios must be at least 2".into()));
            }
            for j in cube(*n, d.len())? {
                let v = d.iter().zip(&j).fold(s.clone(), |acc, (di, &ji)| acc * di.pow(ji));
                in_set(set, &v, &mut rep, &format!("j = {j:?}"));
            }
        }
        Certificate::GeoArith { n, c, a, d } => {
            for i in 1..=*n {
                let base = a + d * i;
                for j in 1..=*n {
                    in_set(set, &(c * base.pow(j)), &mut rep, &format!("(i, j) = ({i}, {j})"));
                }
            }
        }
        Certificate::CombRich { ground, matrix, alpha, s } => {
            let op = op_of(ground)?;
            let r = matrix.len();
            if r == 0 || alpha.is_empty() || alpha.iter().any(|&i| i == 0 || i > r) || alpha.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::MalformedCertificate("alpha must be a non-empty increasing subset of the rows".into()));
            }
            let cols = matrix[0].len();
            if matrix.iter().any(|row| row.len() != cols) {
                return Err(Error::MalformedCertificate("ragged matrix".into()));
            }
            for j in 0..cols {
                let mut acc = matrix[alpha[0] - 1][j].clone();
                for &i in &alpha[1..] {
                    acc = apply(op, &acc, &matrix[i - 1][j]);
                }
                in_set(set, &apply(op, s, &acc), &mut rep, &format!("column {}", j + 1));
            }
        }
        Certificate::CombLine { n, r, word } => {
            let letters: Vec<char> = word.chars().collect();
            if letters.len() != *r as usize || !letters.contains(&'*') || *n == 0 {
                return Err(Error::MalformedCertificate(format!("word {word:?}")));
            }
            for x in 1..=*n {
                let mut idx = BigInt::zero();
                for &c in &letters {
                    let l = if c == '*' { x } else { c.to_digit(36).filter(|&d| d >= 1 && d <= *n).ok_or_else(|| Error::MalformedCertificate(format!("letter {c:?}")))? };
                    idx = idx * *n + (l - 1);
                }
                in_set(set, &idx, &mut rep, &format!("star = {x}"));
            }
        }
        Certificate::FieldWitness { .. } => unreachable!("handled above"),
    }
    Ok(rep)
}

fn cube(n: u32, m: usize) -> Result<Vec<Vec<u32>>> {
    if n == 0 || m == 0 || (n as f64).powi(m as i32) > (1u64 << 22) as f64 {
        return Err(Error::MalformedCertificate(format!("cube [1,{n}]^{m} out of range")));
    }
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out.into_iter().flat_map(|p: Vec<u32>| (1..=n).map(move |j| { let mut q = p.clone(); q.push(j); q })).collect();
    }
    Ok(out)
}

/// Recomputes `s_α` for every listed `α` and checks that the list covers
/// each non-empty subset exactly once.
fn check_fs(op: Op, gens: &[BigInt], values: &[IndexedValue], rep: &mut VerifyReport) -> Result<()> {
    let r = gens.len();
    if r == 0 || r > 24 {
        return Err(Error::MalformedCertificate(format!("{r} generators")));
    }
    let mut seen = vec![false; 1 << r];
    for iv in values {
        if iv.alpha.is_empty() || iv.alpha.iter().any(|&i| i == 0 || i > r) || iv.alpha.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MalformedCertificate(format!("alpha {:?}", iv.alpha)));
        }
        let mask: usize = iv.alpha.iter().map(|i| 1usize << (i - 1)).sum();
        if std::mem::replace(&mut seen[mask], true) {
            return Err(Error::MalformedCertificate(format!("alpha {:?} listed twice", iv.alpha)));
        }
        let mut acc = gens[iv.alpha[0] - 1].clone();
        for &i in &iv.alpha[1..] {
            acc = apply(op, &acc, &gens[i - 1]);
        }
        rep.claims_checked += 1;
        if acc != iv.value {
            rep.fail(format!("alpha {:?}: listed value {} but the generators give {}", iv.alpha, iv.value, acc));
        }
    }
    if let Some(mask) = (1..1usize << r).find(|&m| !seen[m]) {
        let alpha: Vec<usize> = (0..r).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
        rep.fail(format!("alpha {alpha:?} is missing"));
    }
    Ok(())
}

// ---- prime-power field arithmetic on coefficient vectors ----

fn decode(x: u64, p: u64, m: usize) -> Vec<u64> {
    let mut v = vec![0; m];
    let mut x = x;
    for c in v.iter_mut() {
        *c = x % p;
        x /= p;
    }
    v
}

/// `a · b mod (t^m + Σ modulus_i t^i)`.
fn poly_mulmod(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let m = modulus.len();
    let mut prod = vec![0u64; 2 * m];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for d in (m..2 * m).rev() {
        let c = prod[d];
        if c != 0 {
            prod[d] = 0;
            for (i, &mi) in modulus.iter().enumerate() {
                prod[d - m + i] = (prod[d - m + i] + (p - c) * mi % p) % p;
            }
        }
    }
    prod.truncate(m);
    prod
}

fn poly_pow(a: &[u64], mut e: u64, modulus: &[u64], p: u64) -> Vec<u64> {
    let m = modulus.len();
    let mut result = vec![0; m];
    result[0] = 1;
    let mut base = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = poly_mulmod(&result, &base, modulus, p);
        }
        base = poly_mulmod(&base, &base, modulus, p);
        e >>= 1;
    }
    result
}

/// No monic factor of degree `1..=m/2`, by trial division over all monic
/// polynomials of that degree.
fn irreducible(modulus: &[u64], p: u64) -> bool {
    let m = modulus.len();
    let mut full: Vec<u64> = modulus.to_vec();
    full.push(1);
    for deg in 1..=m / 2 {
        let count = p.pow(deg as u32);
        for code in 0..count {
            let mut div = decode(code, p, deg);
            div.push(1);
            // remainder of full by monic div
            let mut rem = full.clone();
            for top in (deg..=m).rev() {
                let c = rem[top];
                if c != 0 {
                    for i in 0..=deg {
                        rem[top - deg + i] = (rem[top - deg + i] + (p - c) * div[i] % p) % p;
                    }
                }
            }
            if rem[..deg].iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

#[allow(clippy::too_many_arguments)]
fn check_field_witness(p: u64, m: u32, modulus: &[u64], k: u64, g: u32, f: &[u32], x: u32, rep: &mut VerifyReport) -> Result<()> {
    if !prime(p) || m == 0 || modulus.len() != m as usize || modulus.iter().any(|&c| c >= p) || k == 0 {
        return Err(Error::MalformedCertificate("field parameters".into()));
    }
    let q = p.checked_pow(m).filter(|&q| q <= 1 << 20).ok_or_else(|| Error::MalformedCertificate("field too large".into()))?;
    if m > 1 && !irreducible(modulus, p) {
        return Err(Error::MalformedCertificate("modulus is reducible".into()));
    }
    if g == 0 || g as u64 >= q || x == 0 || x as u64 >= q || f.iter().any(|&v| v as u64 >= q) {
        return Err(Error::MalformedCertificate("element out of range".into()));
    }
    let (md, one) = (m as usize, {
        let mut o = vec![0; m as usize];
        o[0] = 1;
        o
    });
    let modv: Vec<u64> = if m == 1 { vec![0] } else { modulus.to_vec() };
    let xk = poly_pow(&decode(x as u64, p, md), k, &modv, p);
    let g_inv = poly_pow(&decode(g as u64, p, md), q - 2, &modv, p);
    let e = (q - 1) / k.gcd(&(q - 1));
    for &fv in f {
        rep.claims_checked += 1;
        let fd = decode(fv as u64, p, md);
        let y: Vec<u64> = xk.iter().zip(&fd).map(|(a, b)| (a + b) % p).collect();
        if y.iter().all(|&c| c == 0) {
            rep.fail(format!("x^k + {fv} = 0"));
            continue;
        }
        let ratio = poly_mulmod(&y, &g_inv, &modv, p);
        if poly_pow(&ratio, e, &modv, p) != one {
            rep.fail(format!("x^k + {fv} is not in the coset g·Γ"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundset::LazySet;
    use std::sync::Arc;

    fn multiples(k: i64) -> LazySet {
        LazySet::new(format!("{k}N"), Arc::new(move |x: &BigInt| Ok(x.is_positive() && (x % k).is_zero())))
    }

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn iv(alpha: &[usize], v: i64) -> IndexedValue {
        IndexedValue { alpha: alpha.to_vec(), value: BigInt::from(v) }
    }

    #[test]
    fn ip3_for_evens_and_tampering() {
        let values = vec![iv(&[1], 2), iv(&[2], 4), iv(&[1, 2], 6), iv(&[3], 6), iv(&[1, 3], 8), iv(&[2, 3], 10), iv(&[1, 2, 3], 12)];
        let good = Certificate::IpR { ground: "nat+".into(), generators: big(&[2, 4, 6]), values: values.clone() };
        let rep = verify(&good, Some(&multiples(2))).unwrap();
        assert!(rep.ok, "{rep:?}");
        assert_eq!(rep.claims_checked, 14);
        let mut bad_values = values;
        bad_values[5].value = BigInt::from(11);
        let bad = Certificate::IpR { ground: "nat+".into(), generators: big(&[2, 4, 6]), values: bad_values };
        let rep = verify(&bad, Some(&multiples(2))).unwrap();
        assert!(!rep.ok);
        assert!(rep.failures.iter().any(|f| f.contains("[2, 3]")), "{rep:?}");
    }

    #[test]
    fn missing_alpha_fails() {
        let c = Certificate::IpR { ground: "nat+".into(), generators: big(&[2, 4]), values: vec![iv(&[1], 2), iv(&[2], 4)] };
        let rep = verify(&c, Some(&multiples(2))).unwrap();
        assert!(!rep.ok);
    }

    #[test]
    fn ap_and_gp() {
        let ap = Certificate::Ap { start: 0.into(), step: 2.into(), length: 5 };
        assert!(!verify(&ap, Some(&multiples(2))).unwrap().ok);
        let ap = Certificate::Ap { start: 2.into(), step: 2.into(), length: 5 };
        assert!(verify(&ap, Some(&multiples(2))).unwrap().ok);
        let gp = Certificate::Gp { start: 3.into(), ratio: 3.into(), length: 6 };
        assert!(verify(&gp, Some(&multiples(3))).unwrap().ok);
        assert!(!verify(&gp, Some(&multiples(9))).unwrap().ok);
    }

    #[test]
    fn field_witness_prime_and_extension() {
        // F_7, squares {1, 2, 4}; x = 1: 1 + {0, 1, 3} = {1, 2, 4}
        let ok = Certificate::FieldWitness { p: 7, m: 1, modulus: vec![0], k: 2, g: 1, f: vec![0, 1, 3], x: 1 };
        assert!(verify(&ok, None).unwrap().ok);
        let bad = Certificate::FieldWitness { p: 7, m: 1, modulus: vec![0], k: 2, g: 1, f: vec![0, 2], x: 1 };
        assert!(!verify(&bad, None).unwrap().ok);
        // F_4 = F_2[t]/(t^2 + t + 1); every nonzero element is a cube root of unity times... k = 1 means Γ = F_4^*
        let f4 = Certificate::FieldWitness { p: 2, m: 2, modulus: vec![1, 1], k: 1, g: 1, f: vec![0, 2], x: 1 };
        assert!(verify(&f4, None).unwrap().ok);
        let reducible = Certificate::FieldWitness { p: 2, m: 2, modulus: vec![1, 0], k: 1, g: 1, f: vec![0], x: 1 };
        assert!(verify(&reducible, None).is_err());
    }

    #[test]
    fn field_witness_matches_field_module() {
        use crate::finitefield::{witness_translate, Field};
        for (p, m) in [(3u64, 2u32), (5, 2), (2, 3), (13, 1)] {
            let field = Field::new(p, m).unwrap();
            for k in [2u64, 3] {
                let f = vec![0u32, 1];
                if let Some(x) = witness_translate(&field, k, &f, 1).unwrap() {
                    let spec = field.spec();
                    let c = Certificate::FieldWitness { p, m, modulus: spec.modulus.clone(), k, g: 1, f: f.clone(), x };
                    assert!(verify(&c, None).unwrap().ok, "p={p} m={m} k={k}");
                }
            }
        }
    }

    #[test]
    fn comb_line_and_cube() {
        // all words of [2]^2 as indices 0..4
        let all = LazySet::new("w", Arc::new(|x: &BigInt| Ok(!x.is_negative() && x < &BigInt::from(4))));
        let c = Certificate::CombLine { n: 2, r: 2, word: "*1".into() };
        assert!(verify(&c, Some(&all)).unwrap().ok);
        let g = Certificate::GenAp { n: 2, s: 0.into(), d: big(&[2, 4]) };
        assert!(verify(&g, Some(&multiples(2))).unwrap().ok);
        let geo = Certificate::GeoArith { n: 3, c: 2.into(), a: 1.into(), d: 1.into() };
        assert!(verify(&geo, Some(&multiples(2))).unwrap().ok);
    }

    #[test]
    fn extension_ground_is_unsupported() {
        let c = Certificate::ThickWitness { ground: "ff+:9".into(), f: big(&[1]), x: 1.into() };
        assert!(verify(&c, Some(&multiples(2))).is_err());
    }
}
