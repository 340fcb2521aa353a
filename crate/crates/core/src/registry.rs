//! Set descriptors: a small expression language naming every construction,
//! plus the JSON set literal format.
//!
//! ```text
//! set   := name | name "(" arg ("," arg)* ")"
//! arg   := set | key "=" value | value
//! ```
//! Polynomial coefficients and generator lists use `|` inside arguments,
//! e.g. `level_set(p=0|sqrt(2), hom=omega, lo=0, hi=1/4)`.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arithfun::{is_prime_u64, HpReal, Poly};
use crate::constructions::{self, ASeq, DSeq, HalfOpen, Hom};
use crate::error::{Error, Result};
use crate::groundset::{materialize, Enumerator, Exactness, IntegerWindowSet, LazySet, Membership, SetHandle, WindowJson};
use crate::normform::{enumerate_represented, NormForm};

/// Parses integers written as decimals, `a^b`, or products of those.
pub fn parse_int(s: &str) -> Result<BigInt> {
    let s = s.trim();
    let bad = || Error::Parse(format!("integer {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some(rest) = s.strip_prefix('-') {
        return Ok(-parse_int(rest)?);
    }
    let mut acc = BigInt::one();
    for factor in s.split('*') {
        let v = match factor.split_once('^') {
            Some((b, e)) => {
                let b: BigInt = b.trim().parse().map_err(|_| bad())?;
                let e: u32 = e.trim().parse().map_err(|_| bad())?;
                if e > 1 << 20 {
                    return Err(bad());
                }
                b.pow(e)
            }
            None => factor.trim().parse().map_err(|_| bad())?,
        };
        acc *= v;
    }
    Ok(acc)
}

/// Splits on commas at bracket depth zero.
fn split_top(s: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            return Err(Error::Parse(format!("unbalanced brackets in {s:?}")));
        }
        if c == ',' && depth == 0 {
            out.push(std::mem::take(&mut cur).trim().to_string());
        } else {
            cur.push(c);
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced brackets in {s:?}")));
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    Ok(out)
}

struct Args {
    positional: Vec<String>,
    named: HashMap<String, String>,
    name: String,
}

impl Args {
    fn parse(name: &str, body: &str) -> Result<Self> {
        let mut positional = Vec::new();
        let mut named = HashMap::new();
        for part in split_top(body)? {
            let eq = part.find('=');
            let paren = part.find('(');
            match eq {
                Some(i) if paren.is_none_or(|p| i < p) && part[..i].chars().all(|c| c.is_alphanumeric() || c == '_') => {
                    named.insert(part[..i].trim().to_string(), part[i + 1..].trim().to_string());
                }
                _ => positional.push(part),
            }
        }
        Ok(Self { positional, named, name: name.into() })
    }

    fn get(&self, key: &str, pos: usize) -> Option<&str> {
        self.named.get(key).map(|s| s.as_str()).or_else(|| self.positional.get(pos).map(|s| s.as_str()))
    }

    fn req(&self, key: &str, pos: usize) -> Result<&str> {
        self.get(key, pos).ok_or_else(|| Error::Parse(format!("{}: missing argument {key}", self.name)))
    }

    fn int(&self, key: &str, pos: usize) -> Result<BigInt> {
        parse_int(self.req(key, pos)?)
    }

    fn int_or(&self, key: &str, pos: usize, default: i64) -> Result<BigInt> {
        self.get(key, pos).map(parse_int).unwrap_or(Ok(BigInt::from(default)))
    }
}

fn small<T: TryFrom<BigInt>>(x: BigInt, what: &str) -> Result<T> {
    T::try_from(x.clone()).map_err(|_| Error::InvalidArgument(format!("{what} = {x} is out of range")))
}

fn residue(m: BigInt, r: BigInt) -> Result<LazySet> {
    if !m.is_positive() {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let r = r.mod_floor(&m);
    let (m2, r2) = (m.clone(), r.clone());
    let member: Membership = Arc::new(move |x: &BigInt| Ok(!x.is_negative() && x.mod_floor(&m2) == r2));
    let (m3, r3) = (m.clone(), r.clone());
    let en: Enumerator = Arc::new(move |bound: &BigInt| {
        if bound.is_negative() {
            return Ok(Vec::new());
        }
        let count = (bound / &m3).to_u64().unwrap_or(u64::MAX);
        if count > 1 << 26 {
            return Err(Error::BudgetExceeded(format!("{count} residues")));
        }
        let mut out = Vec::new();
        let mut v = r3.clone();
        while &v <= bound {
            out.push(v.clone());
            v += &m3;
        }
        Ok(out)
    });
    Ok(LazySet::new(format!("residue({m},{r})"), member).with_enumerator(en, Exactness::Exact))
}

/// Exact set from a predicate on naturals `>= 1`, enumerated pointwise.
fn pointwise(name: &str, pred: fn(u64) -> bool) -> LazySet {
    let member: Membership = Arc::new(move |x: &BigInt| match x.to_u64() {
        Some(0) => Ok(false),
        Some(n) => Ok(pred(n)),
        None if x.is_negative() => Ok(false),
        None => Err(Error::OutOfRange { set: "u64 predicate".into(), value: x.clone(), lo: BigInt::one(), hi: BigInt::from(u64::MAX) }),
    });
    let en: Enumerator = Arc::new(move |bound: &BigInt| {
        let top = bound.to_u64().unwrap_or(u64::MAX);
        if top > 1 << 26 {
            return Err(Error::BudgetExceeded(format!("enumeration up to {bound}")));
        }
        Ok((1..=top).filter(|&n| pred(n)).map(BigInt::from).collect())
    });
    LazySet::new(name, member).with_fast_membership(Arc::new(move |n| Ok(n > 0 && pred(n)))).with_enumerator(en, Exactness::Exact)
}

fn squarefree(n: u64) -> bool {
    let mut m = n;
    let mut d = 2u64;
    while d * d <= m {
        if m % d == 0 {
            m /= d;
            if m % d == 0 {
                return false;
            }
        }
        d += 1;
    }
    true
}

fn finite(name: String, mut items: Vec<BigInt>) -> LazySet {
    items.sort();
    items.dedup();
    let items = Arc::new(items);
    let it = items.clone();
    let member: Membership = Arc::new(move |x: &BigInt| Ok(it.binary_search(x).is_ok()));
    let en: Enumerator = Arc::new(move |bound: &BigInt| Ok(items.iter().filter(|x| *x <= bound).cloned().collect()));
    LazySet::new(name, member).with_enumerator(en, Exactness::Exact)
}

fn combine(name: String, a: SetHandle, b: SetHandle, union: bool) -> LazySet {
    let (ma, mb) = (a.clone(), b.clone());
    let member: Membership = Arc::new(move |x: &BigInt| {
        let ina = ma.contains(x)?;
        if union && ina {
            return Ok(true);
        }
        if !union && !ina {
            return Ok(false);
        }
        mb.contains(x)
    });
    let exact = a.is_exactly_enumerable() && b.is_exactly_enumerable();
    let set = LazySet::new(name, member.clone());
    if !exact {
        return set;
    }
    let en: Enumerator = Arc::new(move |bound: &BigInt| {
        let xa = a.enumerate_upto(bound)?;
        let xb = b.enumerate_upto(bound)?;
        let mut out: Vec<BigInt> = if union {
            xa.into_iter().chain(xb).collect()
        } else {
            let sb: std::collections::HashSet<BigInt> = xb.into_iter().collect();
            xa.into_iter().filter(|x| sb.contains(x)).collect()
        };
        out.sort();
        out.dedup();
        Ok(out)
    });
    set.with_enumerator(en, Exactness::Exact)
}

fn complement(name: String, a: SetHandle) -> LazySet {
    let exact = a.is_exactly_enumerable();
    let ma = a.clone();
    let member: Membership = Arc::new(move |x: &BigInt| Ok(x.is_positive() && !ma.contains(x)?));
    let en: Enumerator = Arc::new(move |bound: &BigInt| {
        let top = bound.to_u64().unwrap_or(u64::MAX);
        if top > 1 << 26 {
            return Err(Error::BudgetExceeded(format!("complement up to {bound}")));
        }
        let mut inside = a.enumerate_upto(bound)?.into_iter().peekable();
        let mut out = Vec::new();
        for n in 1..=top {
            let x = BigInt::from(n);
            while inside.peek().is_some_and(|y| y < &x) {
                inside.next();
            }
            if inside.peek() != Some(&x) {
                out.push(x);
            }
        }
        Ok(out)
    });
    let set = LazySet::new(name, member);
    if exact {
        set.with_enumerator(en, Exactness::Exact)
    } else {
        set
    }
}

/// Parses a set descriptor into a shareable set.
pub fn parse_set(descr: &str) -> Result<SetHandle> {
    let d = descr.trim();
    let (name, body) = match d.find('(') {
        Some(i) => {
            if !d.ends_with(')') {
                return Err(Error::Parse(format!("expected ')' at the end of {d:?}")));
            }
            (d[..i].trim(), &d[i + 1..d.len() - 1])
        }
        None => (d, ""),
    };
    let args = Args::parse(name, body)?;
    let named = |s: LazySet| -> SetHandle { Arc::new(s.with_descriptor(d.to_string())) };
    let set: SetHandle = match name {
        "naturals" | "nat" | "N" => named(residue(BigInt::one(), BigInt::zero())?.with_descriptor("naturals")),
        "evens" => named(residue(2.into(), 0.into())?),
        "odds" => named(residue(2.into(), 1.into())?),
        "residue" | "ap_set" => named(residue(args.int("m", 0)?, args.int("r", 1)?)?),
        "multiples" => named(residue(args.int("k", 0)?, BigInt::zero())?),
        "interval" => {
            let (lo, hi) = (args.int("lo", 0)?, args.int("hi", 1)?);
            let (l2, h2) = (lo.clone(), hi.clone());
            let member: Membership = Arc::new(move |x: &BigInt| Ok(x >= &l2 && x <= &h2));
            let en: Enumerator = Arc::new(move |bound: &BigInt| {
                let top = bound.min(&hi).clone();
                let len = (&top - &lo).to_i64().unwrap_or(i64::MAX);
                if len > 1 << 26 {
                    return Err(Error::BudgetExceeded(format!("{len} elements")));
                }
                Ok((0..=len).map(|i| &lo + i).collect())
            });
            named(LazySet::new(d, member).with_enumerator(en, Exactness::Exact))
        }
        "list" | "finite" => {
            let items = args.positional.iter().map(|s| parse_int(s)).collect::<Result<Vec<_>>>()?;
            named(finite(d.to_string(), items))
        }
        "squarefree" => named(pointwise(d, squarefree)),
        "primes" => named(pointwise(d, is_prime_u64)),
        "omega_even" => named(pointwise(d, |n| crate::arithfun::big_omega(n).map(|k| k % 2 == 0).unwrap_or(false))),
        "level_set" => {
            let p = Poly::parse(&args.req("p", 0)?.replace('|', ","))?;
            let hom: Hom = args.get("hom", 1).unwrap_or("omega").parse()?;
            let iv = HalfOpen::new(HpReal::parse(args.get("lo", 2).unwrap_or("0"))?, HpReal::parse(args.req("hi", 3)?)?)?;
            named(constructions::level_set(&p, hom, &iv)?)
        }
        "dirichlet" => named(constructions::dirichlet_avoider(&HpReal::parse(args.req("x", 0)?)?, &HpReal::parse(args.req("eps", 1)?)?)?),
        "thick_no_kxy" => named(constructions::thick_no_kxy(small(args.int_or("i_max", 0, 5)?, "i_max")?)?.0),
        "divisible_union" => {
            let dseq: DSeq = args.get("d", 0).unwrap_or("double_exp").parse()?;
            let aseq: ASeq = args.get("a", 1).unwrap_or("upto").parse()?;
            let i_max: u32 = small(args.int_or("i_max", 2, 12)?, "i_max")?;
            named(constructions::divisible_union(dseq, aseq, i_max)?.0)
        }
        "fg" | "semigroup" => {
            let gens = args.req("gens", 0)?.split('|').map(parse_int).collect::<Result<Vec<_>>>()?;
            let bound = args.int("bound", 1)?;
            named(constructions::fg_mult_semigroup(&gens, &bound)?)
        }
        "intro_mixed" => named(constructions::intro_mixed_set()),
        "normform" => {
            let form = NormForm::parse(args.req("form", 0)?)?;
            let b: i64 = small(args.int_or("box", 1, 20)?, "box")?;
            let limit = args.int_or("limit", 2, 10_000)?;
            Arc::new(enumerate_represented(&form, b, &limit)?)
        }
        "union" | "intersection" => {
            if args.positional.len() < 2 {
                return Err(Error::Parse(format!("{name} needs at least two sets")));
            }
            let mut acc = parse_set(&args.positional[0])?;
            for s in &args.positional[1..] {
                let b = parse_set(s)?;
                acc = Arc::new(combine(d.to_string(), acc, b, name == "union"));
            }
            acc
        }
        "complement" => named(complement(d.to_string(), parse_set(args.req("set", 0)?)?)),
        "window" => {
            let a = parse_set(args.req("set", 0)?)?;
            let (lo, hi) = match args.get("range", 1) {
                Some(r) if r.starts_with('[') => {
                    let inner = r.trim_start_matches('[').trim_end_matches(')');
                    let (a, b) = inner.split_once(',').ok_or_else(|| Error::Parse(format!("range {r:?}")))?;
                    (parse_int(a)?, parse_int(b)?)
                }
                _ => (args.int("lo", 1)?, args.int("hi", 2)?),
            };
            Arc::new(materialize(a.as_ref(), &lo, &hi)?)
        }
        _ => return Err(Error::Parse(format!("unknown set {name:?}"))),
    };
    Ok(set)
}

/// JSON set literal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetLiteral {
    Window { lo: String, hi: String, bits: String },
    Lazy { descriptor: String },
}

impl SetLiteral {
    pub fn from_window(w: &IntegerWindowSet) -> Self {
        let j = w.to_json();
        SetLiteral::Window { lo: j.lo, hi: j.hi, bits: j.bits }
    }

    pub fn build(&self) -> Result<SetHandle> {
        match self {
            SetLiteral::Window { lo, hi, bits } => Ok(Arc::new(IntegerWindowSet::from_json(&WindowJson {
                kind: "window".into(),
                lo: lo.clone(),
                hi: hi.clone(),
                bits: bits.clone(),
            })?)),
            SetLiteral::Lazy { descriptor } => parse_set(descriptor),
        }
    }
}

/// Accepts a JSON literal or a bare descriptor.
pub fn load_set(text: &str) -> Result<SetHandle> {
    let t = text.trim();
    if t.starts_with('{') {
        let lit: SetLiteral = serde_json::from_str(t)?;
        lit.build()
    } else {
        parse_set(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn has(s: &SetHandle, x: i64) -> bool {
        s.contains(&BigInt::from(x)).unwrap()
    }

    #[test]
    fn integers() {
        assert_eq!(parse_int("10^4").unwrap(), BigInt::from(10_000));
        assert_eq!(parse_int("3*2^3").unwrap(), BigInt::from(24));
        assert_eq!(parse_int("-7").unwrap(), BigInt::from(-7));
        assert!(parse_int("x").is_err());
    }

    #[test]
    fn basic_sets() {
        let s = parse_set("residue(7, 3)").unwrap();
        assert!(has(&s, 10) && !has(&s, 11));
        assert_eq!(s.enumerate_upto(&BigInt::from(20)).unwrap(), vec![BigInt::from(3), BigInt::from(10), BigInt::from(17)]);
        let u = parse_set("union(residue(4,2), list(8, 1))").unwrap();
        assert!(has(&u, 6) && has(&u, 8) && !has(&u, 4));
        assert_eq!(u.enumerate_upto(&BigInt::from(10)).unwrap().len(), 5);
        let c = parse_set("complement(evens)").unwrap();
        assert!(has(&c, 3) && !has(&c, 4) && !has(&c, 0));
        assert_eq!(c.enumerate_upto(&BigInt::from(6)).unwrap(), vec![BigInt::from(1), BigInt::from(3), BigInt::from(5)]);
        let sf = parse_set("squarefree").unwrap();
        assert!(has(&sf, 30) && !has(&sf, 12));
    }

    #[test]
    fn constructions_by_name() {
        let l = parse_set("level_set(p=0|1/2, hom=omega, lo=0, hi=1/2)").unwrap();
        assert!(has(&l, 4) && !has(&l, 8));
        assert!(has(&parse_set("intro_mixed").unwrap(), 20));
        assert!(has(&parse_set("fg(gens=2|3, bound=100)").unwrap(), 96));
        let du = parse_set("divisible_union").unwrap();
        assert_eq!(du.enumerate_upto(&(BigInt::one() << 5000)).unwrap().len(), 78);
        let d = parse_set("dirichlet(x=1/2, eps=0.4)").unwrap();
        assert!(has(&d, 3) && !has(&d, 4));
        assert!(has(&parse_set("normform(form=quadratic:a=-1, box=10, limit=50)").unwrap(), 25));
        let t = parse_set("thick_no_kxy(3)").unwrap();
        assert!(t.contains(&(BigInt::one() << 8)).unwrap());
    }

    #[test]
    fn windows_and_literals() {
        let w = parse_set("window(evens, [0,10^4))").unwrap();
        assert_eq!(w.domain(), Some((BigInt::zero(), BigInt::from(10_000))));
        let win = materialize(parse_set("odds").unwrap().as_ref(), &BigInt::from(0), &BigInt::from(64)).unwrap();
        let js = serde_json::to_string(&SetLiteral::from_window(&win)).unwrap();
        let back = load_set(&js).unwrap();
        assert!(back.contains(&BigInt::from(5)).unwrap());
        let lazy = load_set(r#"{"kind":"lazy","descriptor":"residue(3,0)"}"#).unwrap();
        assert!(lazy.contains(&BigInt::from(9)).unwrap());
        assert!(load_set(r#"{"kind":"lazy","descriptor":"x","extra":1}"#).is_err());
        assert!(parse_set("nonsense(1)").is_err());
    }
}
