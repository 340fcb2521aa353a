//! Set representations and the ambient semigroups every other module works
//! over.

mod ground;
mod lazy;
mod multiset;
mod window;

pub use ground::{GroundKind, GroundStructure};
pub use lazy::{Enumerator, Exactness, LazySet, Membership};
pub use multiset::FiniteMultiset;
pub use window::{IntegerWindowSet, WindowJson, MAX_WINDOW_BITS};

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};

/// Shared, immutable handle to any set.
pub type SetHandle = Arc<dyn Set>;

/// A subset of ℤ (or of a finite field, via integer encodings) that can
/// answer membership queries, and optionally enumerate itself.
pub trait Set: Send + Sync + fmt::Debug {
    fn descriptor(&self) -> String;

    fn contains(&self, x: &BigInt) -> Result<bool>;

    /// Membership for small values. Implementors with a cheap native path
    /// override this.
    fn contains_u64(&self, x: u64) -> Result<bool> {
        self.contains(&BigInt::from(x))
    }

    /// Half-open range `[lo, hi)` outside of which membership is undefined.
    fn domain(&self) -> Option<(BigInt, BigInt)> {
        None
    }

    fn exactness(&self) -> Option<Exactness> {
        None
    }

    /// Sorted members `<= bound`.
    fn enumerate_upto(&self, bound: &BigInt) -> Result<Vec<BigInt>> {
        let _ = bound;
        Err(Error::NotEnumerable(self.descriptor()))
    }

    /// Whether [`Set::enumerate_upto`] returns every member.
    fn is_exactly_enumerable(&self) -> bool {
        self.exactness() == Some(Exactness::Exact)
    }
}

/// Sorted members of `set` inside `[lo, hi)`, preferring an exact enumerator
/// and falling back to pointwise membership.
pub fn members_in(set: &dyn Set, lo: &BigInt, hi: &BigInt) -> Result<Vec<BigInt>> {
    if hi <= lo {
        return Ok(Vec::new());
    }
    if set.is_exactly_enumerable() {
        let top = hi - BigInt::one();
        return Ok(set
            .enumerate_upto(&top)?
            .into_iter()
            .filter(|x| x >= lo)
            .collect());
    }
    let span = (hi - lo).to_u64().unwrap_or(u64::MAX);
    if span > MAX_WINDOW_BITS {
        return Err(Error::WindowTooLarge {
            size: span,
            cap: MAX_WINDOW_BITS,
        });
    }
    let mut out = Vec::new();
    let mut x = lo.clone();
    while &x < hi {
        if set.contains(&x)? {
            out.push(x.clone());
        }
        x += 1;
    }
    Ok(out)
}

/// Snapshot of `set` over `[lo, hi)` as a bitmap window.
pub fn materialize(set: &dyn Set, lo: &BigInt, hi: &BigInt) -> Result<IntegerWindowSet> {
    let mut w = IntegerWindowSet::empty(lo.clone(), hi.clone())?;
    if set.is_exactly_enumerable() {
        for m in members_in(set, lo, hi)? {
            w.insert(&m)?;
        }
        return Ok(w);
    }
    match (lo.to_u64(), hi.to_u64()) {
        (Some(l), Some(h)) => {
            for x in l..h {
                if set.contains_u64(x)? {
                    w.insert_offset(x - l);
                }
            }
        }
        _ => {
            for m in members_in(set, lo, hi)? {
                w.insert(&m)?;
            }
        }
    }
    Ok(w)
}

/// `s⁻¹A = {x : op(s, x) ∈ A}`: `A − s` in additive grounds, `A / s` in
/// multiplicative ones. Only exact preimages are members.
pub fn quotient_set(a: SetHandle, s: BigInt, ground: GroundStructure) -> LazySet {
    let descriptor = format!("({}){}{}", a.descriptor(), ground.inverse_symbol(), s);
    let member_a = Arc::clone(&a);
    let g = ground.clone();
    let shift = s.clone();
    let member: Membership = Arc::new(move |x: &BigInt| member_a.contains(&g.op(&shift, x)?));
    let mut lazy = LazySet::new(descriptor, member);
    if a.is_exactly_enumerable() && ground.kind.is_integer() {
        let gk = ground.clone();
        let enumerator: Enumerator = Arc::new(move |bound: &BigInt| {
            // op(s, x) <= op(s, bound) for every member x <= bound
            let top = gk.op(&s, bound)?;
            let mut out = Vec::new();
            for y in a.enumerate_upto(&top)? {
                if let Some(x) = gk.preimage(&s, &y) {
                    if &x <= bound && gk.in_carrier(&x) {
                        out.push(x);
                    }
                }
            }
            out.sort();
            out.dedup();
            Ok(out)
        });
        lazy = lazy.with_enumerator(enumerator, Exactness::Exact);
    }
    lazy
}

/// `Σ multiplicity(f)` over the support elements `f` with `op(f, s) ∈ A`.
pub fn multiset_translate_count(
    f: &FiniteMultiset,
    a: &dyn Set,
    s: &BigInt,
    ground: &GroundStructure,
) -> Result<u64> {
    let mut count = 0u64;
    for (x, mult) in f.iter() {
        if a.contains(&ground.op(x, s)?)? {
            count += mult;
        }
    }
    Ok(count)
}
