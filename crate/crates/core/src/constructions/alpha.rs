use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_ALPHA_ROWS: usize = 64;
pub const MAX_ALPHA_COLS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlphaOutcome {
    /// 1-based row indices, ascending.
    pub alpha: Vec<usize>,
    /// Column products `Π_{i∈α} M_{i,j}`.
    pub products: Vec<String>,
    /// Number of pairing rounds before a clean row appeared.
    pub rounds: usize,
}

struct Row {
    members: Vec<usize>,
    values: Vec<BigUint>,
}

type Triple = (usize, usize, usize);

/// Lex-first column triple `(i, j, k)` with `v_i < v_j < v_k` and `v_i + v_k = 2 v_j`.
fn violated_triple(v: &[BigUint]) -> Option<Triple> {
    let n = v.len();
    for i in 0..n {
        for j in 0..n {
            if v[j] <= v[i] {
                continue;
            }
            for k in 0..n {
                if v[k] > v[j] && &v[i] + &v[k] == &v[j] * 2u32 {
                    return Some((i, j, k));
                }
            }
        }
    }
    None
}

/// Whether the entries contain `x < y < z` with `x + z = 2y`.
pub fn has_nonconstant_3ap(values: &[BigUint]) -> bool {
    let mut s = values.to_vec();
    s.sort();
    s.dedup();
    let set: std::collections::HashSet<&BigUint> = s.iter().collect();
    for a in 0..s.len() {
        for c in a + 2..s.len() {
            let sum = &s[a] + &s[c];
            if (&sum % 2u32) == BigUint::ZERO && set.contains(&(sum >> 1)) {
                return true;
            }
        }
    }
    false
}

/// Searches `α ⊆ [r]` whose column products contain no non-constant 3-AP by
/// repeated pigeonholing on violated triples. `None` when the rows run out.
pub fn alpha_no_3ap(m: &[Vec<u64>]) -> Result<Option<AlphaOutcome>> {
    let r = m.len();
    if r == 0 || r > MAX_ALPHA_ROWS {
        return Err(Error::InvalidArgument(format!("need 1..={MAX_ALPHA_ROWS} rows")));
    }
    let n = m[0].len();
    if n == 0 || n > MAX_ALPHA_COLS || m.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument(format!("rows must share a length in 1..={MAX_ALPHA_COLS}")));
    }
    if m.iter().flatten().any(|&x| x == 0) {
        return Err(Error::InvalidArgument("entries must be positive".into()));
    }
    let mut rows: Vec<Row> = m
        .iter()
        .enumerate()
        .map(|(i, row)| Row { members: vec![i + 1], values: row.iter().map(|&x| BigUint::from(x)).collect() })
        .collect();
    let mut rounds = 0;
    loop {
        let tags: Vec<Option<Triple>> = rows.iter().map(|row| violated_triple(&row.values)).collect();
        if let Some(pos) = tags.iter().position(|t| t.is_none()) {
            let row = &rows[pos];
            let mut alpha = row.members.clone();
            alpha.sort_unstable();
            if has_nonconstant_3ap(&row.values) {
                return Err(Error::Internal(format!("α = {alpha:?} failed verification")));
            }
            return Ok(Some(AlphaOutcome {
                alpha,
                products: row.values.iter().map(|v| v.to_string()).collect(),
                rounds,
            }));
        }
        let mut counts: BTreeMap<Triple, Vec<usize>> = BTreeMap::new();
        for (i, t) in tags.iter().enumerate() {
            counts.entry(t.expect("all tagged")).or_default().push(i);
        }
        // most common triple; BTreeMap order breaks ties towards the lex-least
        let mut best: Option<(&Triple, &Vec<usize>)> = None;
        for (t, ls) in &counts {
            if best.is_none_or(|(_, b)| ls.len() > b.len()) {
                best = Some((t, ls));
            }
        }
        let ls = best.expect("non-empty").1.clone();
        let half = ls.len() / 2;
        if half == 0 {
            return Ok(None);
        }
        rows = (0..half)
            .map(|t| {
                let (a, b) = (&rows[ls[t]], &rows[ls[t + half]]);
                let mut members = a.members.clone();
                members.extend(&b.members);
                let values = a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect();
                Row { members, values }
            })
            .collect();
        rounds += 1;
    }
}

/// Subsets `α` with `|α| >= 2` for which `x_α + z_α = 2 y_α`, where the
/// products run over the given triples. Exhaustive; keep `triples.len()` small.
pub fn product_ap_violations(triples: &[(u64, u64, u64)]) -> Vec<Vec<usize>> {
    let r = triples.len();
    assert!(r <= 20, "exhaustive over 2^r subsets");
    let mut out = Vec::new();
    for mask in 1u32..(1 << r) {
        if mask.count_ones() < 2 {
            continue;
        }
        let (mut x, mut y, mut z) = (BigUint::one(), BigUint::one(), BigUint::one());
        for (i, &(a, b, c)) in triples.iter().enumerate() {
            if mask >> i & 1 == 1 {
                x *= a;
                y *= b;
                z *= c;
            }
        }
        if x + z == y * 2u32 {
            out.push((0..r).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn clean_row_is_returned_directly() {
        let m = vec![vec![1, 2, 3], vec![1, 2, 4], vec![2, 4, 6]];
        let out = alpha_no_3ap(&m).unwrap().unwrap();
        assert_eq!(out.alpha, vec![2]);
        assert_eq!(out.rounds, 0);
    }

    #[test]
    fn pairing_two_identical_rows() {
        let m = vec![vec![1, 2, 3], vec![1, 2, 3]];
        let out = alpha_no_3ap(&m).unwrap().unwrap();
        assert_eq!(out.alpha, vec![1, 2]);
        assert_eq!(out.products, vec!["1", "4", "9"]);
    }

    #[test]
    fn single_violating_row_is_absent() {
        assert_eq!(alpha_no_3ap(&[vec![1, 2, 3]]).unwrap(), None);
    }

    #[test]
    fn random_matrices_verify() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(88);
        let mut found = 0;
        for _ in 0..200 {
            let m: Vec<Vec<u64>> = (0..20).map(|_| (0..3).map(|_| rng.gen_range(1..=10)).collect()).collect();
            if let Some(out) = alpha_no_3ap(&m).unwrap() {
                found += 1;
                let vals: Vec<BigUint> = (0..3)
                    .map(|j| out.alpha.iter().map(|&i| BigUint::from(m[i - 1][j])).product())
                    .collect();
                assert!(!has_nonconstant_3ap(&vals));
                assert_eq!(vals.iter().map(|v| v.to_string()).collect::<Vec<_>>(), out.products);
            }
        }
        assert!(found > 150);
    }

    #[test]
    fn products_of_ap_triples_never_form_aps() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let r = rng.gen_range(2..=5);
            let t: Vec<(u64, u64, u64)> = (0..r)
                .map(|_| {
                    let x = rng.gen_range(1..50);
                    let d = rng.gen_range(1..50);
                    (x, x + d, x + 2 * d)
                })
                .collect();
            assert!(product_ap_violations(&t).is_empty(), "{t:?}");
        }
    }

    #[test]
    fn checker_basics() {
        let b = |v: &[u64]| v.iter().map(|&x| BigUint::from(x)).collect::<Vec<_>>();
        assert!(has_nonconstant_3ap(&b(&[5, 1, 3])));
        assert!(!has_nonconstant_3ap(&b(&[1, 4, 9])));
        assert!(!has_nonconstant_3ap(&b(&[2, 2, 2])));
    }
}
