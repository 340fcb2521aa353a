use serde::Serialize;

use crate::certificate::Certificate;
use crate::error::{Error, Result};

pub const MAX_HJ_WORDS: u64 = 1 << 22;

/// A word over `[n] ∪ {⋆}` with at least one `⋆` (stored as `None`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VariableWord {
    pub n: u32,
    pub letters: Vec<Option<u32>>,
}

impl VariableWord {
    pub fn r(&self) -> usize {
        self.letters.len()
    }

    /// The word with `⋆` replaced by `x`.
    pub fn substitute(&self, x: u32) -> Vec<u32> {
        self.letters.iter().map(|l| l.unwrap_or(x)).collect()
    }

    pub fn line(&self) -> Vec<Vec<u32>> {
        (1..=self.n).map(|x| self.substitute(x)).collect()
    }

    pub fn parse(n: u32, s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c {
                '*' => Ok(None),
                _ => c
                    .to_digit(36)
                    .filter(|&d| d >= 1 && d <= n)
                    .map(Some)
                    .ok_or_else(|| Error::Parse(format!("bad letter {c:?} for alphabet [{n}]"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if !letters.iter().any(|l| l.is_none()) {
            return Err(Error::Parse("variable word needs at least one *".into()));
        }
        Ok(Self { n, letters })
    }

    pub fn certificate(&self) -> Certificate {
        Certificate::CombLine { n: self.n, r: self.r() as u32, word: self.to_string() }
    }
}

impl std::fmt::Display for VariableWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for l in &self.letters {
            match l {
                None => write!(f, "*")?,
                Some(d) => write!(f, "{}", std::char::from_digit(*d, 36).unwrap_or('?'))?,
            }
        }
        Ok(())
    }
}

/// Index of a word over `[n]` in `[0, n^r)`: base `n`, first letter most
/// significant, letter `c` as digit `c − 1`.
pub fn word_index(n: u32, word: &[u32]) -> Result<u64> {
    word.iter().try_fold(0u64, |acc, &c| {
        if c == 0 || c > n {
            return Err(Error::InvalidArgument(format!("letter {c} outside [1, {n}]")));
        }
        acc.checked_mul(n as u64)
            .and_then(|v| v.checked_add(c as u64 - 1))
            .ok_or_else(|| Error::InvalidArgument("word index overflows".into()))
    })
}

/// First combinatorial line inside `S ⊆ [n]^r`, scanning ⋆-position sets in
/// colex order (bit `i` ↔ position `i`) and, for each, the constant letters
/// lexicographically.
pub fn find_combinatorial_line(n: u32, r: usize, words: &[Vec<u32>]) -> Result<Option<VariableWord>> {
    if n == 0 || r == 0 {
        return Err(Error::InvalidArgument("alphabet and length must be positive".into()));
    }
    let total = (n as u64)
        .checked_pow(r as u32)
        .filter(|&t| t <= MAX_HJ_WORDS)
        .ok_or(Error::WindowTooLarge { size: u64::MAX, cap: MAX_HJ_WORDS })?;
    let mut member = vec![false; total as usize];
    for w in words {
        if w.len() != r {
            return Err(Error::InvalidArgument(format!("word {w:?} does not have length {r}")));
        }
        member[word_index(n, w)? as usize] = true;
    }
    let place: Vec<u64> = (0..r).map(|i| (n as u64).pow((r - 1 - i) as u32)).collect();
    for mask in 1u64..(1 << r) {
        let stars: Vec<usize> = (0..r).filter(|i| mask >> i & 1 == 1).collect();
        let fixed: Vec<usize> = (0..r).filter(|i| mask >> i & 1 == 0).collect();
        let star_weight: u64 = stars.iter().map(|&i| place[i]).sum();
        let mut consts = vec![0u32; fixed.len()];
        loop {
            let base: u64 = fixed.iter().zip(&consts).map(|(&i, &c)| place[i] * c as u64).sum();
            if (0..n as u64).all(|x| member[(base + x * star_weight) as usize]) {
                let mut letters = vec![None; r];
                for (&i, &c) in fixed.iter().zip(&consts) {
                    letters[i] = Some(c + 1);
                }
                return Ok(Some(VariableWord { n, letters }));
            }
            // lexicographic increment, last fixed position fastest
            let mut k = fixed.len();
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                if consts[k] + 1 < n {
                    consts[k] += 1;
                    for c in consts.iter_mut().skip(k + 1) {
                        *c = 0;
                    }
                    k = usize::MAX;
                    break;
                }
            }
            if k != usize::MAX {
                break;
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_words(n: u32, r: usize) -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        for _ in 0..r {
            out = out.into_iter().flat_map(|w| (1..=n).map(move |c| [w.clone(), vec![c]].concat())).collect();
        }
        out
    }

    #[test]
    fn examples() {
        let full = all_words(2, 2);
        assert!(find_combinatorial_line(2, 2, &full).unwrap().is_some());
        let diag = vec![vec![1, 1], vec![2, 2]];
        let w = find_combinatorial_line(2, 2, &diag).unwrap().unwrap();
        assert_eq!(w.to_string(), "**");
        assert_eq!(find_combinatorial_line(2, 2, &[vec![1, 2], vec![2, 1]]).unwrap(), None);
    }

    #[test]
    fn first_line_follows_colex_then_lex() {
        let full = all_words(3, 3);
        let w = find_combinatorial_line(3, 3, &full).unwrap().unwrap();
        assert_eq!(w.to_string(), "*11");
        let without: Vec<Vec<u32>> = full.into_iter().filter(|w| w != &vec![1, 1, 1]).collect();
        assert_eq!(find_combinatorial_line(3, 3, &without).unwrap().unwrap().to_string(), "*12");
    }

    #[test]
    fn word_indexing() {
        assert_eq!(word_index(3, &[1, 1, 1]).unwrap(), 0);
        assert_eq!(word_index(3, &[2, 1, 3]).unwrap(), 9 + 2);
        assert!(word_index(3, &[4]).is_err());
        let v = VariableWord::parse(3, "2*1").unwrap();
        assert_eq!(v.line(), vec![vec![2, 1, 1], vec![2, 2, 1], vec![2, 3, 1]]);
        assert!(VariableWord::parse(3, "211").is_err());
    }
}
