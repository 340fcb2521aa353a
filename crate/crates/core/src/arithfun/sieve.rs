use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

/// Smallest-prime-factor table on `[0, limit]`.
#[derive(Debug, Clone)]
pub struct SieveTable {
    limit: u32,
    spf: Vec<u32>,
}

impl SieveTable {
    pub fn new(limit: u32) -> Self {
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let m = i * p as usize;
                if p > si || m > n {
                    break;
                }
                spf[m] = p;
            }
        }
        Self { limit, spf }
    }

    pub fn limit(&self) -> u32 {
        self.limit
    }

    /// Least prime factor of `n >= 2`.
    pub fn spf(&self, n: u32) -> u32 {
        self.spf[n as usize]
    }

    pub fn is_prime(&self, n: u32) -> bool {
        n >= 2 && self.spf[n as usize] == n
    }

    pub fn big_omega(&self, mut n: u32) -> u32 {
        let mut count = 0;
        while n > 1 {
            n /= self.spf[n as usize];
            count += 1;
        }
        count
    }

    pub fn nu_p(&self, mut n: u32, p: u32) -> u32 {
        let mut count = 0;
        while n > 1 && n % p == 0 {
            n /= p;
            count += 1;
        }
        count
    }

    /// `Ω(n)` for every `n` in `0..=limit` (entries 0 and 1 are 0).
    pub fn omega_table(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.limit as usize + 1];
        for n in 2..=self.limit as usize {
            out[n] = out[n / self.spf[n] as usize] + 1;
        }
        out
    }

    pub fn primes(&self) -> impl Iterator<Item = u32> + '_ {
        (2..=self.limit).filter(|&n| self.is_prime(n))
    }
}

pub fn primes_upto(n: u32) -> Vec<u32> {
    SieveTable::new(n).primes().collect()
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factors of `n` with multiplicity, ascending.
pub fn factor_u64(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut n = n;
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        while n % p == 0 {
            out.push(p);
            n /= p;
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            out.push(m);
            continue;
        }
        let d = pollard_rho(m);
        stack.push(d);
        stack.push(m / d);
    }
    out.sort_unstable();
    out
}

/// `Ω(n)`: prime factors counted with multiplicity. `Ω(1) = 0`.
pub fn big_omega(n: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::InvalidArgument("Ω(0) is undefined".into()));
    }
    Ok(factor_u64(n).len() as u32)
}

/// `Ω` for big inputs; supported up to `2^64`.
pub fn big_omega_big(n: &BigInt) -> Result<u32> {
    match n.to_u64() {
        Some(v) => big_omega(v),
        None => Err(Error::OutOfRange {
            set: "Ω domain".into(),
            value: n.clone(),
            lo: BigInt::from(1),
            hi: BigInt::from(u64::MAX),
        }),
    }
}

/// `ν_p(n)`: exponent of the prime `p` in `n`. `ν_p(1) = 0`.
pub fn nu_p(n: u64, p: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::InvalidArgument("ν_p(0) is undefined".into()));
    }
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    let mut n = n;
    let mut k = 0;
    while n % p == 0 {
        n /= p;
        k += 1;
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trial_omega(mut n: u64) -> u32 {
        let mut c = 0;
        let mut p = 2;
        while p * p <= n {
            while n % p == 0 {
                n /= p;
                c += 1;
            }
            p += 1;
        }
        c + (n > 1) as u32
    }

    #[test]
    fn definitions() {
        assert_eq!(big_omega(12).unwrap(), 3);
        assert_eq!(big_omega(1).unwrap(), 0);
        assert_eq!(nu_p(40, 2).unwrap(), 3);
        assert_eq!(nu_p(1, 5).unwrap(), 0);
        assert!(nu_p(40, 4).is_err());
        assert!(big_omega(0).is_err());
    }

    #[test]
    fn sieve_agrees_with_trial_division() {
        let s = SieveTable::new(20_000);
        let table = s.omega_table();
        for n in 2..20_000u32 {
            assert_eq!(s.big_omega(n), trial_omega(n as u64));
            assert_eq!(table[n as usize] as u32, s.big_omega(n));
            assert_eq!(big_omega(n as u64).unwrap(), s.big_omega(n));
        }
        assert_eq!(s.primes().count(), 2262);
    }

    #[test]
    fn omega_is_completely_additive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let m: u64 = rng.gen_range(1..1u64 << 31);
            let n: u64 = rng.gen_range(1..1u64 << 31);
            assert_eq!(big_omega(m * n).unwrap(), big_omega(m).unwrap() + big_omega(n).unwrap());
            for p in [2u64, 3, 7] {
                assert_eq!(nu_p(m * n, p).unwrap(), nu_p(m, p).unwrap() + nu_p(n, p).unwrap());
                assert!((p as f64).powi(nu_p(m, p).unwrap() as i32) <= m as f64);
            }
        }
    }

    #[test]
    fn big_inputs() {
        // 2^61 - 1 is prime; (2^31-1)^2 is a square of a prime
        assert_eq!(big_omega((1u64 << 61) - 1).unwrap(), 1);
        assert_eq!(big_omega(2_147_483_647u64 * 2_147_483_647).unwrap(), 2);
        assert_eq!(big_omega(1u64 << 63).unwrap(), 63);
        assert!(big_omega_big(&(BigInt::from(1u8) << 70)).is_err());
    }
}
