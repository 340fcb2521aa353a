//! Number-theoretic primitives and the equidistribution toolkit.

mod equidist;
mod real;
mod sieve;

pub use equidist::{
    convergents, discrepancy, epsilon_dense_threshold, leveque_bound, weyl_sum, DenseThreshold, LevequeBound,
    TorusSample, WeylSum,
};
pub use real::{HpReal, Poly, TorusPoly, FRAC_BITS};
pub use sieve::{big_omega, big_omega_big, factor_u64, is_prime_u64, nu_p, primes_upto, SieveTable};
