use crate::error::{Error, Result};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use std::fmt;

/// An odd prime, validated at construction.
///
/// Every p-adic object in this crate carries one of these, so invalid primes
/// are rejected once at the boundary instead of inside every algorithm.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct OddPrime(u64);

impl OddPrime {
    pub fn new(p: u64) -> Result<Self> {
        if p > 2 && is_prime_u64(p) {
            Ok(OddPrime(p))
        } else {
            Err(Error::NotOddPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn to_bigint(self) -> BigInt {
        BigInt::from(self.0)
    }

    /// p^k for nonnegative k.
    pub fn pow(self, k: u64) -> BigInt {
        self.to_bigint().pow(k as u32)
    }
}

impl fmt::Display for OddPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for OddPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OddPrime({})", self.0)
    }
}

impl TryFrom<u64> for OddPrime {
    type Error = Error;
    fn try_from(p: u64) -> Result<Self> {
        OddPrime::new(p)
    }
}

impl From<OddPrime> for u64 {
    fn from(p: OddPrime) -> u64 {
        p.0
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for u64. The base set below is known to be
/// exact for all inputs < 2^64.
pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
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
