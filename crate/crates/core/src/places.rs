use crate::error::{Error, Result};
use crate::prime::is_prime_u64;
use crate::rational::PRational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

/// Norm data of a nonzero rational across all places.
///
/// `finite_places` lists every prime q with |x|_q != 1, sorted ascending, as
/// pairs (q, e) with |x|_q = q^e; so e = -v_q(x). The product over all places,
/// `archimedean * prod q^e`, is computed exactly and must equal 1.
#[derive(Debug, Clone, Serialize)]
pub struct PlaceReport {
    pub value: PRational,
    pub archimedean: PRational,
    pub finite_places: Vec<FinitePlace>,
    pub product: PRational,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FinitePlace {
    pub prime: String,
    pub exponent: i64,
}

/// Factor numerator and denominator, assemble the norm at every finite place,
/// and verify the product formula in exact arithmetic.
pub fn product_formula_check(x: &PRational) -> Result<PlaceReport> {
    if x.is_zero() {
        return Err(Error::ZeroInput("product_formula_check"));
    }
    let mut places: Vec<(BigInt, i64)> = Vec::new();
    for (q, k) in factor(&x.numer().abs()) {
        places.push((q, -(k as i64)));
    }
    for (q, k) in factor(x.denom()) {
        places.push((q, k as i64));
    }
    // num and den are coprime, so no prime appears twice.
    places.sort_by(|a, b| a.0.cmp(&b.0));

    let archimedean = x.abs();
    let mut product = archimedean.clone();
    for (q, e) in &places {
        let norm = PRational::new(q.clone(), BigInt::one())?.pow(*e)?;
        product = product * norm;
    }
    Ok(PlaceReport {
        value: x.clone(),
        archimedean,
        holds: product == PRational::one(),
        finite_places: places
            .into_iter()
            .map(|(q, e)| FinitePlace { prime: q.to_string(), exponent: e })
            .collect(),
        product,
    })
}

/// Prime factorization of n >= 1 as (prime, multiplicity), unsorted.
///
/// Trial division below 10^4, then Pollard rho. Primality testing is exact
/// below 2^64 and strong-probable-prime based above.
pub(crate) fn factor(n: &BigInt) -> Vec<(BigInt, u64)> {
    debug_assert!(n.is_positive());
    let mut out: Vec<(BigInt, u64)> = Vec::new();
    let mut rest = n.clone();

    // Trial division by 2 then odd candidates; composite candidates never
    // divide because their prime factors were already stripped.
    let mut trial = |q: u64, rest: &mut BigInt| {
        let qb = BigInt::from(q);
        let mut k = 0u64;
        loop {
            let (d, r) = rest.div_rem(&qb);
            if !r.is_zero() {
                break;
            }
            *rest = d;
            k += 1;
        }
        if k > 0 {
            out.push((qb, k));
        }
    };
    trial(2, &mut rest);
    let mut q = 3u64;
    while q < SMALL_PRIMES_LIMIT && !rest.is_one() {
        trial(q, &mut rest);
        q += 2;
    }
    if !rest.is_one() {
        let mut stack = vec![rest];
        while let Some(m) = stack.pop() {
            if is_probable_prime(&m) {
                match out.iter_mut().find(|(q, _)| *q == m) {
                    Some((_, k)) => *k += 1,
                    None => out.push((m, 1)),
                }
            } else {
                let d = pollard_rho(&m);
                stack.push(&m / &d);
                stack.push(d);
            }
        }
    }
    out
}

const SMALL_PRIMES_LIMIT: u64 = 10_000;

fn is_probable_prime(n: &BigInt) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    let one = BigInt::one();
    let two = BigInt::from(2);
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = BigInt::from(a).modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Pollard rho (Brent variant) on an odd composite with no factor < 10^4.
fn pollard_rho(n: &BigInt) -> BigInt {
    let one = BigInt::one();
    let mut c = BigInt::from(1);
    loop {
        let mut x = BigInt::from(2);
        let mut y = BigInt::from(2);
        let mut d = BigInt::one();
        let step = |v: &BigInt| (v * v + &c).mod_floor(n);
        while d.is_one() {
            x = step(&x);
            y = step(&step(&y));
            d = (&x - &y).abs().gcd(n);
        }
        if &d != n {
            return d;
        }
        c += &one;
        debug_assert!(c != BigInt::from(100), "rho failed to find a factor");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> PRational {
        s.parse().unwrap()
    }

    #[test]
    fn example_minus_35_over_4() {
        let r = product_formula_check(&q("-35/4")).unwrap();
        assert_eq!(r.archimedean, q("35/4"));
        let places: Vec<(String, i64)> = r
            .finite_places
            .iter()
            .map(|fp| (fp.prime.clone(), fp.exponent))
            .collect();
        assert_eq!(
            places,
            vec![("2".into(), 2), ("5".into(), -1), ("7".into(), -1)]
        );
        assert_eq!(r.product, PRational::one());
        assert!(r.holds);
    }

    #[test]
    fn units_have_no_finite_places() {
        for s in ["1", "-1"] {
            let r = product_formula_check(&q(s)).unwrap();
            assert!(r.finite_places.is_empty());
            assert!(r.holds);
        }
    }

    #[test]
    fn rejects_zero() {
        assert!(matches!(product_formula_check(&q("0")), Err(Error::ZeroInput(_))));
    }

    #[test]
    fn factors_semiprime_beyond_trial_division() {
        // 1_000_003 and 1_000_033 are prime and above the trial division bound.
        let n = BigInt::from(1_000_003u64) * BigInt::from(1_000_033u64);
        let mut fs = factor(&n);
        fs.sort();
        assert_eq!(
            fs,
            vec![(BigInt::from(1_000_003u64), 1), (BigInt::from(1_000_033u64), 1)]
        );
    }

    #[test]
    fn factors_prime_powers() {
        let n = BigInt::from(3u64).pow(41);
        assert_eq!(factor(&n), vec![(BigInt::from(3), 41)]);
    }

    proptest! {
        #[test]
        fn product_is_always_one(n in -1_000_000i64..1_000_000, d in 1i64..1_000_000) {
            prop_assume!(n != 0);
            let x = PRational::new(BigInt::from(n), BigInt::from(d)).unwrap();
            let r = product_formula_check(&x).unwrap();
            prop_assert!(r.holds);
            prop_assert_eq!(r.product, PRational::one());
        }
    }
}
