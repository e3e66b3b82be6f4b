use crate::error::{Error, Result};
use crate::prime::OddPrime;
use crate::rational::{big_vp, PRational, Valuation};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::de;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// Hensel digit expansion of a nonzero rational.
///
/// Returns `(v, digits)` with `x = sum(digits[i] * p^(v+i)) + O(p^(v+count))`,
/// `digits[0] != 0` and every digit in `[0, p)`. The digits are the unique
/// solution of the successive congruences `x * p^(-v) = c_0 + c_1 p + ...
/// (mod p^count)`.
pub fn hensel_digits(x: &PRational, p: OddPrime, count: usize) -> Result<(i64, Vec<u64>)> {
    if x.is_zero() {
        return Err(Error::ZeroInput("hensel_digits"));
    }
    if count == 0 {
        return Err(Error::Invalid("digit count must be positive".into()));
    }
    let v = x
        .valuation(p)
        .finite()
        .expect("nonzero rational has finite valuation");
    let unit = x * &PRational::from_integer(p.get()).pow(-v)?;
    debug_assert_eq!(unit.valuation(p), Valuation::Finite(0));

    let modulus = p.to_bigint().pow(count as u32);
    // unit = a/b with p coprime to both; its digit string mod p^count is the
    // residue a * b^(-1).
    let den_inv = mod_inverse(unit.denom(), &modulus);
    let m = (unit.numer() * den_inv).mod_floor(&modulus);
    Ok((v, base_p_digits(&m, p, count)))
}

/// Digits of `m >= 0` in base p, exactly `count` of them (high positions
/// padded with zeros).
pub(crate) fn base_p_digits(m: &BigInt, p: OddPrime, count: usize) -> Vec<u64> {
    let pb = p.to_bigint();
    let mut digits = Vec::with_capacity(count);
    let mut cur = m.clone();
    for _ in 0..count {
        let (q, r) = cur.div_rem(&pb);
        digits.push(u64::try_from(&r).expect("digit fits u64"));
        cur = q;
    }
    debug_assert!(cur.is_zero(), "value had more than count digits");
    digits
}

/// Modular inverse of `a` modulo `m`; requires gcd(a, m) = 1.
pub(crate) fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let g = a.extended_gcd(m);
    debug_assert!(g.gcd.is_one(), "inverse of non-unit");
    g.x.mod_floor(m)
}

/// A p-adic number known to finitely many significant digits.
///
/// A nonzero value is `p^val * (digits[0] + digits[1] p + ...)` with
/// `digits[0] != 0`; it stands for any p-adic number agreeing with that sum
/// modulo `p^(val + prec)` where `prec = digits.len()`. Exact zero is a
/// distinct state (all digits known), not a zero-length window.
///
/// Arithmetic tracks how many digits remain trustworthy: multiplication and
/// division keep `min` of the operand precisions, addition and subtraction
/// additionally lose one digit per leading digit cancelled. An operation
/// whose result would have no trustworthy digits at all fails with
/// [`Error::PrecisionExhausted`] rather than fabricating a zero.
#[derive(Clone, PartialEq, Eq)]
pub struct PAdicApprox {
    p: OddPrime,
    repr: Repr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Repr {
    Zero,
    Value { val: i64, digits: Vec<u64> },
}

impl PAdicApprox {
    pub fn exact_zero(p: OddPrime) -> Self {
        PAdicApprox { p, repr: Repr::Zero }
    }

    /// Truncate a rational to `precision` significant digits.
    pub fn from_rational(x: &PRational, p: OddPrime, precision: usize) -> Result<Self> {
        if x.is_zero() {
            return Ok(Self::exact_zero(p));
        }
        let (val, digits) = hensel_digits(x, p, precision)?;
        Ok(PAdicApprox { p, repr: Repr::Value { val, digits } })
    }

    /// Truncate a rational to the digits below exponent `window_end`, i.e.
    /// reduce it modulo p^window_end. Fails if the value is indistinguishable
    /// from zero in that window.
    pub fn from_rational_window(x: &PRational, p: OddPrime, window_end: i64) -> Result<Self> {
        if x.is_zero() {
            return Ok(Self::exact_zero(p));
        }
        let v = x.valuation(p).finite().expect("nonzero");
        if v >= window_end {
            return Err(Error::PrecisionExhausted(format!(
                "value has valuation {v}, no digits below exponent {window_end}"
            )));
        }
        Self::from_rational(x, p, (window_end - v) as usize)
    }

    pub fn from_parts(p: OddPrime, val: i64, digits: Vec<u64>) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::Invalid("digit vector is empty".into()));
        }
        if digits[0] == 0 {
            return Err(Error::Invalid("leading digit must be nonzero".into()));
        }
        if let Some(d) = digits.iter().find(|d| **d >= p.get()) {
            return Err(Error::Invalid(format!("digit {d} out of range for p = {p}")));
        }
        Ok(PAdicApprox { p, repr: Repr::Value { val, digits } })
    }

    pub fn p(&self) -> OddPrime {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    pub fn valuation(&self) -> Valuation {
        match &self.repr {
            Repr::Zero => Valuation::Infinite,
            Repr::Value { val, .. } => Valuation::Finite(*val),
        }
    }

    /// Number of significant digits; `None` for exact zero (all digits known).
    pub fn precision(&self) -> Option<usize> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Value { digits, .. } => Some(digits.len()),
        }
    }

    pub fn digits(&self) -> &[u64] {
        match &self.repr {
            Repr::Zero => &[],
            Repr::Value { digits, .. } => digits,
        }
    }

    /// Exponent one past the last trusted digit: the value is known modulo
    /// p^window_end. `None` (infinite window) for exact zero.
    pub fn window_end(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Value { val, digits } => Some(val + digits.len() as i64),
        }
    }

    /// The canonical rational representative: the digit sum itself, an
    /// element of Z[1/p].
    pub fn to_rational(&self) -> PRational {
        match &self.repr {
            Repr::Zero => PRational::zero(),
            Repr::Value { val, digits } => {
                let m = mantissa(digits, self.p);
                let base = PRational::from_integer(self.p.get())
                    .pow(*val)
                    .expect("prime nonzero");
                PRational::from_integer(m) * base
            }
        }
    }

    /// Keep at most `precision` leading digits.
    pub fn truncate(&self, precision: usize) -> Result<Self> {
        if precision == 0 {
            return Err(Error::Invalid("cannot truncate to zero digits".into()));
        }
        match &self.repr {
            Repr::Zero => Ok(self.clone()),
            Repr::Value { val, digits } => {
                let kept = digits[..digits.len().min(precision)].to_vec();
                Ok(PAdicApprox { p: self.p, repr: Repr::Value { val: *val, digits: kept } })
            }
        }
    }

    pub fn neg(&self) -> Self {
        match &self.repr {
            Repr::Zero => self.clone(),
            Repr::Value { val, digits } => {
                let n = digits.len();
                let modulus = self.p.pow(n as u64);
                let m = (&modulus - mantissa(digits, self.p)).mod_floor(&modulus);
                // m was a unit, so p^n - m is one too.
                PAdicApprox {
                    p: self.p,
                    repr: Repr::Value { val: *val, digits: base_p_digits(&m, self.p, n) },
                }
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_prime(rhs)?;
        let (va, da) = match &self.repr {
            Repr::Zero => return Ok(rhs.clone()),
            Repr::Value { val, digits } => (*val, digits),
        };
        let (vb, db) = match &rhs.repr {
            Repr::Zero => return Ok(self.clone()),
            Repr::Value { val, digits } => (*val, digits),
        };
        let window = (va + da.len() as i64).min(vb + db.len() as i64);
        let vmin = va.min(vb);
        let len = (window - vmin) as usize; // >= 1: each window end exceeds its own valuation
        let modulus = self.p.pow(len as u64);
        let term = |v: i64, digits: &[u64]| -> BigInt {
            let shift = (v - vmin) as usize;
            if shift >= len {
                BigInt::zero()
            } else {
                mantissa(digits, self.p) * self.p.pow(shift as u64)
            }
        };
        let s = (term(va, da) + term(vb, db)).mod_floor(&modulus);
        if s.is_zero() {
            return Err(Error::PrecisionExhausted(format!(
                "all digits cancelled below exponent {window}"
            )));
        }
        let t = big_vp(&s, &self.p.to_bigint());
        let reduced = &s / self.p.pow(t as u64);
        let digits = base_p_digits(&reduced, self.p, len - t as usize);
        Ok(PAdicApprox {
            p: self.p,
            repr: Repr::Value { val: vmin + t, digits },
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_prime(rhs)?;
        let (va, da) = match &self.repr {
            Repr::Zero => return Ok(self.clone()),
            Repr::Value { val, digits } => (*val, digits),
        };
        let (vb, db) = match &rhs.repr {
            Repr::Zero => return Ok(rhs.clone()),
            Repr::Value { val, digits } => (*val, digits),
        };
        let n = da.len().min(db.len());
        let modulus = self.p.pow(n as u64);
        let m = (mantissa(&da[..n], self.p) * mantissa(&db[..n], self.p)).mod_floor(&modulus);
        let val = va.checked_add(vb).ok_or_else(|| Error::Invalid("valuation overflow".into()))?;
        Ok(PAdicApprox {
            p: self.p,
            repr: Repr::Value { val, digits: base_p_digits(&m, self.p, n) },
        })
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        self.check_prime(rhs)?;
        let (vb, db) = match &rhs.repr {
            Repr::Zero => return Err(Error::DivisionByZero),
            Repr::Value { val, digits } => (*val, digits),
        };
        let (va, da) = match &self.repr {
            Repr::Zero => return Ok(self.clone()),
            Repr::Value { val, digits } => (*val, digits),
        };
        let n = da.len().min(db.len());
        let modulus = self.p.pow(n as u64);
        let inv = mod_inverse(&mantissa(&db[..n], self.p), &modulus);
        let m = (mantissa(&da[..n], self.p) * inv).mod_floor(&modulus);
        let val = va.checked_sub(vb).ok_or_else(|| Error::Invalid("valuation overflow".into()))?;
        Ok(PAdicApprox {
            p: self.p,
            repr: Repr::Value { val, digits: base_p_digits(&m, self.p, n) },
        })
    }

    /// Multiply by an exact rational. Exact in the sense that no digits are
    /// lost: the significant-digit count is preserved.
    pub fn scale_by_rational(&self, r: &PRational) -> Result<Self> {
        if r.is_zero() {
            return Ok(Self::exact_zero(self.p));
        }
        let (val, digits) = match &self.repr {
            Repr::Zero => return Ok(self.clone()),
            Repr::Value { val, digits } => (*val, digits),
        };
        let vr = r.valuation(self.p).finite().expect("nonzero");
        let unit = r * &PRational::from_integer(self.p.get()).pow(-vr)?;
        let n = digits.len();
        let modulus = self.p.pow(n as u64);
        let den_inv = mod_inverse(unit.denom(), &modulus);
        let factor = (unit.numer() * den_inv).mod_floor(&modulus);
        let m = (mantissa(digits, self.p) * factor).mod_floor(&modulus);
        let val = val.checked_add(vr).ok_or_else(|| Error::Invalid("valuation overflow".into()))?;
        Ok(PAdicApprox {
            p: self.p,
            repr: Repr::Value { val, digits: base_p_digits(&m, self.p, n) },
        })
    }

    fn check_prime(&self, rhs: &Self) -> Result<()> {
        if self.p != rhs.p {
            return Err(Error::MismatchedPrime { left: self.p.get(), right: rhs.p.get() });
        }
        Ok(())
    }
}

fn mantissa(digits: &[u64], p: OddPrime) -> BigInt {
    let mut m = BigInt::zero();
    for &d in digits.iter().rev() {
        m = m * p.to_bigint() + BigInt::from(d);
    }
    m
}

impl fmt::Display for PAdicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Zero => write!(f, "0 (exact, p={})", self.p),
            Repr::Value { val, digits } => {
                let ds: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
                write!(f, "p={} val={} digits=[{}]", self.p, val, ds.join(","))
            }
        }
    }
}

impl fmt::Debug for PAdicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PAdicApprox({self})")
    }
}

impl Serialize for PAdicApprox {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match &self.repr {
            Repr::Zero => {
                let mut st = serializer.serialize_struct("PAdicApprox", 2)?;
                st.serialize_field("p", &self.p.get())?;
                st.serialize_field("zero", &true)?;
                st.end()
            }
            Repr::Value { val, digits } => {
                let mut st = serializer.serialize_struct("PAdicApprox", 4)?;
                st.serialize_field("p", &self.p.get())?;
                st.serialize_field("val", val)?;
                st.serialize_field("digits", digits)?;
                st.serialize_field("prec", &digits.len())?;
                st.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for PAdicApprox {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            #[serde(default)]
            schema: Option<String>,
            p: u64,
            #[serde(default)]
            zero: bool,
            #[serde(default)]
            val: Option<i64>,
            #[serde(default)]
            digits: Option<Vec<u64>>,
            #[serde(default)]
            prec: Option<usize>,
        }
        let w = Wire::deserialize(deserializer)?;
        if let Some(s) = &w.schema {
            if s != crate::SCHEMA {
                return Err(de::Error::custom(format!("unknown schema {s:?}")));
            }
        }
        let p = OddPrime::new(w.p).map_err(de::Error::custom)?;
        if w.zero {
            return Ok(PAdicApprox::exact_zero(p));
        }
        let val = w.val.ok_or_else(|| de::Error::custom("missing val"))?;
        let digits = w.digits.ok_or_else(|| de::Error::custom("missing digits"))?;
        if let Some(prec) = w.prec {
            if prec != digits.len() {
                return Err(de::Error::custom(format!(
                    "prec {} does not match digit count {}",
                    prec,
                    digits.len()
                )));
            }
        }
        PAdicApprox::from_parts(p, val, digits).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p3() -> OddPrime {
        OddPrime::new(3).unwrap()
    }

    fn q(s: &str) -> PRational {
        s.parse().unwrap()
    }

    /// Test-side oracle: the digit string is correct iff the reconstructed
    /// partial sum agrees with x modulo p^(v + count), all digits are in
    /// range, and the leading digit is nonzero. This checks the defining
    /// congruences directly, independent of how the digits were produced.
    fn digits_satisfy_congruence(x: &PRational, p: OddPrime, v: i64, digits: &[u64]) -> bool {
        if digits.is_empty() || digits[0] == 0 || digits.iter().any(|d| *d >= p.get()) {
            return false;
        }
        let mut partial = PRational::zero();
        for (i, &d) in digits.iter().enumerate() {
            let term = PRational::from_integer(d)
                * PRational::from_integer(p.get()).pow(v + i as i64).unwrap();
            partial = partial + term;
        }
        let r = x - &partial;
        match r.valuation(p) {
            Valuation::Infinite => true,
            Valuation::Finite(w) => w >= v + digits.len() as i64,
        }
    }

    #[test]
    fn hensel_minus_one() {
        let (v, d) = hensel_digits(&q("-1"), p3(), 4).unwrap();
        assert_eq!((v, d.as_slice()), (0, &[2u64, 2, 2, 2][..]));
        assert!(digits_satisfy_congruence(&q("-1"), p3(), 0, &[2, 2, 2, 2]));
    }

    #[test]
    fn hensel_seven_thirds() {
        let (v, d) = hensel_digits(&q("7/3"), p3(), 3).unwrap();
        assert_eq!((v, d.as_slice()), (-1, &[1u64, 2, 0][..]));
        assert!(digits_satisfy_congruence(&q("7/3"), p3(), -1, &[1, 2, 0]));
    }

    #[test]
    fn hensel_one_half() {
        // Digit-by-digit derivation: 1/2 = 2 (mod 3); (1/2 - 2)/3 = -1/2 = 1
        // (mod 3); the remainder -1/2 then repeats, so the tail is all 1s.
        let (v, d) = hensel_digits(&q("1/2"), p3(), 4).unwrap();
        assert_eq!((v, d.as_slice()), (0, &[2u64, 1, 1, 1][..]));
        assert!(digits_satisfy_congruence(&q("1/2"), p3(), 0, &[2, 1, 1, 1]));
    }

    #[test]
    fn hensel_rejects_zero() {
        assert_eq!(hensel_digits(&q("0"), p3(), 4), Err(Error::ZeroInput("hensel_digits")));
    }

    #[test]
    fn add_zero_is_identity() {
        let x = PAdicApprox::from_rational(&q("7/3"), p3(), 5).unwrap();
        let z = PAdicApprox::exact_zero(p3());
        assert_eq!(x.add(&z).unwrap(), x);
        assert_eq!(z.add(&x).unwrap(), x);
        assert_eq!(x.mul(&z).unwrap(), z);
        assert_eq!(z.div(&x).unwrap(), z);
        assert!(x.div(&z).is_err());
    }

    #[test]
    fn cancellation_reduces_precision() {
        // (1 + 3^4 + O(3^5)) - (1 + O(3^5)): four leading digits cancel.
        let a = PAdicApprox::from_rational(&q("82"), p3(), 5).unwrap();
        let b = PAdicApprox::from_rational(&q("1"), p3(), 5).unwrap();
        let d = a.sub(&b).unwrap();
        assert_eq!(d.valuation(), Valuation::Finite(4));
        assert_eq!(d.digits(), &[1]);
        assert_eq!(d.precision(), Some(1));
    }

    #[test]
    fn total_cancellation_is_an_error() {
        let x = PAdicApprox::from_rational(&q("7/3"), p3(), 6).unwrap();
        match x.sub(&x) {
            Err(Error::PrecisionExhausted(_)) => {}
            other => panic!("expected precision exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn mul_keeps_min_precision() {
        let a = PAdicApprox::from_rational(&q("7/3"), p3(), 7).unwrap();
        let b = PAdicApprox::from_rational(&q("5"), p3(), 4).unwrap();
        let m = a.mul(&b).unwrap();
        assert_eq!(m.precision(), Some(4));
        assert_eq!(m.valuation(), Valuation::Finite(-1));
    }

    #[test]
    fn json_wire_format() {
        let x = PAdicApprox::from_parts(p3(), -2, vec![1, 0, 2]).unwrap();
        let js = serde_json::to_string(&x).unwrap();
        assert_eq!(js, r#"{"p":3,"val":-2,"digits":[1,0,2],"prec":3}"#);
        let back: PAdicApprox = serde_json::from_str(&js).unwrap();
        assert_eq!(back, x);

        let z = PAdicApprox::exact_zero(p3());
        let js = serde_json::to_string(&z).unwrap();
        assert_eq!(js, r#"{"p":3,"zero":true}"#);
        assert_eq!(serde_json::from_str::<PAdicApprox>(&js).unwrap(), z);

        // Validation: leading digit, digit range, prec consistency.
        assert!(serde_json::from_str::<PAdicApprox>(
            r#"{"p":3,"val":0,"digits":[0,1],"prec":2}"#
        )
        .is_err());
        assert!(serde_json::from_str::<PAdicApprox>(
            r#"{"p":3,"val":0,"digits":[1,3],"prec":2}"#
        )
        .is_err());
        assert!(serde_json::from_str::<PAdicApprox>(
            r#"{"p":3,"val":0,"digits":[1,2],"prec":3}"#
        )
        .is_err());
    }

    #[test]
    fn scale_by_rational_preserves_precision() {
        let x = PAdicApprox::from_rational(&q("4"), p3(), 6).unwrap();
        let y = x.scale_by_rational(&q("3/4")).unwrap();
        assert_eq!(y, PAdicApprox::from_rational(&q("3"), p3(), 6).unwrap());
        assert_eq!(x.scale_by_rational(&q("0")).unwrap(), PAdicApprox::exact_zero(p3()));
    }

    fn arb_prime() -> impl Strategy<Value = OddPrime> {
        prop_oneof![Just(3u64), Just(5), Just(7)].prop_map(|p| OddPrime::new(p).unwrap())
    }

    fn arb_rat() -> impl Strategy<Value = PRational> {
        (-10_000i64..10_000, 1i64..10_000)
            .prop_map(|(n, d)| PRational::new(BigInt::from(n), BigInt::from(d)).unwrap())
            .prop_filter("nonzero", |x| !x.is_zero())
    }

    proptest! {
        #[test]
        fn hensel_digits_solve_congruence(x in arb_rat(), p in arb_prime(), n in 1usize..12) {
            let (v, d) = hensel_digits(&x, p, n).unwrap();
            prop_assert!(digits_satisfy_congruence(&x, p, v, &d));
        }

        #[test]
        fn round_trip_representative(x in arb_rat(), p in arb_prime(), n in 1usize..12) {
            let a = PAdicApprox::from_rational(&x, p, n).unwrap();
            let r = a.to_rational();
            // Representative agrees with x through the window.
            let w = a.window_end().unwrap();
            let diff = &x - &r;
            let agrees = diff.valuation(p) >= Valuation::Finite(w);
            prop_assert!(agrees);
        }

        // Field ops agree with exact rational arithmetic followed by
        // truncation.
        #[test]
        fn ops_match_exact_oracle(
            x in arb_rat(), y in arb_rat(), p in arb_prime(),
            nx in 1usize..10, ny in 1usize..10,
        ) {
            let a = PAdicApprox::from_rational(&x, p, nx).unwrap();
            let b = PAdicApprox::from_rational(&y, p, ny).unwrap();

            // mul
            let exact = &x * &y;
            let got = a.mul(&b).unwrap();
            prop_assert_eq!(&got, &PAdicApprox::from_rational(&exact, p, nx.min(ny)).unwrap());

            // div
            let exact = &x / &y;
            let got = a.div(&b).unwrap();
            prop_assert_eq!(&got, &PAdicApprox::from_rational(&exact, p, nx.min(ny)).unwrap());

            // add / sub against the window rule
            let window = a.window_end().unwrap().min(b.window_end().unwrap());
            for (exact, got) in [(&x + &y, a.add(&b)), (&x - &y, a.sub(&b))] {
                let visible = match exact.valuation(p) {
                    Valuation::Infinite => false,
                    Valuation::Finite(t) => t < window,
                };
                if visible {
                    prop_assert_eq!(
                        got.unwrap(),
                        PAdicApprox::from_rational_window(&exact, p, window).unwrap()
                    );
                } else {
                    prop_assert!(matches!(got, Err(Error::PrecisionExhausted(_))));
                }
            }
        }

        #[test]
        fn serde_round_trip(x in arb_rat(), p in arb_prime(), n in 1usize..10) {
            let a = PAdicApprox::from_rational(&x, p, n).unwrap();
            let js = serde_json::to_string(&a).unwrap();
            prop_assert_eq!(serde_json::from_str::<PAdicApprox>(&js).unwrap(), a);
        }
    }
}
