use crate::error::{Error, Result};
use crate::prime::OddPrime;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

/// Exact rational number.
///
/// Always stored reduced (gcd(num, den) = 1) with a positive denominator;
/// zero is uniquely 0/1. Arithmetic never rounds.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PRational(BigRational);

/// p-adic valuation, with +infinity as the valuation of zero.
///
/// `Finite(v) < Infinite` under the derived ordering, which is the ordering
/// the ultrametric inequality wants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    /// Valuation of a product.
    pub fn plus(self, other: Valuation) -> Valuation {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

impl PRational {
    pub fn new(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Invalid("denominator is zero".into()));
        }
        Ok(PRational(BigRational::new(num, den)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        PRational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        PRational(BigRational::zero())
    }

    pub fn one() -> Self {
        PRational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Self {
        PRational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(PRational(self.0.recip()))
    }

    /// Integer power; negative exponents require a nonzero base.
    pub fn pow(&self, e: i64) -> Result<Self> {
        if e == 0 {
            return Ok(PRational::one());
        }
        let mag = e.unsigned_abs();
        if mag > u32::MAX as u64 {
            return Err(Error::Invalid(format!("exponent {e} too large")));
        }
        let num = self.numer().pow(mag as u32);
        let den = self.denom().pow(mag as u32);
        let pos = PRational(BigRational::new_raw(num, den));
        if e > 0 {
            Ok(pos)
        } else {
            pos.recip()
        }
    }

    /// v_p of this value; `Infinite` for zero.
    pub fn valuation(&self, p: OddPrime) -> Valuation {
        if self.is_zero() {
            return Valuation::Infinite;
        }
        let pb = p.to_bigint();
        // The fraction is reduced, so at most one of num/den carries p.
        let vn = big_vp(self.numer(), &pb);
        if vn > 0 {
            return Valuation::Finite(vn);
        }
        Valuation::Finite(-big_vp(self.denom(), &pb))
    }

    /// |x|_p as an exact rational: p^(-v_p(x)), and 0 for x = 0.
    pub fn padic_norm(&self, p: OddPrime) -> PRational {
        match self.valuation(p) {
            Valuation::Infinite => PRational::zero(),
            Valuation::Finite(v) => PRational::from_integer(p.get())
                .pow(-v)
                .expect("prime is nonzero"),
        }
    }

    /// Nearest f64, or None outside the representable range.
    pub fn to_f64(&self) -> Option<f64> {
        use num_traits::ToPrimitive;
        self.0.to_f64()
    }
}

/// v_p(n) for a nonzero integer.
pub(crate) fn big_vp(n: &BigInt, p: &BigInt) -> i64 {
    debug_assert!(!n.is_zero());
    let mut v = 0i64;
    let mut cur = n.clone();
    loop {
        let (q, r) = cur.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        v += 1;
        cur = q;
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for &PRational {
            type Output = PRational;
            fn $method(self, rhs: &PRational) -> PRational {
                PRational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait for PRational {
            type Output = PRational;
            fn $method(self, rhs: PRational) -> PRational {
                PRational(self.0.$method(rhs.0))
            }
        }
        impl $trait<&PRational> for PRational {
            type Output = PRational;
            fn $method(self, rhs: &PRational) -> PRational {
                PRational(self.0.$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
// Division panics on a zero divisor, like integer division; use `recip` for a
// checked path.
forward_binop!(Div, div);

impl Neg for &PRational {
    type Output = PRational;
    fn neg(self) -> PRational {
        PRational(-&self.0)
    }
}

impl Neg for PRational {
    type Output = PRational;
    fn neg(self) -> PRational {
        PRational(-self.0)
    }
}

impl fmt::Display for PRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for PRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PRational({self})")
    }
}

impl FromStr for PRational {
    type Err = Error;

    /// Parses "num/den" or a plain integer, e.g. "-35/4", "17".
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |what: &str| Error::Invalid(format!("{what} in rational literal {s:?}"));
        match s.split_once('/') {
            Some((n, d)) => {
                let num: BigInt = n.trim().parse().map_err(|_| bad("bad numerator"))?;
                let den: BigInt = d.trim().parse().map_err(|_| bad("bad denominator"))?;
                PRational::new(num, den)
            }
            None => {
                let num: BigInt = s.parse().map_err(|_| bad("bad integer"))?;
                Ok(PRational::from_integer(num))
            }
        }
    }
}

impl Serialize for PRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("PRational", 2)?;
        st.serialize_field("num", &self.numer().to_string())?;
        st.serialize_field("den", &self.denom().to_string())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for PRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            num: String,
            den: String,
        }
        let w = Wire::deserialize(deserializer)?;
        let num: BigInt = w
            .num
            .parse()
            .map_err(|_| de::Error::custom(format!("bad num {:?}", w.num)))?;
        let den: BigInt = w
            .den
            .parse()
            .map_err(|_| de::Error::custom(format!("bad den {:?}", w.den)))?;
        PRational::new(num, den).map_err(de::Error::custom)
    }
}
