use crate::approx::{hensel_digits, PAdicApprox};
use crate::error::{Error, Result};
use crate::prime::OddPrime;
use crate::rational::{PRational, Valuation};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de;
use serde::ser::{Error as _, SerializeSeq, SerializeStruct};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// Largest p-power exponent this crate will turn into an actual numerator or
/// denominator. Growth-certificate sequences use exponents like 3^200 that
/// must stay symbolic; everything expansion-sized is far below this.
const MATERIALIZE_EXP_CAP: u64 = 1 << 20;

/// One partial quotient: an element of Z[1/p] in [0, p).
///
/// Stored as `unit * p^(-m)` with p coprime to `unit`, so |value|_p = p^m
/// without materializing p^m. The zero quotient (only legal at index 0) is
/// `unit = 0, m = 0`. Index-0 quotients allow m = 0; later indices require
/// m >= 1, i.e. valuation <= -1.
#[derive(Clone, PartialEq, Eq)]
pub struct PartialQuotient {
    p: OddPrime,
    unit: BigInt,
    m: BigInt,
}

impl PartialQuotient {
    /// Quotient for index 0: any value in [0, p) from Z[1/p].
    pub fn head_term(p: OddPrime, value: &PRational) -> Result<Self> {
        Self::from_value(p, value, 0)
    }

    /// Quotient for index >= 1: value in (0, p) with |value|_p >= p.
    pub fn tail_term(p: OddPrime, value: &PRational) -> Result<Self> {
        Self::from_value(p, value, 1)
    }

    /// `index` only distinguishes 0 from "anything later".
    pub fn from_value(p: OddPrime, value: &PRational, index: usize) -> Result<Self> {
        if value.is_zero() {
            if index == 0 {
                return Ok(PartialQuotient { p, unit: BigInt::zero(), m: BigInt::zero() });
            }
            return Err(Error::Domain(format!("quotient at index {index} is zero")));
        }
        if !value.is_positive() {
            return Err(Error::Domain(format!("quotient {value} is negative")));
        }
        let m = match value.valuation(p) {
            Valuation::Finite(v) if v <= 0 => -v,
            Valuation::Finite(_) | Valuation::Infinite => {
                return Err(Error::Domain(format!(
                    "quotient {value} is divisible by p = {p}"
                )));
            }
        };
        // Z[1/p] membership: the reduced denominator must be exactly p^m.
        if *value.denom() != p.pow(m as u64) {
            return Err(Error::Domain(format!(
                "quotient {value} is not in Z[1/p] for p = {p}"
            )));
        }
        if index >= 1 && m == 0 {
            return Err(Error::Domain(format!(
                "quotient {value} at index {index} must have |.|_p >= p"
            )));
        }
        if value >= &PRational::from_integer(p.get()) {
            return Err(Error::Domain(format!("quotient {value} is not below p = {p}")));
        }
        Ok(PartialQuotient { p, unit: value.numer().clone(), m: BigInt::from(m) })
    }

    /// Construct from the symbolic form directly; the only way to build
    /// quotients whose value cannot be materialized.
    pub fn from_unit_exponent(p: OddPrime, unit: BigInt, m: BigInt) -> Result<Self> {
        if m.is_negative() {
            return Err(Error::Domain("exponent m must be nonnegative".into()));
        }
        if unit.is_zero() {
            if !m.is_zero() {
                return Err(Error::Domain("zero quotient must have m = 0".into()));
            }
            return Ok(PartialQuotient { p, unit, m });
        }
        if !unit.is_positive() {
            return Err(Error::Domain("unit part must be positive".into()));
        }
        if unit.mod_floor(&p.to_bigint()).is_zero() {
            return Err(Error::Domain("unit part must be coprime to p".into()));
        }
        // value < p  <=>  unit < p^(m+1). If unit has at most m+1 bits this
        // holds for any p >= 3; otherwise compare exactly (requires a
        // materializable exponent).
        let bits_ok = BigInt::from(unit.bits()) <= &m + 1;
        if !bits_ok {
            let exp = (&m + 1u32)
                .to_u64()
                .filter(|e| *e <= MATERIALIZE_EXP_CAP)
                .ok_or_else(|| Error::Invalid("unit too large for symbolic range check".into()))?;
            if unit >= p.pow(exp) {
                return Err(Error::Domain("quotient value is not below p".into()));
            }
        }
        Ok(PartialQuotient { p, unit, m })
    }

    pub fn p(&self) -> OddPrime {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.unit.is_zero()
    }

    /// |value|_p = p^m. Zero for the zero quotient by convention.
    pub fn exponent(&self) -> &BigInt {
        &self.m
    }

    pub fn unit_part(&self) -> &BigInt {
        &self.unit
    }

    /// The quotient as an exact rational. Fails only for symbolic quotients
    /// whose p-power exceeds the materialization cap.
    pub fn value(&self) -> Result<PRational> {
        if self.unit.is_zero() {
            return Ok(PRational::zero());
        }
        let m = self
            .m
            .to_u64()
            .filter(|m| *m <= MATERIALIZE_EXP_CAP)
            .ok_or_else(|| {
                Error::Invalid(format!("p^{} denominator too large to materialize", self.m))
            })?;
        PRational::new(self.unit.clone(), self.p.pow(m))
    }
}

impl fmt::Display for PartialQuotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Ok(v) => write!(f, "{v}"),
            Err(_) => write!(f, "{}*{}^-{}", self.unit, self.p, self.m),
        }
    }
}

impl fmt::Debug for PartialQuotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PartialQuotient({self})")
    }
}

impl Serialize for PartialQuotient {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let v = self.value().map_err(S::Error::custom)?;
        v.serialize(serializer)
    }
}

/// A p-adic continued fraction prefix: x = a_0 + 1/(a_1 + 1/(a_2 + ...)).
///
/// `terminated` means the remainder hit the last quotient exactly, so the
/// quotient list is the complete expansion and evaluates back to the input.
#[derive(Debug, Clone, PartialEq)]
pub struct CFExpansion {
    pub p: OddPrime,
    pub quotients: Vec<PartialQuotient>,
    pub terminated: bool,
    /// Human-readable description of what was expanded.
    pub source: String,
}

impl Serialize for CFExpansion {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("CFExpansion", 4)?;
        st.serialize_field("p", &self.p.get())?;
        st.serialize_field("terminated", &self.terminated)?;
        st.serialize_field("quotients", &Quotients(&self.quotients))?;
        st.serialize_field("source", &self.source)?;
        st.end()
    }
}

struct Quotients<'a>(&'a [PartialQuotient]);

impl Serialize for Quotients<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
        for q in self.0 {
            seq.serialize_element(q)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for CFExpansion {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            #[serde(default)]
            schema: Option<String>,
            p: u64,
            terminated: bool,
            quotients: Vec<PRational>,
            #[serde(default)]
            source: String,
        }
        let w = Wire::deserialize(deserializer)?;
        if let Some(s) = &w.schema {
            if s != crate::SCHEMA {
                return Err(de::Error::custom(format!("unknown schema {s:?}")));
            }
        }
        let p = OddPrime::new(w.p).map_err(de::Error::custom)?;
        let quotients = w
            .quotients
            .iter()
            .enumerate()
            .map(|(i, v)| PartialQuotient::from_value(p, v, i).map_err(de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(CFExpansion { p, quotients, terminated: w.terminated, source: w.source })
    }
}

/// The head of x: its digits at exponents <= 0, summed. For `index >= 1` the
/// input must have valuation <= -1 (it is a reciprocal remainder); index 0
/// accepts anything, returning 0 when x has no digits below exponent 1.
pub fn head(x: &PRational, p: OddPrime, index: usize) -> Result<PartialQuotient> {
    let v = match x.valuation(p) {
        Valuation::Infinite => {
            return PartialQuotient::from_value(p, &PRational::zero(), index);
        }
        Valuation::Finite(v) => v,
    };
    if index >= 1 && v >= 0 {
        return Err(Error::Domain(format!(
            "remainder at index {index} has valuation {v}, expected <= -1"
        )));
    }
    if v >= 1 {
        return PartialQuotient::from_value(p, &PRational::zero(), index);
    }
    let count = (1 - v) as usize;
    let (_, digits) = hensel_digits(x, p, count)?;
    quotient_from_digits(p, &digits, -v)
}

/// Same as [`head`] for a value known to finitely many digits. The digit
/// window must reach past exponent 0.
pub fn head_approx(x: &PAdicApprox, index: usize) -> Result<PartialQuotient> {
    let v = match x.valuation() {
        Valuation::Infinite => {
            return PartialQuotient::from_value(x.p(), &PRational::zero(), index);
        }
        Valuation::Finite(v) => v,
    };
    if index >= 1 && v >= 0 {
        return Err(Error::Domain(format!(
            "remainder at index {index} has valuation {v}, expected <= -1"
        )));
    }
    if v >= 1 {
        return PartialQuotient::from_value(x.p(), &PRational::zero(), index);
    }
    let window = x.window_end().expect("nonzero value has a finite window");
    if window < 1 {
        return Err(Error::InsufficientPrecision {
            index,
            detail: format!("digit window ends at exponent {window}, cannot read digit 0"),
        });
    }
    let count = (1 - v) as usize;
    quotient_from_digits(x.p(), &x.digits()[..count], -v)
}

/// Assemble digits at exponents -m..0 (low first) into a quotient.
fn quotient_from_digits(p: OddPrime, digits: &[u64], m: i64) -> Result<PartialQuotient> {
    let mut unit = BigInt::zero();
    for &d in digits.iter().rev() {
        unit = unit * p.to_bigint() + BigInt::from(d);
    }
    PartialQuotient::from_unit_exponent(p, unit, BigInt::from(m))
}

/// Run the expansion on an exact rational for at most `max_terms` quotients.
///
/// Every rational is eventually handled exactly: either the remainder equals
/// its own head at some step (`terminated = true`, the list is the full
/// expansion) or exactly `max_terms` quotients are produced.
pub fn expand(x: &PRational, p: OddPrime, max_terms: usize) -> Result<CFExpansion> {
    if max_terms == 0 {
        return Err(Error::Invalid("max_terms must be positive".into()));
    }
    let mut quotients = Vec::new();
    let mut terminated = false;
    let mut xi = x.clone();
    for k in 0..max_terms {
        let a = head(&xi, p, k)?;
        let a_val = a.value()?;
        quotients.push(a);
        if xi == a_val {
            terminated = true;
            break;
        }
        // The head matches xi's digits through exponent 0, so the difference
        // has valuation >= 1 and the next remainder has valuation <= -1.
        xi = (xi - a_val).recip()?;
    }
    Ok(CFExpansion { p, quotients, terminated, source: x.to_string() })
}

/// Run the expansion on a finite-precision value.
///
/// Proceeds while the digit window still determines each head, then fails
/// with [`Error::InsufficientPrecision`] naming the quotient index that could
/// not be determined. Termination is never claimed: a remainder whose window
/// is all zeros might be exactly zero or merely too small to see.
pub fn expand_approx(x: &PAdicApprox, max_terms: usize) -> Result<CFExpansion> {
    if max_terms == 0 {
        return Err(Error::Invalid("max_terms must be positive".into()));
    }
    let p = x.p();
    let mut quotients = Vec::new();
    let mut xi = x.clone();
    for k in 0..max_terms {
        let a = head_approx(&xi, k)?;
        let a_val = a.value()?;
        quotients.push(a);
        if xi.is_zero() {
            // Exact zero input: expansion is [0], complete.
            return Ok(CFExpansion { p, quotients, terminated: true, source: "digits".into() });
        }
        if k + 1 == max_terms {
            break;
        }
        let window = xi.window_end().expect("nonzero");
        let a_emb = PAdicApprox::from_rational_window(&a_val, p, window)?;
        let delta = match xi.sub(&a_emb) {
            Ok(d) => d,
            Err(Error::PrecisionExhausted(_)) => {
                return Err(Error::InsufficientPrecision {
                    index: k + 1,
                    detail: format!(
                        "remainder after {} quotient(s) is indistinguishable from zero; \
                         the expansion may terminate here",
                        k + 1
                    ),
                });
            }
            Err(e) => return Err(e),
        };
        let prec = delta.precision().expect("nonzero difference");
        let one = PAdicApprox::from_rational(&PRational::one(), p, prec)?;
        xi = one.div(&delta)?;
    }
    Ok(CFExpansion { p, quotients, terminated: false, source: "digits".into() })
}

/// Convergent data: the recurrence values p_n, q_n (elements of Z[1/p]) and
/// the reduced integer fraction P_n / Q_n of their ratio.
#[derive(Debug, Clone)]
pub struct Convergent {
    pub n: usize,
    pub pn: PRational,
    pub qn: PRational,
    pub reduced_num: BigInt,
    pub reduced_den: BigInt,
}

impl Serialize for Convergent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Convergent", 5)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("pn", &self.pn)?;
        st.serialize_field("qn", &self.qn)?;
        st.serialize_field("Pn", &self.reduced_num.to_string())?;
        st.serialize_field("Qn", &self.reduced_den.to_string())?;
        st.end()
    }
}

/// All convergents p_n/q_n of a quotient list, via
/// p_n = a_n p_(n-1) + p_(n-2), q_n = a_n q_(n-1) + q_(n-2)
/// with seeds p_(-1) = 1, p_0 = a_0, q_(-1) = 0, q_0 = 1.
///
/// Checks the determinant identity p_n q_(n-1) - p_(n-1) q_n = (-1)^(n+1)
/// at every index.
pub fn convergents(quotients: &[PartialQuotient]) -> Result<Vec<Convergent>> {
    if quotients.is_empty() {
        return Err(Error::EmptyQuotients);
    }
    let mut out = Vec::with_capacity(quotients.len());
    let mut p_prev = PRational::one(); // p_(-1)
    let mut q_prev = PRational::zero(); // q_(-1)
    let mut p_cur = quotients[0].value()?; // p_0
    let mut q_cur = PRational::one(); // q_0
    for (n, a) in quotients.iter().enumerate() {
        if n > 0 {
            let av = a.value()?;
            let p_next = &av * &p_cur + &p_prev;
            let q_next = &av * &q_cur + &q_prev;
            p_prev = std::mem::replace(&mut p_cur, p_next);
            q_prev = std::mem::replace(&mut q_cur, q_next);
        }
        let det = &p_cur * &q_prev - &p_prev * &q_cur;
        let expected = if n % 2 == 0 { -PRational::one() } else { PRational::one() };
        assert_eq!(det, expected, "determinant identity failed at n = {n}");
        let ratio = &p_cur / &q_cur;
        out.push(Convergent {
            n,
            pn: p_cur.clone(),
            qn: q_cur.clone(),
            reduced_num: ratio.numer().clone(),
            reduced_den: ratio.denom().clone(),
        });
    }
    Ok(out)
}

/// The exact value of a finite quotient list: the last convergent.
pub fn evaluate(quotients: &[PartialQuotient]) -> Result<PRational> {
    let cs = convergents(quotients)?;
    let last = cs.last().expect("nonempty");
    Ok(&last.pn / &last.qn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use proptest::prelude::*;

    fn p(n: u64) -> OddPrime {
        OddPrime::new(n).unwrap()
    }

    fn q(s: &str) -> PRational {
        s.parse().unwrap()
    }

    fn quotient_values(e: &CFExpansion) -> Vec<PRational> {
        e.quotients.iter().map(|a| a.value().unwrap()).collect()
    }

    #[test]
    fn head_of_minus_two_thirds() {
        // Digits of -2/3: 1 at exponent -1 (since -2 = 1 mod 3), then
        // remainder -1 contributing 2 at exponent 0; head = 1/3 + 2 = 7/3.
        let a = head(&q("-2/3"), p(3), 1).unwrap();
        assert_eq!(a.value().unwrap(), q("7/3"));
        assert_eq!(a.exponent(), &BigInt::from(1));
    }

    #[test]
    fn head_index_zero_cases() {
        assert!(head(&q("0"), p(3), 0).unwrap().is_zero());
        // Positive valuation: no digits at exponent <= 0.
        assert!(head(&q("3"), p(3), 0).unwrap().is_zero());
        assert_eq!(head(&q("5"), p(3), 0).unwrap().value().unwrap(), q("2"));
        // Index >= 1 requires negative valuation.
        assert!(head(&q("5"), p(3), 1).is_err());
        assert!(head(&q("0"), p(3), 1).is_err());
    }

    #[test]
    fn expand_one_half() {
        // xi_0 = 1/2 -> a_0 = 2; xi_1 = -2/3 -> 7/3; xi_2 = -1/3 -> 8/3; and
        // -1/3 is a fixed point of the iteration, so 8/3 repeats forever.
        let e = expand(&q("1/2"), p(3), 5).unwrap();
        assert!(!e.terminated);
        assert_eq!(
            quotient_values(&e),
            vec![q("2"), q("7/3"), q("8/3"), q("8/3"), q("8/3")]
        );
    }

    #[test]
    fn expand_terminates_on_own_head() {
        let e = expand(&q("7/3"), p(3), 10).unwrap();
        assert!(e.terminated);
        assert_eq!(quotient_values(&e), vec![q("7/3")]);

        let z = expand(&q("0"), p(3), 10).unwrap();
        assert!(z.terminated);
        assert_eq!(quotient_values(&z), vec![q("0")]);
    }

    #[test]
    fn evaluate_examples() {
        let a0 = PartialQuotient::head_term(p(3), &q("2")).unwrap();
        let a1 = PartialQuotient::tail_term(p(3), &q("7/3")).unwrap();
        assert_eq!(evaluate(&[a0.clone()]).unwrap(), q("2"));
        assert_eq!(evaluate(&[a0, a1]).unwrap(), q("17/7"));

        let zero = PartialQuotient::head_term(p(3), &q("0")).unwrap();
        assert_eq!(evaluate(&[zero]).unwrap(), q("0"));
        assert!(matches!(evaluate(&[]), Err(Error::EmptyQuotients)));
    }

    #[test]
    fn convergents_of_one_half_prefix() {
        let e = expand(&q("1/2"), p(3), 3).unwrap();
        let cs = convergents(&e.quotients).unwrap();
        assert_eq!(cs.len(), 3);
        assert_eq!(cs[1].pn, q("17/3"));
        assert_eq!(cs[1].qn, q("7/3"));
        assert_eq!(cs[2].qn, q("65/9"));
        assert_eq!(cs[2].qn.padic_norm(p(3)), q("9"));
        assert_eq!(cs[2].reduced_num.to_string(), "154");
        assert_eq!(cs[2].reduced_den.to_string(), "65");
    }

    #[test]
    fn expansion_of_section4_truncation_round_trips() {
        // a-sequence prefix 1, 3^-2, 3^-8, 3^-26: evaluating and re-expanding
        // recovers the quotients and terminates.
        let p3 = p(3);
        let quotients = vec![
            PartialQuotient::head_term(p3, &q("1")).unwrap(),
            PartialQuotient::tail_term(p3, &q("1/9")).unwrap(),
            PartialQuotient::tail_term(p3, &q("1/6561")).unwrap(),
            PartialQuotient::from_unit_exponent(p3, BigInt::one(), BigInt::from(26)).unwrap(),
        ];
        let value = evaluate(&quotients).unwrap();
        let e = expand(&value, p3, 4).unwrap();
        assert!(e.terminated);
        assert_eq!(e.quotients, quotients);
    }

    #[test]
    fn expand_approx_reports_failing_index() {
        // 1/2 to 4 digits: enough window for quotients 0 and 1, not for 2.
        let x = PAdicApprox::from_rational(&q("1/2"), p(3), 4).unwrap();
        match expand_approx(&x, 10) {
            Err(Error::InsufficientPrecision { index, .. }) => assert_eq!(index, 2),
            other => panic!("expected precision error, got {other:?}"),
        }
        // With max_terms small enough the window suffices.
        let e = expand_approx(&x, 2).unwrap();
        assert!(!e.terminated);
        assert_eq!(quotient_values(&e), vec![q("2"), q("7/3")]);
    }

    #[test]
    fn expand_approx_exact_zero() {
        let z = PAdicApprox::exact_zero(p(3));
        let e = expand_approx(&z, 5).unwrap();
        assert!(e.terminated);
        assert_eq!(quotient_values(&e), vec![q("0")]);
    }

    #[test]
    fn quotient_validation() {
        // 3 is divisible by p; 1/2 is not in Z[1/3]; 8/3 at index 0 is >= p... (valid!)
        assert!(PartialQuotient::head_term(p(3), &q("3")).is_err());
        assert!(PartialQuotient::head_term(p(3), &q("1/2")).is_err());
        assert!(PartialQuotient::head_term(p(3), &q("-1/3")).is_err());
        assert!(PartialQuotient::head_term(p(3), &q("10/3")).is_err()); // 10/3 > 3
        assert!(PartialQuotient::tail_term(p(3), &q("2")).is_err()); // m = 0
        assert!(PartialQuotient::tail_term(p(3), &q("0")).is_err());
        assert!(PartialQuotient::tail_term(p(3), &q("8/3")).is_ok());
        assert!(PartialQuotient::head_term(p(5), &q("3")).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let e = expand(&q("1/2"), p(3), 5).unwrap();
        let js = serde_json::to_string(&e).unwrap();
        assert!(js.starts_with(r#"{"p":3,"terminated":false,"quotients":[{"num":"2","den":"1"},"#));
        let back: CFExpansion = serde_json::from_str(&js).unwrap();
        assert_eq!(back, e);
        // Input validation: a zero quotient beyond index 0 is rejected.
        let bad = r#"{"p":3,"terminated":false,"quotients":[{"num":"2","den":"1"},{"num":"0","den":"1"}]}"#;
        assert!(serde_json::from_str::<CFExpansion>(bad).is_err());
    }

    fn arb_prime() -> impl Strategy<Value = OddPrime> {
        prop_oneof![Just(3u64), Just(5), Just(7)].prop_map(|n| OddPrime::new(n).unwrap())
    }

    fn arb_rat() -> impl Strategy<Value = PRational> {
        (-10_000i64..10_000, 1i64..10_000)
            .prop_map(|(n, d)| PRational::new(BigInt::from(n), BigInt::from(d)).unwrap())
            .prop_filter("nonzero", |x| !x.is_zero())
    }

    /// Random valid quotient list: digits of a random unit, random m per index.
    fn arb_quotients() -> impl Strategy<Value = (OddPrime, Vec<PartialQuotient>)> {
        (arb_prime(), 1usize..6, proptest::collection::vec((1u64..1000, 1i64..4), 0..5)).prop_map(
            |(p, a0_seed, tail_seeds)| {
                let a0 = PartialQuotient::head_term(
                    p,
                    &PRational::from_integer(a0_seed as u64 % p.get()),
                )
                .unwrap();
                let mut qs = vec![a0];
                for (useed, m) in tail_seeds {
                    let mut unit = BigInt::from(useed % (p.get().pow(m as u32 + 1) - 1) + 1);
                    if unit.mod_floor(&p.to_bigint()).is_zero() {
                        unit += 1;
                    }
                    qs.push(PartialQuotient::from_unit_exponent(p, unit, BigInt::from(m)).unwrap());
                }
                (p, qs)
            },
        )
    }

    proptest! {
        // Remainder law: with xi_0 = x and xi_(k+1) = 1/(xi_k - a_k), every
        // remainder past index 0 has valuation <= -1, every head matches its
        // remainder's digits through exponent 0, and the quotients are the
        // ones expand() returns.
        #[test]
        fn remainder_law(x in arb_rat(), p in arb_prime()) {
            let e = expand(&x, p, 8).unwrap();
            let mut xi = x.clone();
            for (k, a) in e.quotients.iter().enumerate() {
                if k > 0 {
                    let v = xi.valuation(p).finite().unwrap();
                    prop_assert!(v <= -1, "remainder {} has valuation {}", k, v);
                }
                prop_assert_eq!(a, &head(&xi, p, k).unwrap());
                let av = a.value().unwrap();
                if k + 1 < e.quotients.len() {
                    let diff = &xi - &av;
                    prop_assert!(diff.valuation(p) >= Valuation::Finite(1));
                    xi = diff.recip().unwrap();
                } else if e.terminated {
                    prop_assert_eq!(&xi, &av);
                }
            }
        }

        // expand(evaluate(L)) == L for any valid finite quotient list.
        #[test]
        fn round_trip_finite_expansions((p, qs) in arb_quotients()) {
            let value = evaluate(&qs).unwrap();
            let e = expand(&value, p, qs.len()).unwrap();
            prop_assert!(e.terminated);
            prop_assert_eq!(e.quotients, qs);
        }

        // Terminated expansions evaluate back to their input.
        #[test]
        fn terminated_expansions_evaluate_back(x in arb_rat(), p in arb_prime()) {
            let e = expand(&x, p, 8).unwrap();
            if e.terminated {
                prop_assert_eq!(evaluate(&e.quotients).unwrap(), x);
            }
        }
    }
}
