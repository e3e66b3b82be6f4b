use crate::analytic::{pow_linearization, pow_p};
use crate::error::{Error, Result};
use crate::expansion::{evaluate, PartialQuotient};
use crate::prime::OddPrime;
use crate::rational::{PRational, Valuation};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

/// A pair of quotient sequences defining limits A (from `a_seq`, with
/// a_0 = 1, so A is a one-unit) and B (from `b_seq`, with b_0 = 0, so B is a
/// topological nilpotent), together with the growth parameter alpha > 2.
#[derive(Debug, Clone)]
pub struct QuotientPair {
    pub p: OddPrime,
    pub a_seq: Vec<PartialQuotient>,
    pub b_seq: Vec<PartialQuotient>,
    pub alpha: PRational,
}

impl QuotientPair {
    pub fn new(
        p: OddPrime,
        a_seq: Vec<PartialQuotient>,
        b_seq: Vec<PartialQuotient>,
        alpha: PRational,
    ) -> Result<Self> {
        if alpha <= PRational::from_integer(2) {
            return Err(Error::Domain(format!("alpha = {alpha} must exceed 2")));
        }
        match a_seq.first() {
            Some(a0) if a0.value()? == PRational::one() => {}
            _ => return Err(Error::Domain("a_0 must be 1 (so A is a one-unit)".into())),
        }
        match b_seq.first() {
            Some(b0) if b0.is_zero() => {}
            _ => {
                return Err(Error::Domain(
                    "b_0 must be 0 (so B is a topological nilpotent)".into(),
                ))
            }
        }
        for q in a_seq.iter().chain(&b_seq) {
            if q.p() != p {
                return Err(Error::MismatchedPrime { left: p.get(), right: q.p().get() });
            }
        }
        Ok(QuotientPair { p, a_seq, b_seq, alpha })
    }
}

/// One row of the growth certificate: the exponent data behind
/// |a_n|_p >= |b_n|_p > |a_{n-1}|_p^alpha at a single index.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthRecord {
    pub n: usize,
    /// m_a(n): the exponent with |a_n|_p = p^m_a(n).
    pub m_a: String,
    /// m_b(n): the exponent with |b_n|_p = p^m_b(n).
    pub m_b: String,
    /// alpha * m_a(n-1), the exponent b_n must strictly exceed.
    pub required: String,
    pub a_ge_b: bool,
    pub b_gt_required: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthCertificate {
    pub p: u64,
    pub alpha: String,
    pub records: Vec<GrowthRecord>,
    pub overall: bool,
}

/// Check |a_n|_p >= |b_n|_p > |a_{n-1}|_p^alpha for n = 2..=n_max, i.e.
/// m_a(n) >= m_b(n) and m_b(n) > alpha * m_a(n-1), comparing exponents as
/// exact rationals. No norm is ever materialized, so exponents may be
/// astronomically large.
pub fn check_hypotheses(pair: &QuotientPair, n_max: usize) -> Result<GrowthCertificate> {
    if pair.alpha <= PRational::from_integer(2) {
        return Err(Error::Domain(format!("alpha = {} must exceed 2", pair.alpha)));
    }
    let needed = n_max + 1;
    let got = pair.a_seq.len().min(pair.b_seq.len());
    if got < needed {
        return Err(Error::SequenceTooShort { needed, got });
    }
    let mut records = Vec::new();
    let mut overall = true;
    for n in 2..=n_max {
        let m_a = pair.a_seq[n].exponent();
        let m_b = pair.b_seq[n].exponent();
        let m_a_prev = pair.a_seq[n - 1].exponent();
        let required = &pair.alpha * &PRational::from_integer(m_a_prev.clone());
        let a_ge_b = m_a >= m_b;
        let b_gt_required = PRational::from_integer(m_b.clone()) > required;
        overall &= a_ge_b && b_gt_required;
        records.push(GrowthRecord {
            n,
            m_a: m_a.to_string(),
            m_b: m_b.to_string(),
            required: required.to_string(),
            a_ge_b,
            b_gt_required,
        });
    }
    Ok(GrowthCertificate {
        p: pair.p.get(),
        alpha: pair.alpha.to_string(),
        records,
        overall,
    })
}

/// The worked example pair in Q_3: exponents k_1 = 1, k_n = 3*k_{n-1} + 4
/// (so k = 1, 7, 25, 79, 241, ...; closed form 3^n - 2), with
/// a_0 = 1, a_n = 3^(-k_n - 1) and b_0 = 0, b_n = 3^(-k_n), alpha = 3.
///
/// Sequences get indices 0..=n_max. Quotients are kept symbolic: for large n
/// the values have ~3^n digits and are never materialized.
pub fn gen_example(n_max: usize) -> Result<QuotientPair> {
    if n_max < 1 {
        return Err(Error::Invalid("n_max must be at least 1".into()));
    }
    let p = OddPrime::new(3).expect("3 is an odd prime");
    let mut a_seq = vec![PartialQuotient::head_term(p, &PRational::one())?];
    let mut b_seq = vec![PartialQuotient::head_term(p, &PRational::zero())?];
    let mut k = BigInt::one();
    for _ in 1..=n_max {
        a_seq.push(PartialQuotient::from_unit_exponent(p, BigInt::one(), &k + 1)?);
        b_seq.push(PartialQuotient::from_unit_exponent(p, BigInt::one(), k.clone())?);
        k = 3 * k + 4;
    }
    QuotientPair::new(p, a_seq, b_seq, PRational::from_integer(3))
}

/// The power-approximation inequality report at one index:
/// |A^B - A_n^(B_n)|_p <= C_3 / |q_n q_{n+1}|_p, where the q are the
/// convergent denominators of B's expansion and C_3 = max(|C1|_p, |C2|_p)
/// from the linearization of x^y at (A_n, B_n).
#[derive(Debug, Clone, Serialize)]
pub struct PowApproxReport {
    pub n: usize,
    pub precision: usize,
    /// Left side as a norm string: "0", "p^-L", or "<= p^-W" when the
    /// difference is invisible inside the working window.
    pub lhs: String,
    pub rhs: String,
    /// Exact valuation of A^B - A_n^(B_n) when it is visible.
    pub lhs_exponent: Option<i64>,
    /// c3_exponent + q_norm_exponent; rhs = p^(-rhs_exponent).
    pub rhs_exponent: i64,
    /// |C_3|_p = p^(-c3_exponent).
    pub c3_exponent: i64,
    /// 2*sum_{j<=n} m_b(j) + m_b(n+1) = -valuation(q_n q_{n+1}).
    pub q_norm_exponent: i64,
    pub holds: bool,
}

/// The limit of a quotient sequence, to `digits` significant digits.
///
/// When the requested index n is the last one, the sequence is its own
/// (finite) expansion and the value is exact. Otherwise the full sequence is
/// evaluated, which matches the limit mod p^E with
/// E = 2*sum_{i=1..last} m(i) + 1 (the tail of the expansion sits below
/// that); `digits` beyond E is a precision error.
fn limit_value(
    seq: &[PartialQuotient],
    n: usize,
    digits: usize,
    label: &str,
) -> Result<PRational> {
    let last = seq.len() - 1;
    if last > n {
        let mut resolution = BigInt::one();
        for q in &seq[1..] {
            resolution += 2 * q.exponent();
        }
        if BigInt::from(digits as u64) > resolution {
            return Err(Error::PrecisionExhausted(format!(
                "the {label}-sequence determines its limit only mod p^{resolution}; \
                 requested precision {digits} exceeds that (supply deeper quotients \
                 or lower the precision)"
            )));
        }
    }
    evaluate(seq)
}

/// Evaluate both sides of the power-approximation inequality at index n with
/// working precision `digits` and report whether it holds.
///
/// A and B are taken as the limits of the pair's sequences: exact when the
/// sequence ends at index n, and otherwise resolved through the full given
/// sequence (whose depth must support `digits`). B needs quotients through
/// index n+1 for the right side. The growth hypotheses are prechecked on
/// whatever index range the sequences cover.
pub fn verify_pow_approximation(
    pair: &QuotientPair,
    n: usize,
    digits: usize,
) -> Result<PowApproxReport> {
    if n == 0 {
        return Err(Error::Invalid("the inequality index n must be at least 1".into()));
    }
    let p = pair.p;
    if pair.a_seq.len() < n + 1 {
        return Err(Error::SequenceTooShort { needed: n + 1, got: pair.a_seq.len() });
    }
    if pair.b_seq.len() < n + 2 {
        return Err(Error::SequenceTooShort { needed: n + 2, got: pair.b_seq.len() });
    }
    let n_check = (n + 1).min(pair.a_seq.len() - 1).min(pair.b_seq.len() - 1);
    if n_check >= 2 {
        let cert = check_hypotheses(pair, n_check)?;
        if !cert.overall {
            return Err(Error::Domain(format!(
                "pair fails the growth hypotheses within n <= {n_check}"
            )));
        }
    }

    let a_lim = limit_value(&pair.a_seq, n, digits, "a")?;
    let b_lim = limit_value(&pair.b_seq, n, digits, "b")?;
    let a_n = evaluate(&pair.a_seq[..=n])?;
    let b_n = evaluate(&pair.b_seq[..=n])?;

    // Right side exponent from the norm identity |q_j| = |b_1 ... b_j|.
    let mut q_exp = BigInt::zero();
    for q in &pair.b_seq[1..=n] {
        q_exp += 2 * q.exponent();
    }
    q_exp += pair.b_seq[n + 1].exponent();
    let q_norm_exponent = q_exp.to_i64().ok_or_else(|| {
        Error::PrecisionExhausted(
            "denominator norm exponent exceeds the representable range".into(),
        )
    })?;

    let (c1, c2) = pow_linearization(&a_n, &b_n, p, digits)?;
    let c3_exponent = match (c1.valuation(), c2.valuation()) {
        (Valuation::Finite(x), Valuation::Finite(y)) => x.min(y),
        (Valuation::Finite(x), Valuation::Infinite) => x,
        (Valuation::Infinite, Valuation::Finite(y)) => y,
        (Valuation::Infinite, Valuation::Infinite) => {
            return Err(Error::Domain(
                "both linearization coefficients vanish; the right side is 0".into(),
            ))
        }
    };
    let rhs_exponent = c3_exponent + q_norm_exponent;
    let rhs = format!("{p}^-{rhs_exponent}");

    if a_lim == a_n && b_lim == b_n {
        return Ok(PowApproxReport {
            n,
            precision: digits,
            lhs: "0".into(),
            rhs,
            lhs_exponent: None,
            rhs_exponent,
            c3_exponent,
            q_norm_exponent,
            holds: true,
        });
    }

    let t_lim = pow_p(&a_lim, &b_lim, p, digits)?;
    let t_n = pow_p(&a_n, &b_n, p, digits)?;
    match t_lim.sub(&t_n) {
        Ok(diff) => {
            let lhs_exponent = diff.valuation().finite().expect("visible difference");
            Ok(PowApproxReport {
                n,
                precision: digits,
                lhs: format!("{p}^-{lhs_exponent}"),
                rhs,
                lhs_exponent: Some(lhs_exponent),
                rhs_exponent,
                c3_exponent,
                q_norm_exponent,
                holds: lhs_exponent >= rhs_exponent,
            })
        }
        Err(Error::PrecisionExhausted(_)) => {
            // The two powers agree through the whole window p^digits.
            if digits as i64 >= rhs_exponent {
                Ok(PowApproxReport {
                    n,
                    precision: digits,
                    lhs: format!("<= {p}^-{digits}"),
                    rhs,
                    lhs_exponent: None,
                    rhs_exponent,
                    c3_exponent,
                    q_norm_exponent,
                    holds: true,
                })
            } else {
                Err(Error::PrecisionExhausted(format!(
                    "cannot separate A^B from the convergent power at precision \
                     {digits}; rerun with precision above {rhs_exponent}"
                )))
            }
        }
        Err(e) => Err(e),
    }
}

/// Integer-coefficient polynomial in three variables, as a monomial list
/// coeff * X^i Y^j Z^k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly3 {
    terms: Vec<(BigInt, u32, u32, u32)>,
}

impl IntPoly3 {
    pub fn new(terms: Vec<(BigInt, u32, u32, u32)>) -> Self {
        IntPoly3 { terms }
    }

    pub fn eval(&self, x: &[PRational; 3]) -> Result<PRational> {
        let mut sum = PRational::zero();
        for (c, i, j, k) in &self.terms {
            let mono = &(&x[0].pow(*i as i64)? * &x[1].pow(*j as i64)?)
                * &x[2].pow(*k as i64)?;
            sum = &sum + &(&PRational::from_integer(c.clone()) * &mono);
        }
        Ok(sum)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationReport {
    /// |Q(x) - Q(y)|_p as a rational string.
    pub lhs: String,
    /// max_i |x_i - y_i|_p as a rational string.
    pub rhs: String,
    pub holds: bool,
}

/// The ultrametric perturbation bound for integer polynomials on integral
/// points: |Q(x) - Q(y)|_p <= max_i |x_i - y_i|_p (the constant is 1).
/// Verifies both sides exactly for one input pair.
pub fn polynomial_perturbation_check(
    poly: &IntPoly3,
    x: &[PRational; 3],
    y: &[PRational; 3],
    p: OddPrime,
) -> Result<PerturbationReport> {
    for (idx, c) in x.iter().chain(y.iter()).enumerate() {
        if c.valuation(p) < Valuation::Finite(0) {
            return Err(Error::Domain(format!(
                "coordinate {} = {c} is not p-integral (valuation < 0)",
                idx % 3
            )));
        }
    }
    let dq = &poly.eval(x)? - &poly.eval(y)?;
    let lhs_val = dq.valuation(p);
    let rhs_val = x
        .iter()
        .zip(y.iter())
        .map(|(a, b)| (a - b).valuation(p))
        .min()
        .expect("three coordinates");
    let norm = |v: Valuation| match v {
        Valuation::Infinite => "0".to_string(),
        Valuation::Finite(e) => PRational::from_integer(p.get())
            .pow(-e)
            .expect("small exponent")
            .to_string(),
    };
    Ok(PerturbationReport {
        lhs: norm(lhs_val),
        rhs: norm(rhs_val),
        holds: lhs_val >= rhs_val,
    })
}

/// The terminal exponent comparison: the smallest n where
/// p^E(n) > C6 * (p+1)^(n*d), with E(n) = 2*sum_{k=0}^{n-1} alpha^k + alpha^n.
#[derive(Debug, Clone, Serialize)]
pub struct ContradictionWitness {
    pub p: u64,
    pub alpha: String,
    pub d: u64,
    pub c6_log: f64,
    pub n_star: u64,
    /// E(n_star), exact.
    pub e_n_star: String,
}

/// E(n) = 2*(1 + alpha + ... + alpha^(n-1)) + alpha^n, exact.
pub fn exponent_growth(alpha: &PRational, n: u64) -> PRational {
    let mut sum = PRational::zero();
    let mut pow = PRational::one();
    for _ in 0..n {
        sum = &sum + &pow;
        pow = &pow * alpha;
    }
    &(&PRational::from_integer(2) * &sum) + &pow
}

// Directed rounding helpers: the neighbors of an f64 toward +/- infinity.
fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    f64::from_bits(if x > 0.0 { bits + 1 } else { bits - 1 })
}

fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

/// Outward-rounded f64 enclosure of a positive rational. `None` when the
/// value overflows f64 (i.e. it is at least ~1.8e308).
fn f64_enclosure(x: &PRational) -> Option<(f64, f64)> {
    let approx = x.to_f64()?;
    if !approx.is_finite() {
        return None;
    }
    // to_f64 is correct to within rounding; widen by two steps per side.
    Some((next_down(next_down(approx)), next_up(next_up(approx))))
}

/// Exact decision of p^E > e^(c6_log) * (p+1)^(n*d), used when the interval
/// comparison is inconclusive.
///
/// c6_log is treated as the exact (dyadic) rational its bit pattern denotes;
/// e^c is enclosed by Taylor partial sums with an explicit remainder bound,
/// tightened until the comparison resolves. With c6_log = 0 this degenerates
/// to an exact integer power comparison.
pub(crate) fn exceeds_exactly(
    p: OddPrime,
    e_n: &PRational,
    n: u64,
    d: u64,
    c6_log: f64,
) -> Result<bool> {
    let e_den = e_n
        .denom()
        .to_u32()
        .filter(|&den| den <= 1 << 16)
        .ok_or_else(|| {
            Error::Undecidable(format!(
                "exact comparison infeasible: exponent denominator {} too large",
                e_n.denom()
            ))
        })?;
    let e_num = e_n.numer().to_u64().ok_or_else(|| {
        Error::Undecidable("exact comparison infeasible: exponent numerator too large".into())
    })?;
    // p^E > C (p+1)^(nd)  <=>  p^E_num > C^E_den (p+1)^(nd E_den).
    let nd_eden = n
        .checked_mul(d)
        .and_then(|v| v.checked_mul(e_den as u64))
        .ok_or_else(|| Error::Undecidable("exponent n*d overflows".into()))?;
    if e_num.max(nd_eden) > 1 << 24 {
        return Err(Error::Undecidable(
            "exact comparison infeasible: integer powers too large".into(),
        ));
    }
    let lhs = p.to_bigint().pow(e_num as u32);
    let base = BigInt::from(p.get() + 1);
    let rhs_power = base.pow(nd_eden as u32);
    if c6_log == 0.0 {
        return Ok(lhs > rhs_power);
    }
    // Enclose e^c with c the exact rational value of the f64.
    let c = f64_to_rational(c6_log);
    let mut terms = 24usize;
    loop {
        let (lo, hi) = exp_enclosure(&c, terms)?;
        // lhs_exact = p^E; decide lhs_exact > e^c * rhs_power via the
        // enclosure, still raised to the E_den power on the C side.
        let lhs_q = PRational::from_integer(lhs.clone());
        let rhs_hi = &hi.pow(e_den as i64)? * &PRational::from_integer(rhs_power.clone());
        if lhs_q > rhs_hi {
            return Ok(true);
        }
        let rhs_lo = &lo.pow(e_den as i64)? * &PRational::from_integer(rhs_power.clone());
        if lhs_q <= rhs_lo {
            return Ok(false);
        }
        terms *= 2;
        if terms > 4096 {
            return Err(Error::Undecidable(
                "exp enclosure did not separate the comparison".into(),
            ));
        }
    }
}

/// The exact rational equal to an f64 (mantissa times a power of two).
fn f64_to_rational(x: f64) -> PRational {
    debug_assert!(x.is_finite());
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let fraction = bits & ((1u64 << 52) - 1);
    let (mantissa, exp2) = if exponent == 0 {
        (fraction, -1074i64)
    } else {
        (fraction | (1 << 52), exponent - 1075)
    };
    let num = BigInt::from(sign) * BigInt::from(mantissa);
    if exp2 >= 0 {
        PRational::new(num << exp2 as usize, BigInt::one()).unwrap_or_else(|_| PRational::zero())
    } else {
        PRational::new(num, BigInt::one() << (-exp2) as usize)
            .unwrap_or_else(|_| PRational::zero())
    }
}

/// Rational enclosure of e^c for c >= 0: Taylor partial sum plus a geometric
/// remainder bound.
fn exp_enclosure(c: &PRational, terms: usize) -> Result<(PRational, PRational)> {
    let mut sum = PRational::one();
    let mut term = PRational::one();
    for j in 1..=terms {
        term = &(&term * c) / &PRational::from_integer(j as u64);
        sum = &sum + &term;
    }
    // Remainder after `terms` terms: next term times 1/(1 - c/(terms+2)),
    // valid once c < terms + 2.
    let next = &(&term * c) / &PRational::from_integer(terms as u64 + 1);
    let ratio = c / &PRational::from_integer(terms as u64 + 2);
    if ratio >= PRational::one() {
        return Err(Error::Undecidable(
            "exp enclosure requires more terms than the cap".into(),
        ));
    }
    let tail = &next / &(&PRational::one() - &ratio);
    Ok((sum.clone(), &sum + &tail))
}

/// Find the smallest n <= n_cap with E(n) * ln(p) > c6_log + n*d*ln(p+1).
///
/// The scan compares outward-rounded f64 intervals first and falls back to
/// the exact comparison only when the intervals overlap, so verdicts never
/// depend on floating-point rounding.
pub fn contradiction_witness(
    p: OddPrime,
    alpha: &PRational,
    d: u64,
    c6_log: f64,
    n_cap: u64,
) -> Result<ContradictionWitness> {
    if alpha <= &PRational::from_integer(2) {
        return Err(Error::Domain(format!("alpha = {alpha} must exceed 2")));
    }
    if d == 0 {
        return Err(Error::Domain("degree d must be positive".into()));
    }
    if !(c6_log >= 0.0 && c6_log.is_finite()) {
        return Err(Error::Domain(format!("c6_log = {c6_log} must be finite and >= 0")));
    }
    let ln_p = (p.get() as f64).ln();
    let ln_p1 = ((p.get() + 1) as f64).ln();
    let mut sum = PRational::one(); // 1 + alpha + ... + alpha^(n-1), at n = 1
    let mut pow = alpha.clone(); // alpha^n, at n = 1
    for n in 1..=n_cap {
        let e_n = &(&PRational::from_integer(2) * &sum) + &pow;
        let found = match f64_enclosure(&e_n) {
            None => true, // E(n) >= ~1.8e308 dwarfs the linear right side.
            Some((e_lo, e_hi)) => {
                let lhs_lo = next_down(e_lo * next_down(ln_p));
                let lhs_hi = next_up(e_hi * next_up(ln_p));
                let rhs_term = (n * d) as f64;
                let rhs_lo = next_down(c6_log + next_down(rhs_term * next_down(ln_p1)));
                let rhs_hi = next_up(c6_log + next_up(rhs_term * next_up(ln_p1)));
                if lhs_lo > rhs_hi {
                    true
                } else if lhs_hi <= rhs_lo {
                    false
                } else {
                    exceeds_exactly(p, &e_n, n, d, c6_log)?
                }
            }
        };
        if found {
            return Ok(ContradictionWitness {
                p: p.get(),
                alpha: alpha.to_string(),
                d,
                c6_log,
                n_star: n,
                e_n_star: e_n.to_string(),
            });
        }
        sum = &sum + &pow;
        pow = &pow * alpha;
    }
    Err(Error::WitnessNotFound { n_cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::convergents;
    use proptest::prelude::*;

    fn p3() -> OddPrime {
        OddPrime::new(3).unwrap()
    }

    fn q(s: &str) -> PRational {
        s.parse().unwrap()
    }

    fn sym(p: OddPrime, m: i64) -> PartialQuotient {
        PartialQuotient::from_unit_exponent(p, BigInt::one(), BigInt::from(m)).unwrap()
    }

    #[test]
    fn example_exponents_follow_the_recurrence() {
        let pair = gen_example(6).unwrap();
        let k: Vec<String> =
            pair.b_seq[1..].iter().map(|b| b.exponent().to_string()).collect();
        assert_eq!(k, ["1", "7", "25", "79", "241", "727"]);
        for n in 2..=6 {
            let diff = pair.b_seq[n].exponent() - 3 * pair.b_seq[n - 1].exponent();
            assert_eq!(diff, BigInt::from(4));
        }
        // |a_n| = 3^(k_n + 1) >= |b_n| = 3^(k_n).
        for n in 1..=6 {
            assert_eq!(
                pair.a_seq[n].exponent(),
                &(pair.b_seq[n].exponent() + 1)
            );
        }
    }

    #[test]
    fn example_passes_hypotheses_through_ten() {
        let pair = gen_example(10).unwrap();
        let cert = check_hypotheses(&pair, 10).unwrap();
        assert!(cert.overall);
        assert_eq!(cert.records.len(), 9);
        assert!(cert.records.iter().all(|r| r.a_ge_b && r.b_gt_required));
    }

    #[test]
    fn example_passes_hypotheses_at_depth_two_hundred() {
        // Exponents here are ~3^200; everything must stay symbolic.
        let pair = gen_example(200).unwrap();
        assert!(check_hypotheses(&pair, 200).unwrap().overall);
    }

    #[test]
    fn constant_sequences_fail_at_n_two() {
        let p = p3();
        let a = vec![
            PartialQuotient::head_term(p, &q("1")).unwrap(),
            sym(p, 1),
            sym(p, 1),
        ];
        let b = vec![
            PartialQuotient::head_term(p, &q("0")).unwrap(),
            sym(p, 1),
            sym(p, 1),
        ];
        let pair = QuotientPair::new(p, a, b, q("3")).unwrap();
        let cert = check_hypotheses(&pair, 2).unwrap();
        assert!(!cert.overall);
        let r = &cert.records[0];
        assert_eq!(r.n, 2);
        assert!(r.a_ge_b);
        assert!(!r.b_gt_required); // 1 > 3*1 is false
    }

    #[test]
    fn alpha_must_exceed_two() {
        let p = p3();
        let a = vec![PartialQuotient::head_term(p, &q("1")).unwrap(), sym(p, 1)];
        let b = vec![PartialQuotient::head_term(p, &q("0")).unwrap(), sym(p, 2)];
        assert!(matches!(
            QuotientPair::new(p, a, b, q("2")),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn sequences_too_short_is_reported() {
        let pair = gen_example(3).unwrap();
        assert!(matches!(
            check_hypotheses(&pair, 5),
            Err(Error::SequenceTooShort { needed: 6, got: 4 })
        ));
    }

    #[test]
    fn leading_quotient_constraints() {
        let p = p3();
        let bad_a = vec![PartialQuotient::head_term(p, &q("2")).unwrap(), sym(p, 1)];
        let b = vec![PartialQuotient::head_term(p, &q("0")).unwrap(), sym(p, 1)];
        assert!(QuotientPair::new(p, bad_a, b.clone(), q("3")).is_err());
        let a = vec![PartialQuotient::head_term(p, &q("1")).unwrap(), sym(p, 1)];
        assert!(QuotientPair::new(p, a.clone(), a.clone(), q("3")).is_err());
        assert!(QuotientPair::new(p, a, b, q("3")).is_ok());
    }

    #[test]
    fn pow_approximation_on_example_pair() {
        // Depth 5 resolves both limits past 3^128.
        let pair = gen_example(5).unwrap();
        let report = verify_pow_approximation(&pair, 2, 128).unwrap();
        assert!(report.holds);
        assert_eq!(report.q_norm_exponent, 41); // 2*(1+7) + 25
        assert_eq!(report.c3_exponent, 1);
        assert_eq!(report.rhs_exponent, 42);
        assert_eq!(report.lhs_exponent, Some(43));
    }

    #[test]
    fn pow_approximation_rhs_matches_convergent_norms() {
        // Small sequain: b = [0; 3^-1, 3^-4, 3^-9]; the rhs exponent at n = 1
        // must equal -valuation(q_1 q_2) of B's convergents.
        let p = p3();
        let a = vec![
            PartialQuotient::head_term(p, &q("1")).unwrap(),
            sym(p, 1),
            sym(p, 4),
            sym(p, 13),
        ];
        let b = vec![
            PartialQuotient::head_term(p, &q("0")).unwrap(),
            sym(p, 1),
            sym(p, 4),
            sym(p, 13),
        ];
        let pair = QuotientPair::new(p, a, b, q("3")).unwrap();
        let report = verify_pow_approximation(&pair, 1, 10).unwrap();
        assert_eq!(report.q_norm_exponent, 2 + 4);

        let cs = convergents(&pair.b_seq[..3]).unwrap();
        let norm_product =
            (&cs[1].qn * &cs[2].qn).padic_norm(p);
        assert_eq!(norm_product, q("3").pow(report.q_norm_exponent).unwrap());
    }

    #[test]
    fn pow_approximation_degenerate_a_reduces_to_b_term() {
        // a ends at index 1 (A = A_1 = 4 exactly); b continues.
        let p = p3();
        let a = vec![PartialQuotient::head_term(p, &q("1")).unwrap(), sym(p, 1)];
        let b = vec![
            PartialQuotient::head_term(p, &q("0")).unwrap(),
            sym(p, 1),
            sym(p, 4),
        ];
        let pair = QuotientPair::new(p, a, b, q("3")).unwrap();
        let report = verify_pow_approximation(&pair, 1, 10).unwrap();
        assert!(report.holds);
        // lhs = |C2 (B - B_1)| = p^-(1 + 6); rhs = p^-(1 + 6).
        assert_eq!(report.lhs_exponent, Some(7));
        assert_eq!(report.rhs_exponent, 7);
    }

    #[test]
    fn pow_approximation_insufficient_depth_errors() {
        let pair = gen_example(3).unwrap();
        // Resolution through depth 3: the a-sequence pins its limit only mod
        // p^(2*(2+8+26)+1) = p^73 < p^128.
        match verify_pow_approximation(&pair, 2, 128) {
            Err(Error::PrecisionExhausted(msg)) => assert!(msg.contains("73"), "{msg}"),
            other => panic!("expected precision error, got {other:?}"),
        }
    }

    #[test]
    fn perturbation_bound_trivial_and_tight_cases() {
        let p = p3();
        let sum_poly = IntPoly3::new(vec![
            (BigInt::one(), 1, 0, 0),
            (BigInt::one(), 0, 1, 0),
            (BigInt::one(), 0, 0, 1),
        ]);
        let x = [q("1"), q("2"), q("3")];
        let r = polynomial_perturbation_check(&sum_poly, &x, &x.clone(), p).unwrap();
        assert!(r.holds);
        assert_eq!(r.lhs, "0");
        assert_eq!(r.rhs, "0");

        let prod_poly = IntPoly3::new(vec![(BigInt::one(), 1, 1, 1)]);
        let ones = [q("1"), q("1"), q("1")];
        let moved = [q("4"), q("1"), q("1")];
        let r = polynomial_perturbation_check(&prod_poly, &ones, &moved, p).unwrap();
        assert!(r.holds);
        assert_eq!(r.lhs, "1/3");
        assert_eq!(r.rhs, "1/3");

        // Tightness for the monomial X on single-coordinate moves.
        let x_poly = IntPoly3::new(vec![(BigInt::one(), 1, 0, 0)]);
        let a = [q("5"), q("0"), q("0")];
        let b = [q("14"), q("0"), q("0")];
        let r = polynomial_perturbation_check(&x_poly, &a, &b, p).unwrap();
        assert_eq!(r.lhs, r.rhs);
        assert!(r.holds);
    }

    #[test]
    fn perturbation_rejects_non_integral_points() {
        let p = p3();
        let poly = IntPoly3::new(vec![(BigInt::one(), 1, 0, 0)]);
        let x = [q("1/3"), q("0"), q("0")];
        assert!(polynomial_perturbation_check(&poly, &x, &x.clone(), p).is_err());
    }

    #[test]
    fn witness_frozen_examples() {
        // Oracle: exact integer comparisons. E(1) = 5: 3^5 = 243 <= 4^5 =
        // 1024. E(2) = 17: 3^17 = 129140163 > 4^10 = 1048576.
        assert!(BigInt::from(3).pow(5) <= BigInt::from(4).pow(5));
        assert!(BigInt::from(3).pow(17) > BigInt::from(4).pow(10));

        let w = contradiction_witness(p3(), &q("3"), 5, 0.0, 100).unwrap();
        assert_eq!(w.n_star, 2);
        assert_eq!(w.e_n_star, "17");

        let w1 = contradiction_witness(p3(), &q("3"), 1, 0.0, 100).unwrap();
        assert_eq!(w1.n_star, 1);
        assert_eq!(w1.e_n_star, "5");
    }

    #[test]
    fn exponent_growth_closed_form_for_alpha_three() {
        for n in 1..8u64 {
            let expected =
                PRational::from_integer(2 * BigInt::from(3).pow(n as u32) - 1);
            assert_eq!(exponent_growth(&q("3"), n), expected);
        }
    }

    #[test]
    fn witness_monotone_in_alpha_and_degree() {
        let alphas = [q("5/2"), q("3"), q("4")];
        for d in 1..10u64 {
            let stars: Vec<u64> = alphas
                .iter()
                .map(|a| contradiction_witness(p3(), a, d, 0.0, 10_000).unwrap().n_star)
                .collect();
            assert!(stars[0] >= stars[1] && stars[1] >= stars[2], "{stars:?} at d = {d}");
        }
        for a in &alphas {
            let mut prev = 0u64;
            for d in 1..10u64 {
                let n = contradiction_witness(p3(), a, d, 0.0, 10_000).unwrap().n_star;
                assert!(n >= prev, "n_star regressed at d = {d}");
                prev = n;
            }
        }
    }

    #[test]
    fn witness_not_found_within_cap() {
        assert!(matches!(
            contradiction_witness(p3(), &q("5/2"), 1_000_000, 0.0, 1),
            Err(Error::WitnessNotFound { n_cap: 1 })
        ));
    }

    #[test]
    fn exact_fallback_decides_near_ties() {
        // 3^17 vs e^c * 4^10: true at c = 4 (rhs ~5.73e7), false at c = 5
        // (rhs ~1.56e8).
        let e = q("17");
        assert!(exceeds_exactly(p3(), &e, 2, 5, 4.0).unwrap());
        assert!(!exceeds_exactly(p3(), &e, 2, 5, 5.0).unwrap());
        // c6_log = 0 is the pure integer comparison.
        assert!(exceeds_exactly(p3(), &e, 2, 5, 0.0).unwrap());
        assert!(!exceeds_exactly(p3(), &q("5"), 1, 5, 0.0).unwrap());
    }

    #[test]
    fn dyadic_rational_of_f64_is_exact() {
        assert_eq!(f64_to_rational(0.5), q("1/2"));
        assert_eq!(f64_to_rational(-1.25), q("-5/4"));
        assert_eq!(f64_to_rational(3.0), q("3"));
        assert_eq!(f64_to_rational(0.1) * q("10"), q("10") * f64_to_rational(0.1));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn perturbation_bound_fuzz(
            coeffs in proptest::collection::vec((-9i64..10, 0u32..3, 0u32..3, 0u32..3), 1..5),
            xs in proptest::array::uniform3(-50i64..50),
            ys in proptest::array::uniform3(-50i64..50),
        ) {
            let poly = IntPoly3::new(
                coeffs.into_iter().map(|(c, i, j, k)| (BigInt::from(c), i, j, k)).collect(),
            );
            let x = xs.map(PRational::from_integer);
            let y = ys.map(PRational::from_integer);
            let r = polynomial_perturbation_check(&poly, &x, &y, p3()).unwrap();
            prop_assert!(r.holds);
        }
    }

    proptest! {
        #[test]
        fn hypothesis_check_is_monotone_in_n(upto in 3usize..12) {
            let pair = gen_example(12).unwrap();
            let full = check_hypotheses(&pair, 12).unwrap();
            let partial = check_hypotheses(&pair, upto).unwrap();
            prop_assert!(partial.overall);
            prop_assert_eq!(
                &full.records[..partial.records.len()].len(),
                &partial.records.len()
            );
            for (a, b) in full.records.iter().zip(&partial.records) {
                prop_assert_eq!(a.a_ge_b, b.a_ge_b);
                prop_assert_eq!(a.b_gt_required, b.b_gt_required);
            }
        }
    }
}
