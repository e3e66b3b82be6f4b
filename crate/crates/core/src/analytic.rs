use crate::approx::{base_p_digits, mod_inverse, PAdicApprox};
use crate::error::{Error, Result};
use crate::prime::OddPrime;
use crate::rational::{PRational, Valuation};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::fmt;

/// The two convergence domains of the series in this module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AnalyticDomain {
    /// 1 + pZ_p: valuation(x - 1) >= 1. Domain of the logarithm.
    OneUnits,
    /// pZ_p: valuation(x) >= 1. Domain of the exponential.
    Nilpotents,
}

impl AnalyticDomain {
    pub fn contains(self, x: &PRational, p: OddPrime) -> bool {
        let v = match self {
            AnalyticDomain::OneUnits => (x - &PRational::one()).valuation(p),
            AnalyticDomain::Nilpotents => x.valuation(p),
        };
        v >= Valuation::Finite(1)
    }
}

impl fmt::Display for AnalyticDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticDomain::OneUnits => write!(f, "one-units 1+pZ_p"),
            AnalyticDomain::Nilpotents => write!(f, "topological nilpotents pZ_p"),
        }
    }
}

/// How many series terms were summed and why that is enough.
#[derive(Debug, Clone, Serialize)]
pub struct TruncationPlan {
    /// Requested number of correct significant digits.
    pub target_precision: usize,
    /// Highest term index included in the partial sum.
    pub term_count: usize,
    /// The valuation bound justifying that every omitted term is invisible
    /// at the target precision.
    pub justification: String,
}

fn domain_error(x: &PRational, p: OddPrime, domain: AnalyticDomain) -> Error {
    Error::Domain(format!("{x} is not in the {domain} domain of Q_{p}"))
}

/// v_p(n!) = sum_{i>=1} floor(n / p^i) (Legendre).
fn factorial_valuation(n: u64, p: u64) -> i64 {
    let mut total = 0i64;
    let mut q = n / p;
    while q > 0 {
        total += q as i64;
        q /= p;
    }
    total
}

/// Largest term index whose exact valuation n*v - v_p(n) falls short of the
/// window target v + digits. Term n of log(1+t) is +-t^n/n, with valuation
/// exactly n*v - v_p(n) when valuation(t) = v; for n past the scan horizon
/// the continuous bound n*v - log_p(n) already clears the target.
fn log_plan(v: i64, digits: usize, p: OddPrime) -> TruncationPlan {
    let target = v + digits as i64;
    let pu = p.get();
    let mut n_max = 1u64;
    let mut n = 1u64;
    loop {
        let floor_log = n.ilog(pu) as i64;
        if n as i64 * v - floor_log - 1 >= target {
            // n*v - log_p(n) >= target from here on, and it only grows.
            break;
        }
        let vp_n = {
            let mut k = 0i64;
            let mut m = n;
            while m % pu == 0 {
                k += 1;
                m /= pu;
            }
            k
        };
        if (n as i64) * v - vp_n < target {
            n_max = n;
        }
        n += 1;
    }
    TruncationPlan {
        target_precision: digits,
        term_count: n_max as usize,
        justification: format!(
            "log series term n has valuation n*{v} - v_p(n); \
             every term past n = {n_max} has valuation >= {target} = \
             leading valuation {v} + {digits} digits"
        ),
    }
}

/// Same for exp(x): term n is x^n/n! with valuation exactly n*v - v_p(n!),
/// which is >= (n+1)/2 for v >= 1 and p >= 3, so scanning to 2*digits + 2
/// covers every index that could fall short of `digits`.
fn exp_plan(v: i64, digits: usize, p: OddPrime) -> TruncationPlan {
    let target = digits as i64;
    let pu = p.get();
    let horizon = 2 * digits as u64 + 2;
    let mut n_max = 0u64;
    for n in 0..=horizon {
        if (n as i64) * v - factorial_valuation(n, pu) < target {
            n_max = n;
        }
    }
    TruncationPlan {
        target_precision: digits,
        term_count: n_max as usize,
        justification: format!(
            "exp series term n has valuation n*{v} - v_p(n!) >= (n+1)/2; \
             every term past n = {n_max} has valuation >= {target}, the \
             window of the unit-valued result"
        ),
    }
}

/// Replace x by its canonical representative mod p^window (same digits, small
/// numerator), so series powers stay bounded.
fn canonical_rep(x: &PRational, p: OddPrime, window: i64) -> Result<PRational> {
    Ok(PAdicApprox::from_rational_window(x, p, window)?.to_rational())
}

/// log(a) = sum_{n>=1} (-1)^(n-1) (a-1)^n / n for a in 1+pZ_p, to `digits`
/// significant digits, together with the truncation plan used.
///
/// The partial sum is accumulated in exact rational arithmetic and reduced to
/// digits once at the end, so the only error source is the explicitly
/// justified tail cut. The result lies in pZ_p with
/// valuation(log a) = valuation(a - 1).
pub fn log_p_with_plan(
    a: &PRational,
    p: OddPrime,
    digits: usize,
) -> Result<(PAdicApprox, TruncationPlan)> {
    if digits == 0 {
        return Err(Error::Invalid("precision must be positive".into()));
    }
    let t = a - &PRational::one();
    if t.is_zero() {
        let plan = TruncationPlan {
            target_precision: digits,
            term_count: 0,
            justification: "log(1): every series term vanishes".into(),
        };
        return Ok((PAdicApprox::exact_zero(p), plan));
    }
    let v = match t.valuation(p) {
        Valuation::Finite(v) if v >= 1 => v,
        _ => return Err(domain_error(a, p, AnalyticDomain::OneUnits)),
    };
    let window = v + digits as i64;
    let t = canonical_rep(&t, p, window)?;
    let plan = log_plan(v, digits, p);
    let mut sum = PRational::zero();
    let mut power = PRational::one();
    for n in 1..=plan.term_count {
        power = &power * &t;
        let term = &power / &PRational::from_integer(n as i64);
        if n % 2 == 1 {
            sum = &sum + &term;
        } else {
            sum = &sum - &term;
        }
    }
    let result = PAdicApprox::from_rational_window(&sum, p, window)?;
    debug_assert_eq!(result.valuation(), Valuation::Finite(v));
    Ok((result, plan))
}

pub fn log_p(a: &PRational, p: OddPrime, digits: usize) -> Result<PAdicApprox> {
    Ok(log_p_with_plan(a, p, digits)?.0)
}

/// [`log_p`] for a finite-precision input. The input window caps the output:
/// a is known mod p^W, and the logarithm is an isometry on one-units, so the
/// result is correct mod p^W at best.
pub fn log_p_approx(a: &PAdicApprox, digits: usize) -> Result<PAdicApprox> {
    let p = a.p();
    if a.is_zero() {
        return Err(domain_error(&PRational::zero(), p, AnalyticDomain::OneUnits));
    }
    let window = a.window_end().expect("nonzero");
    let a_rat = a.to_rational();
    let t = &a_rat - &PRational::one();
    if t.is_zero() {
        return Err(Error::PrecisionExhausted(format!(
            "input is 1 across its whole digit window; log is 0 mod p^{window} \
             but no significant digit is determined"
        )));
    }
    let v = match t.valuation(p) {
        Valuation::Finite(v) if v >= 1 => v,
        _ => return Err(domain_error(&a_rat, p, AnalyticDomain::OneUnits)),
    };
    let capped = digits.min((window - v) as usize);
    log_p(&a_rat, p, capped)
}

/// exp(x) = sum_{n>=0} x^n/n! for x in pZ_p, to `digits` significant digits.
/// The result is a one-unit with valuation(exp(x) - 1) = valuation(x).
pub fn exp_p_with_plan(
    x: &PRational,
    p: OddPrime,
    digits: usize,
) -> Result<(PAdicApprox, TruncationPlan)> {
    if digits == 0 {
        return Err(Error::Invalid("precision must be positive".into()));
    }
    let one = PRational::one();
    if x.is_zero() {
        let plan = TruncationPlan {
            target_precision: digits,
            term_count: 0,
            justification: "exp(0): only the constant term 1 survives".into(),
        };
        return Ok((PAdicApprox::from_rational(&one, p, digits)?, plan));
    }
    let v = match x.valuation(p) {
        Valuation::Finite(v) if v >= 1 => v,
        _ => return Err(domain_error(x, p, AnalyticDomain::Nilpotents)),
    };
    let window = digits as i64;
    if v >= window {
        // Every non-constant term is invisible at this precision.
        let plan = TruncationPlan {
            target_precision: digits,
            term_count: 0,
            justification: format!(
                "exp input has valuation {v} >= {digits}; exp(x) = 1 mod p^{digits}"
            ),
        };
        return Ok((PAdicApprox::from_rational(&one, p, digits)?, plan));
    }
    let x = canonical_rep(x, p, window)?;
    let plan = exp_plan(v, digits, p);
    let mut sum = PRational::one();
    let mut term = PRational::one();
    for n in 1..=plan.term_count {
        term = &(&term * &x) / &PRational::from_integer(n as i64);
        sum = &sum + &term;
    }
    let result = PAdicApprox::from_rational_window(&sum, p, window)?;
    debug_assert_eq!(result.valuation(), Valuation::Finite(0));
    Ok((result, plan))
}

pub fn exp_p(x: &PRational, p: OddPrime, digits: usize) -> Result<PAdicApprox> {
    Ok(exp_p_with_plan(x, p, digits)?.0)
}

/// [`exp_p`] for a finite-precision input; the exponential is an isometry on
/// pZ_p, so the input window caps the output precision.
pub fn exp_p_approx(x: &PAdicApprox, digits: usize) -> Result<PAdicApprox> {
    let p = x.p();
    if x.is_zero() {
        return exp_p(&PRational::zero(), p, digits);
    }
    match x.valuation() {
        Valuation::Finite(v) if v >= 1 => {}
        _ => return Err(domain_error(&x.to_rational(), p, AnalyticDomain::Nilpotents)),
    }
    let window = x.window_end().expect("nonzero");
    let capped = digits.min(window.max(1) as usize);
    exp_p(&x.to_rational(), p, capped)
}

/// a^b = exp(b * log a) for a in 1+pZ_p, b in pZ_p, to `digits` significant
/// digits. The composition guard valuation(b * log a) >= 2 always holds on
/// these domains and is asserted.
pub fn pow_p(a: &PRational, b: &PRational, p: OddPrime, digits: usize) -> Result<PAdicApprox> {
    if digits == 0 {
        return Err(Error::Invalid("precision must be positive".into()));
    }
    if !AnalyticDomain::OneUnits.contains(a, p) {
        return Err(domain_error(a, p, AnalyticDomain::OneUnits));
    }
    if !AnalyticDomain::Nilpotents.contains(b, p) {
        return Err(domain_error(b, p, AnalyticDomain::Nilpotents));
    }
    let one = PRational::one();
    if b.is_zero() || a == &one {
        return PAdicApprox::from_rational(&one, p, digits);
    }
    let v_a = (a - &one).valuation(p).finite().expect("a != 1");
    let v_b = b.valuation(p).finite().expect("b != 0");
    // exp needs its argument mod p^digits; log a carries valuation v_a, so
    // digits - v_b - v_a significant log digits suffice.
    let needed = digits as i64 - v_b - v_a;
    if needed <= 0 {
        // b*log(a) has valuation >= digits: a^b = 1 at this precision.
        return PAdicApprox::from_rational(&one, p, digits);
    }
    let (log_a, _) = log_p_with_plan(a, p, needed as usize)?;
    let t = b * &log_a.to_rational();
    let t_val = t.valuation(p).finite().expect("nonzero");
    assert!(t_val >= 2, "composition guard: valuation(b*log a) = {t_val} < 2");
    exp_p(&t, p, digits)
}

/// [`pow_p`] for finite-precision inputs, capped by what the input windows
/// determine about b*log(a).
pub fn pow_p_approx(a: &PAdicApprox, b: &PAdicApprox, digits: usize) -> Result<PAdicApprox> {
    let p = a.p();
    if b.p() != p {
        return Err(Error::MismatchedPrime { left: p.get(), right: b.p().get() });
    }
    if a.is_zero() {
        return Err(domain_error(&PRational::zero(), p, AnalyticDomain::OneUnits));
    }
    if b.is_zero() {
        return PAdicApprox::from_rational(&PRational::one(), p, digits);
    }
    let a_rat = a.to_rational();
    let b_rat = b.to_rational();
    let w_a = a.window_end().expect("nonzero");
    let w_b = b.window_end().expect("nonzero");
    let v_b = match b_rat.valuation(p) {
        Valuation::Finite(v) if v >= 1 => v,
        _ => return Err(domain_error(&b_rat, p, AnalyticDomain::Nilpotents)),
    };
    let t = &a_rat - &PRational::one();
    if t.is_zero() {
        // a = 1 across its window: a^b = 1 mod p^(v_b + w_a).
        let capped = digits.min((v_b + w_a).max(1) as usize);
        return PAdicApprox::from_rational(&PRational::one(), p, capped);
    }
    let v_a = match t.valuation(p) {
        Valuation::Finite(v) if v >= 1 => v,
        _ => return Err(domain_error(&a_rat, p, AnalyticDomain::OneUnits)),
    };
    // b*log(a) is determined mod p^min(v_b + w_a, v_a + w_b).
    let t_window = (v_b + w_a).min(v_a + w_b);
    let capped = digits.min(t_window.max(1) as usize);
    pow_p(&a_rat, &b_rat, p, capped)
}

/// First-order coefficients of (x, y) -> x^y at (a, b):
/// C1 = (b/a) * a^b (the x-derivative) and C2 = log(a) * a^b (the
/// y-derivative). Both land in pZ_p, i.e. |C1|_p, |C2|_p <= 1/p.
pub fn pow_linearization(
    a: &PRational,
    b: &PRational,
    p: OddPrime,
    digits: usize,
) -> Result<(PAdicApprox, PAdicApprox)> {
    if !AnalyticDomain::OneUnits.contains(a, p) {
        return Err(domain_error(a, p, AnalyticDomain::OneUnits));
    }
    if !AnalyticDomain::Nilpotents.contains(b, p) {
        return Err(domain_error(b, p, AnalyticDomain::Nilpotents));
    }
    let x = pow_p(a, b, p, digits)?;
    let c1 = x.scale_by_rational(&(b / a))?;
    let one = PRational::one();
    let c2 = if a == &one {
        PAdicApprox::exact_zero(p)
    } else {
        let (log_a, _) = log_p_with_plan(a, p, digits)?;
        x.scale_by_rational(&log_a.to_rational())?
    };
    for c in [&c1, &c2] {
        if !c.is_zero() {
            let v = c.valuation().finite().expect("nonzero");
            assert!(v >= 1, "linearization coefficient has valuation {v} < 1");
        }
    }
    Ok((c1, c2))
}

/// Modular exponentiation base^e mod m, u64-sized with u128 intermediates.
fn pow_mod(base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut b: u128 = (base % m) as u128;
    let m128 = m as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        e >>= 1;
    }
    acc as u64
}

/// A square root of residue r mod odd prime p (Tonelli-Shanks). Caller
/// guarantees r is a nonzero quadratic residue.
fn sqrt_mod_prime(r: u64, p: u64) -> u64 {
    debug_assert_eq!(pow_mod(r, (p - 1) / 2, p), 1);
    if p % 4 == 3 {
        return pow_mod(r, (p + 1) / 4, p);
    }
    // Write p - 1 = q * 2^s with q odd.
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    // Any quadratic non-residue z.
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(r, q, p);
    let mut result = pow_mod(r, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0u32;
        let mut t2 = t;
        while t2 != 1 {
            t2 = (t2 as u128 * t2 as u128 % p as u128) as u64;
            i += 1;
        }
        let b = pow_mod(c, 1u64 << (m - i - 1), p);
        let b128 = b as u128;
        let p128 = p as u128;
        m = i;
        c = (b128 * b128 % p128) as u64;
        t = (t as u128 * c as u128 % p128) as u64;
        result = (result as u128 * b128 % p128) as u64;
    }
    result
}

/// Square root in Q_p to `digits` significant digits.
///
/// Requires even valuation and a quadratic-residue unit part; of the two
/// roots, returns the one with the smaller leading digit (a convention; the
/// other root is its negation).
pub fn sqrt_p(x: &PRational, p: OddPrime, digits: usize) -> Result<PAdicApprox> {
    if digits == 0 {
        return Err(Error::Invalid("precision must be positive".into()));
    }
    if x.is_zero() {
        return Ok(PAdicApprox::exact_zero(p));
    }
    let v = x.valuation(p).finite().expect("nonzero");
    if v % 2 != 0 {
        return Err(Error::NoRoot(format!(
            "{x} has odd valuation {v}; its p-power part is not a square in Q_{p}"
        )));
    }
    // Unit part, canonical mod p^digits.
    let unit = x * &PRational::from_integer(p.to_bigint()).pow(-v)?;
    let modulus = p.pow(digits as u64);
    let m = canonical_rep(&unit, p, digits as i64)?
        .numer()
        .clone();
    debug_assert!(m.is_positive());
    let pu = p.get();
    let r0 = (&m % pu).to_u64().expect("residue fits");
    if pow_mod(r0, (pu - 1) / 2, pu) != 1 {
        return Err(Error::NoRoot(format!(
            "unit part of {x} is {r0} mod {p}, a quadratic non-residue"
        )));
    }
    // Hensel-lift the mod-p root by Newton doubling: y <- (y + m/y)/2.
    let mut y = BigInt::from(sqrt_mod_prime(r0, pu));
    let mut prec = 1usize;
    while prec < digits {
        prec = (2 * prec).min(digits);
        let step_mod = p.pow(prec as u64);
        let inv_y = mod_inverse(&y, &step_mod);
        let inv_2 = mod_inverse(&BigInt::from(2), &step_mod);
        y = (&y + (&m % &step_mod) * inv_y) * inv_2 % &step_mod;
    }
    debug_assert!(((&y * &y - &m) % &modulus).is_zero());
    // Root convention: pick whichever of y, -y has the smaller digit 0.
    let d0 = (&y % pu).to_u64().expect("digit fits");
    if d0 > pu - d0 {
        y = &modulus - y;
    }
    PAdicApprox::from_parts(p, v / 2, base_p_digits(&y, p, digits))
}
