use crate::error::{Error, Result};
use crate::expansion::{convergents, head, CFExpansion};
use crate::rational::PRational;
use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::Serialize;

/// One verified identity instance. `holds = None` means the identity does not
/// apply at this index (e.g. it needs data past the end of a terminated
/// expansion); `lhs`/`rhs` are exact rational strings, `"-"` when not
/// applicable.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub n: usize,
    pub identity: &'static str,
    pub holds: Option<bool>,
    pub lhs: String,
    pub rhs: String,
}

impl IdentityCheck {
    fn not_applicable(n: usize, identity: &'static str) -> Self {
        IdentityCheck { n, identity, holds: None, lhs: "-".into(), rhs: "-".into() }
    }

    fn compare(n: usize, identity: &'static str, lhs: &PRational, rhs: &PRational) -> Self {
        IdentityCheck {
            n,
            identity,
            holds: Some(lhs == rhs),
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
        }
    }
}

/// True when no row in a report is a confirmed failure.
pub fn report_holds(rows: &[IdentityCheck]) -> bool {
    rows.iter().all(|r| r.holds != Some(false))
}

/// Recompute the remainder sequence xi_0 = x, xi_{k+1} = 1/(xi_k - a_k) and
/// confirm the expansion's quotients are the heads of these remainders.
/// Returns the remainders, plus xi_{len} when the expansion did not
/// terminate (it exists exactly then).
fn remainders(
    expansion: &CFExpansion,
    x: &PRational,
) -> Result<(Vec<PRational>, Option<PRational>)> {
    let p = expansion.p;
    let mut xi = Vec::with_capacity(expansion.quotients.len());
    let mut cur = x.clone();
    for (k, a) in expansion.quotients.iter().enumerate() {
        if &head(&cur, p, k)? != a {
            return Err(Error::Invalid(format!(
                "expansion does not belong to {x}: quotient mismatch at index {k}"
            )));
        }
        xi.push(cur.clone());
        let av = a.value()?;
        let last = k + 1 == expansion.quotients.len();
        if cur == av {
            if !(last && expansion.terminated) {
                return Err(Error::Invalid(format!(
                    "expansion does not belong to {x}: remainder {k} equals its head"
                )));
            }
            return Ok((xi, None));
        }
        cur = (&cur - &av).recip()?;
    }
    if expansion.terminated {
        return Err(Error::Invalid(format!(
            "expansion does not belong to {x}: it does not terminate at the last quotient"
        )));
    }
    Ok((xi, Some(cur)))
}

/// Verify the four norm identities of convergents against exact remainders.
///
/// For each index n of the expansion, in order:
/// - `"i"`:   |p_n|_p = |a_0 a_1 ... a_n|_p when a_0 != 0. When a_0 = 0 the
///   identity becomes |p_1|_p = 1 and |p_n|_p = |a_2 ... a_n|_p for n >= 2,
///   with n = 0 not applicable (p_0 = 0).
/// - `"ii"`:  |q_n|_p = |a_1 ... a_n|_p.
/// - `"iii"`: x - p_n/q_n = (-1)^n / (q_n (xi_{n+1} q_n + q_{n-1})), exact
///   rational equality; not applicable where xi_{n+1} does not exist.
/// - `"iv"`:  |x - p_n/q_n|_p = 1 / |q_n q_{n+1}|_p; not applicable at the
///   last index (no q_{n+1} inside the expansion).
pub fn verify_lemma1(expansion: &CFExpansion, x: &PRational) -> Result<Vec<IdentityCheck>> {
    let p = expansion.p;
    let (xi, xi_last) = remainders(expansion, x)?;
    let cs = convergents(&expansion.quotients)?;
    let len = cs.len();
    let a0_zero = expansion.quotients[0].is_zero();

    // xi_{n+1} for each applicable n; index n maps to xi[n + 1] or the extra
    // remainder one past the end.
    let xi_next = |n: usize| -> Option<&PRational> {
        if n + 1 < len {
            Some(&xi[n + 1])
        } else {
            xi_last.as_ref()
        }
    };

    let mut rows = Vec::with_capacity(4 * len);
    let mut norm_a_all = PRational::one(); // |a_0 ... a_n|_p
    let mut norm_a_tail = PRational::one(); // |a_1 ... a_n|_p
    let mut norm_a_tail2 = PRational::one(); // |a_2 ... a_n|_p
    for (n, c) in cs.iter().enumerate() {
        let av = expansion.quotients[n].value()?;
        let norm_a = av.padic_norm(p);
        norm_a_all = &norm_a_all * &norm_a;
        if n >= 1 {
            norm_a_tail = &norm_a_tail * &norm_a;
        }
        if n >= 2 {
            norm_a_tail2 = &norm_a_tail2 * &norm_a;
        }

        rows.push(if a0_zero {
            match n {
                0 => IdentityCheck::not_applicable(0, "i"),
                1 => IdentityCheck::compare(1, "i", &c.pn.padic_norm(p), &PRational::one()),
                _ => IdentityCheck::compare(n, "i", &c.pn.padic_norm(p), &norm_a_tail2),
            }
        } else {
            IdentityCheck::compare(n, "i", &c.pn.padic_norm(p), &norm_a_all)
        });

        rows.push(IdentityCheck::compare(n, "ii", &c.qn.padic_norm(p), &norm_a_tail));

        let q_prev = if n == 0 { PRational::zero() } else { cs[n - 1].qn.clone() };
        rows.push(match xi_next(n) {
            Some(next) => {
                let lhs = x - &(&c.pn / &c.qn);
                let sign = if n % 2 == 0 { PRational::one() } else { -PRational::one() };
                let rhs = &sign / &(&c.qn * &(next * &c.qn + &q_prev));
                IdentityCheck::compare(n, "iii", &lhs, &rhs)
            }
            None => IdentityCheck::not_applicable(n, "iii"),
        });

        rows.push(if n + 1 < len {
            let lhs = (x - &(&c.pn / &c.qn)).padic_norm(p);
            let rhs = (&c.qn * &cs[n + 1].qn).padic_norm(p).recip()?;
            IdentityCheck::compare(n, "iv", &lhs, &rhs)
        } else {
            IdentityCheck::not_applicable(n, "iv")
        });
    }
    Ok(rows)
}

/// Real-value bounds on convergents, one row per index.
#[derive(Debug, Clone, Serialize)]
pub struct Lemma2Row {
    pub n: usize,
    /// 0 < p_n <= (p+1)^(n+1) in the real ordering. Index 0 allows p_0 = 0,
    /// since the leading quotient may be zero.
    pub p_bound_holds: bool,
    /// 0 < q_n <= (p+1)^n in the real ordering.
    pub q_bound_holds: bool,
    /// Reduced integer numerator P_n of p_n/q_n, for diagnostics.
    pub reduced_num: String,
    /// Whether |P_n| <= (p+1)^n. Recorded but NOT part of any asserted bound:
    /// reduction of a Z[1/p] fraction can rescale by powers of p, so this can
    /// legitimately be false.
    pub reduced_in_bound: bool,
}

/// Check 0 < p_n <= (p+1)^(n+1) and 0 < q_n <= (p+1)^n for every convergent,
/// and record how the reduced numerators P_n compare to (p+1)^n.
pub fn verify_lemma2(expansion: &CFExpansion) -> Result<Vec<Lemma2Row>> {
    let cs = convergents(&expansion.quotients)?;
    let base = BigInt::from(expansion.p.get() + 1);
    let mut rows = Vec::with_capacity(cs.len());
    // (p+1)^n and (p+1)^(n+1), maintained incrementally.
    let mut bound_n = BigInt::one();
    for c in &cs {
        let bound_n1 = &bound_n * &base;
        let p_positive =
            if c.n == 0 { c.pn.is_positive() || c.pn.is_zero() } else { c.pn.is_positive() };
        let p_bound_holds = p_positive && c.pn <= PRational::from_integer(bound_n1.clone());
        let q_bound_holds =
            c.qn.is_positive() && c.qn <= PRational::from_integer(bound_n.clone());
        let reduced_in_bound = c.reduced_num.abs() <= bound_n;
        rows.push(Lemma2Row {
            n: c.n,
            p_bound_holds,
            q_bound_holds,
            reduced_num: c.reduced_num.to_string(),
            reduced_in_bound,
        });
        bound_n = bound_n1;
    }
    Ok(rows)
}

/// True when every asserted bound in a report holds.
pub fn lemma2_holds(rows: &[Lemma2Row]) -> bool {
    rows.iter().all(|r| r.p_bound_holds && r.q_bound_holds)
}
