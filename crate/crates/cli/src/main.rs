//! Command-line front end for the p-adic continued-fraction toolkit.
//!
//! Every subcommand prints a single JSON document (compact by default,
//! indented with `--pretty`) carrying a top-level `"schema": "padic-cf/1"`
//! marker. Success exits 0; domain/precision errors print a structured error
//! object on stderr and exit 1; usage errors exit 2. Identical argv always
//! produces byte-identical output: randomized modes take an explicit
//! `--seed`, and JSON keys are emitted in sorted order.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use padic_cf::{
    analytic, expansion, independence, lemmas, places, CFExpansion, Error, OddPrime, PAdicApprox,
    PRational, PartialQuotient, SCHEMA,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(
    name = "padic-cf",
    version,
    about = "p-adic continued fractions: expansion, convergent identities, \
             analytic functions, and growth/witness checks",
    propagate_version = true
)]
struct Cli {
    /// Indent the JSON output for reading.
    #[arg(long, global = true)]
    pretty: bool,

    /// Write the JSON document to PATH instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Expand a rational (or a digit-window file) into partial quotients.
    Expand {
        /// Odd prime p.
        #[arg(long)]
        p: u64,
        /// Exact rational input, e.g. 1/2 or -35/4.
        #[arg(long, required_unless_present = "digits_file", conflicts_with = "digits_file", allow_hyphen_values = true)]
        x: Option<PRational>,
        /// JSON file holding a finite-precision digit window instead of --x.
        #[arg(long, value_name = "PATH")]
        digits_file: Option<PathBuf>,
        /// Maximum number of quotients.
        #[arg(long, default_value_t = 16)]
        terms: usize,
    },

    /// Evaluate a quotient list back to the exact rational it encodes.
    Eval {
        #[arg(long)]
        p: u64,
        /// Comma-separated quotients, e.g. 2,7/3,8/3.
        #[arg(long, value_delimiter = ',', required_unless_present = "file", conflicts_with = "file", allow_hyphen_values = true)]
        quotients: Option<Vec<PRational>>,
        /// JSON file holding an expansion (as produced by `expand`).
        #[arg(long, value_name = "PATH")]
        file: Option<PathBuf>,
    },

    /// Print all convergents p_n/q_n of a quotient list with reduced forms.
    Convergents {
        #[arg(long)]
        p: u64,
        #[arg(long, value_delimiter = ',', required_unless_present = "file", conflicts_with = "file", allow_hyphen_values = true)]
        quotients: Option<Vec<PRational>>,
        #[arg(long, value_name = "PATH")]
        file: Option<PathBuf>,
    },

    /// Check the norm/remainder identities and real-value bounds on an
    /// expansion, or on a seeded random corpus with --fuzz.
    VerifyLemmas {
        /// Odd prime p (single-input mode).
        #[arg(long, required_unless_present = "fuzz")]
        p: Option<u64>,
        /// Rational to expand and verify (single-input mode).
        #[arg(long, required_unless_present = "fuzz", allow_hyphen_values = true)]
        x: Option<PRational>,
        /// Expansion length.
        #[arg(long, default_value_t = 12)]
        terms: usize,
        /// Verify this many random rationals over p in {3, 5, 7}.
        #[arg(long, value_name = "CASES")]
        fuzz: Option<usize>,
        /// Seed for the randomized corpus.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },

    /// p-adic logarithm of a one-unit, with the series truncation plan.
    Log {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        x: PRational,
        /// Significant digits (env PADIC_CF_PREC overrides the default).
        #[arg(long, env = "PADIC_CF_PREC", default_value_t = 64)]
        prec: usize,
    },

    /// p-adic exponential of a topological nilpotent, with the plan.
    Exp {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        x: PRational,
        #[arg(long, env = "PADIC_CF_PREC", default_value_t = 64)]
        prec: usize,
    },

    /// A^B = exp(B log A) for a one-unit A and nilpotent B.
    Pow {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        a: PRational,
        #[arg(long, allow_hyphen_values = true)]
        b: PRational,
        #[arg(long, env = "PADIC_CF_PREC", default_value_t = 64)]
        prec: usize,
    },

    /// Square root in Z_p by Hensel lifting; errors when no root exists.
    Sqrt {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        x: PRational,
        #[arg(long, env = "PADIC_CF_PREC", default_value_t = 64)]
        prec: usize,
    },

    /// Emit the worked Q_3 example pair: exponents k_1 = 1, k_n = 3k_{n-1}+4,
    /// quotients a_n = 3^(-k_n-1), b_n = 3^(-k_n).
    Example {
        /// Deepest index n.
        #[arg(long, default_value_t = 6)]
        n: usize,
    },

    /// Growth-hypothesis certificate |a_n| >= |b_n| > |a_{n-1}|^alpha,
    /// on the built-in example pair or on two expansion files.
    Check {
        /// Verify indices 2..=n.
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value = "3", allow_hyphen_values = true)]
        alpha: PRational,
        /// Expansion file for the a-sequence (requires --b).
        #[arg(long, value_name = "PATH", requires = "b")]
        a: Option<PathBuf>,
        /// Expansion file for the b-sequence (requires --a).
        #[arg(long, value_name = "PATH", requires = "a")]
        b: Option<PathBuf>,
    },

    /// Verify the power-approximation inequality
    /// |A^B - A_n^(B_n)| <= C_3 / |q_n q_{n+1}| at one index.
    PowApprox {
        /// Inequality index n.
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, env = "PADIC_CF_PREC", default_value_t = 64)]
        prec: usize,
        #[arg(long, default_value = "3", allow_hyphen_values = true)]
        alpha: PRational,
        /// Expansion file for the a-sequence (default: built-in example,
        /// deepened until it resolves the limits at --prec).
        #[arg(long, value_name = "PATH", requires = "b")]
        a: Option<PathBuf>,
        #[arg(long, value_name = "PATH", requires = "a")]
        b: Option<PathBuf>,
    },

    /// Smallest n with E(n) ln p > c6_log + n d ln(p+1), where
    /// E(n) = 2(1 + alpha + ... + alpha^(n-1)) + alpha^n.
    Witness {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: PRational,
        /// Polynomial degree bound d >= 1.
        #[arg(long)]
        d: u64,
        #[arg(long, default_value_t = 0.0)]
        c6_log: f64,
        /// Give up beyond this index.
        #[arg(long, default_value_t = 10_000)]
        n_cap: u64,
    },

    /// Exact product-formula check over all places of Q, or a seeded
    /// random corpus with --fuzz.
    ProductFormula {
        #[arg(long, required_unless_present = "fuzz", allow_hyphen_values = true)]
        x: Option<PRational>,
        #[arg(long, value_name = "CASES")]
        fuzz: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.cmd) {
        Ok(value) => match emit(value, cli.pretty, cli.out.as_deref()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("{}", error_json(&Error::Invalid(format!("cannot write output: {e}"))));
                ExitCode::FAILURE
            }
        },
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::FAILURE
        }
    }
}

fn error_json(e: &Error) -> Value {
    json!({
        "schema": SCHEMA,
        "error": { "kind": e.kind().as_str(), "message": e.to_string() },
    })
}

fn emit(value: Value, pretty: bool, out: Option<&std::path::Path>) -> std::io::Result<()> {
    let mut text = if pretty {
        serde_json::to_string_pretty(&value)?
    } else {
        serde_json::to_string(&value)?
    };
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

/// Wrap a serializable payload as the final document: its own fields plus the
/// top-level schema marker (and any extra fields supplied by the caller).
fn document<T: serde::Serialize>(
    payload: &T,
    extra: &[(&str, Value)],
) -> padic_cf::Result<Value> {
    let mut map = match serde_json::to_value(payload).map_err(internal)? {
        Value::Object(map) => map,
        other => {
            let mut map = Map::new();
            map.insert("value".into(), other);
            map
        }
    };
    map.insert("schema".into(), Value::String(SCHEMA.into()));
    for (k, v) in extra {
        map.insert((*k).into(), v.clone());
    }
    Ok(Value::Object(map))
}

fn internal(e: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("serialization failed: {e}"))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> padic_cf::Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Invalid(format!("cannot parse {}: {e}", path.display())))
}

fn quotient_list(
    p: OddPrime,
    quotients: &Option<Vec<PRational>>,
    file: &Option<PathBuf>,
) -> padic_cf::Result<Vec<PartialQuotient>> {
    match (quotients, file) {
        (Some(values), None) => values
            .iter()
            .enumerate()
            .map(|(i, v)| PartialQuotient::from_value(p, v, i))
            .collect(),
        (None, Some(path)) => {
            let exp: CFExpansion = read_json(path)?;
            if exp.p != p {
                return Err(Error::MismatchedPrime { left: p.get(), right: exp.p.get() });
            }
            Ok(exp.quotients)
        }
        _ => Err(Error::Invalid("supply exactly one of --quotients / --file".into())),
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> PRational {
    loop {
        let num = rng.random_range(-1_000_000i64..=1_000_000);
        let den = rng.random_range(1i64..=1_000_000);
        let x = PRational::new(BigInt::from(num), BigInt::from(den))
            .expect("denominator is positive");
        if !x.is_zero() {
            return x;
        }
    }
}

/// Recompute p_n q_{n-1} - p_{n-1} q_n = (-1)^(n+1) over a whole expansion.
fn determinant_holds(quotients: &[PartialQuotient]) -> padic_cf::Result<bool> {
    let convergents = expansion::convergents(quotients)?;
    let mut prev_p = PRational::one();
    let mut prev_q = PRational::zero();
    let minus_one = PRational::from_integer(-1);
    let one = PRational::one();
    let mut all = true;
    for c in &convergents {
        let det = &(&c.pn * &prev_q) - &(&prev_p * &c.qn);
        let expected = if c.n % 2 == 0 { &minus_one } else { &one };
        all &= det == *expected;
        prev_p = c.pn.clone();
        prev_q = c.qn.clone();
    }
    Ok(all)
}

fn run(cmd: &Cmd) -> padic_cf::Result<Value> {
    match cmd {
        Cmd::Expand { p, x, digits_file, terms } => {
            let p = OddPrime::new(*p)?;
            let exp = match (x, digits_file) {
                (Some(x), None) => expansion::expand(x, p, *terms)?,
                (None, Some(path)) => {
                    let approx: PAdicApprox = read_json(path)?;
                    if approx.p() != p {
                        return Err(Error::MismatchedPrime {
                            left: p.get(),
                            right: approx.p().get(),
                        });
                    }
                    expansion::expand_approx(&approx, *terms)?
                }
                _ => unreachable!("clap enforces exactly one input"),
            };
            document(&exp, &[])
        }

        Cmd::Eval { p, quotients, file } => {
            let p = OddPrime::new(*p)?;
            let list = quotient_list(p, quotients, file)?;
            let value = expansion::evaluate(&list)?;
            document(
                &json!({ "p": p.get(), "terms": list.len() }),
                &[("value", serde_json::to_value(&value).map_err(internal)?)],
            )
        }

        Cmd::Convergents { p, quotients, file } => {
            let p = OddPrime::new(*p)?;
            let list = quotient_list(p, quotients, file)?;
            let convergents = expansion::convergents(&list)?;
            document(
                &json!({ "p": p.get(), "determinant_holds": determinant_holds(&list)? }),
                &[("convergents", serde_json::to_value(&convergents).map_err(internal)?)],
            )
        }

        Cmd::VerifyLemmas { p, x, terms, fuzz: None, seed: _ } => {
            let p = OddPrime::new(p.expect("required by clap"))?;
            let x = x.clone().expect("required by clap");
            let exp = expansion::expand(&x, p, *terms)?;
            let lemma1 = lemmas::verify_lemma1(&exp, &x)?;
            let lemma2 = lemmas::verify_lemma2(&exp)?;
            document(
                &json!({
                    "mode": "single",
                    "p": p.get(),
                    "x": x.to_string(),
                    "terms": exp.quotients.len(),
                    "terminated": exp.terminated,
                    "lemma1_holds": lemmas::report_holds(&lemma1),
                    "lemma2_holds": lemmas::lemma2_holds(&lemma2),
                    "determinant_holds": determinant_holds(&exp.quotients)?,
                }),
                &[
                    ("lemma1", serde_json::to_value(&lemma1).map_err(internal)?),
                    ("lemma2", serde_json::to_value(&lemma2).map_err(internal)?),
                ],
            )
        }

        Cmd::VerifyLemmas { fuzz: Some(cases), seed, terms, .. } => {
            let primes: Vec<OddPrime> =
                [3u64, 5, 7].iter().map(|&q| OddPrime::new(q)).collect::<Result<_, _>>()?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut lemma1_all = true;
            let mut lemma2_all = true;
            let mut det_all = true;
            let mut failures = Vec::new();
            for i in 0..*cases {
                let p = primes[i % primes.len()];
                let x = random_rational(&mut rng);
                let exp = expansion::expand(&x, p, *terms)?;
                let l1 = lemmas::report_holds(&lemmas::verify_lemma1(&exp, &x)?);
                let l2 = lemmas::lemma2_holds(&lemmas::verify_lemma2(&exp)?);
                let det = determinant_holds(&exp.quotients)?;
                lemma1_all &= l1;
                lemma2_all &= l2;
                det_all &= det;
                if !(l1 && l2 && det) {
                    failures.push(json!({ "p": p.get(), "x": x.to_string() }));
                }
            }
            document(
                &json!({
                    "mode": "fuzz",
                    "cases": cases,
                    "terms": terms,
                    "seed": seed,
                    "primes": [3, 5, 7],
                    "lemma1_holds": lemma1_all,
                    "lemma2_holds": lemma2_all,
                    "determinant_holds": det_all,
                    "failures": failures,
                }),
                &[],
            )
        }

        Cmd::Log { p, x, prec } => {
            let p = OddPrime::new(*p)?;
            let (value, plan) = analytic::log_p_with_plan(x, p, *prec)?;
            document(
                &json!({ "op": "log", "p": p.get(), "x": x.to_string(), "prec": prec }),
                &[
                    ("value", serde_json::to_value(&value).map_err(internal)?),
                    ("plan", serde_json::to_value(&plan).map_err(internal)?),
                ],
            )
        }

        Cmd::Exp { p, x, prec } => {
            let p = OddPrime::new(*p)?;
            let (value, plan) = analytic::exp_p_with_plan(x, p, *prec)?;
            document(
                &json!({ "op": "exp", "p": p.get(), "x": x.to_string(), "prec": prec }),
                &[
                    ("value", serde_json::to_value(&value).map_err(internal)?),
                    ("plan", serde_json::to_value(&plan).map_err(internal)?),
                ],
            )
        }

        Cmd::Pow { p, a, b, prec } => {
            let p = OddPrime::new(*p)?;
            let value = analytic::pow_p(a, b, p, *prec)?;
            document(
                &json!({
                    "op": "pow",
                    "p": p.get(),
                    "a": a.to_string(),
                    "b": b.to_string(),
                    "prec": prec,
                }),
                &[("value", serde_json::to_value(&value).map_err(internal)?)],
            )
        }

        Cmd::Sqrt { p, x, prec } => {
            let p = OddPrime::new(*p)?;
            let value = analytic::sqrt_p(x, p, *prec)?;
            document(
                &json!({ "op": "sqrt", "p": p.get(), "x": x.to_string(), "prec": prec }),
                &[("value", serde_json::to_value(&value).map_err(internal)?)],
            )
        }

        Cmd::Example { n } => {
            let pair = independence::gen_example(*n)?;
            let k: Vec<String> =
                pair.b_seq[1..].iter().map(|q| q.exponent().to_string()).collect();
            document(
                &json!({
                    "p": pair.p.get(),
                    "alpha": pair.alpha.to_string(),
                    "n": n,
                    "k": k,
                    "a": quotient_summaries(&pair.a_seq),
                    "b": quotient_summaries(&pair.b_seq),
                }),
                &[],
            )
        }

        Cmd::Check { n, alpha, a, b } => {
            let pair = load_pair(a, b, alpha, *n)?;
            let certificate = independence::check_hypotheses(&pair, *n)?;
            document(&certificate, &[])
        }

        Cmd::PowApprox { n, prec, alpha, a, b } => {
            let (pair, depth) = match (a, b) {
                (Some(a_path), Some(b_path)) => {
                    let pair = load_file_pair(a_path, b_path, alpha)?;
                    let depth = pair.a_seq.len().min(pair.b_seq.len()) - 1;
                    (pair, depth)
                }
                _ => {
                    let depth = example_depth_for(*n, *prec);
                    (independence::gen_example(depth)?, depth)
                }
            };
            let report = independence::verify_pow_approximation(&pair, *n, *prec)?;
            document(&report, &[("depth", json!(depth))])
        }

        Cmd::Witness { p, alpha, d, c6_log, n_cap } => {
            let p = OddPrime::new(*p)?;
            let witness = independence::contradiction_witness(p, alpha, *d, *c6_log, *n_cap)?;
            document(&witness, &[])
        }

        Cmd::ProductFormula { x: Some(x), fuzz: None, .. } => {
            let report = places::product_formula_check(x)?;
            document(&report, &[])
        }

        Cmd::ProductFormula { fuzz: Some(cases), seed, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut all = true;
            let mut failures = Vec::new();
            for _ in 0..*cases {
                let x = random_rational(&mut rng);
                let report = places::product_formula_check(&x)?;
                all &= report.holds;
                if !report.holds {
                    failures.push(x.to_string());
                }
            }
            document(
                &json!({
                    "mode": "fuzz",
                    "cases": cases,
                    "seed": seed,
                    "holds": all,
                    "failures": failures,
                }),
                &[],
            )
        }

        Cmd::ProductFormula { .. } => {
            Err(Error::Invalid("supply exactly one of --x / --fuzz".into()))
        }
    }
}

/// Per-quotient view for `example`: the norm exponent always (|x|_p = p^e;
/// null for the zero quotient), the exact value only while it stays small.
fn quotient_summaries(seq: &[PartialQuotient]) -> Value {
    const PRINTABLE_EXPONENT: i64 = 512;
    let rows: Vec<Value> = seq
        .iter()
        .map(|q| {
            let exponent = if q.is_zero() {
                Value::Null
            } else {
                Value::String(q.exponent().to_string())
            };
            let value = if q.exponent() <= &BigInt::from(PRINTABLE_EXPONENT) {
                q.value().map(|v| json!(v)).unwrap_or(Value::Null)
            } else {
                Value::Null
            };
            json!({ "norm_exponent": exponent, "value": value })
        })
        .collect();
    Value::Array(rows)
}

fn load_pair(
    a: &Option<PathBuf>,
    b: &Option<PathBuf>,
    alpha: &PRational,
    n: usize,
) -> padic_cf::Result<independence::QuotientPair> {
    match (a, b) {
        (Some(a_path), Some(b_path)) => load_file_pair(a_path, b_path, alpha),
        _ => {
            let pair = independence::gen_example(n.max(1))?;
            independence::QuotientPair::new(pair.p, pair.a_seq, pair.b_seq, alpha.clone())
        }
    }
}

fn load_file_pair(
    a_path: &std::path::Path,
    b_path: &std::path::Path,
    alpha: &PRational,
) -> padic_cf::Result<independence::QuotientPair> {
    let a: CFExpansion = read_json(a_path)?;
    let b: CFExpansion = read_json(b_path)?;
    if a.p != b.p {
        return Err(Error::MismatchedPrime { left: a.p.get(), right: b.p.get() });
    }
    independence::QuotientPair::new(a.p, a.quotients, b.quotients, alpha.clone())
}

/// Depth of the built-in example pair that resolves both limits past `prec`
/// digits: the b-sequence pins its limit mod p^(2 sum k_i + 1), and the
/// a-sequence strictly beyond that. Growth is ~3^depth, so this stays tiny.
fn example_depth_for(n: usize, prec: usize) -> usize {
    let mut depth = (n + 2).max(3);
    loop {
        let mut resolution = BigInt::from(1);
        let mut k = BigInt::from(1);
        for _ in 1..=depth {
            resolution += 2 * &k;
            k = 3 * k + 4;
        }
        if resolution >= BigInt::from(prec as u64) || depth >= 64 {
            return depth;
        }
        depth += 1;
    }
}
