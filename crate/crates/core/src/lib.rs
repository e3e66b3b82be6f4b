//! Exact p-adic arithmetic, continued-fraction expansions, and the analytic
//! and growth-certificate machinery built on top of them.
//!
//! The crate is organized in layers:
//!
//! - [`rational`] / [`prime`] / [`approx`]: exact rationals with p-adic
//!   valuations, validated odd primes, and finite-precision p-adic numbers
//!   represented by explicit Hensel digit windows.
//! - [`expansion`]: the continued-fraction algorithm whose partial quotients
//!   are the digit heads `Σ_{j≤0} c_j p^j` of each remainder, plus convergent
//!   recurrences and evaluation.
//! - [`lemmas`]: machine verification of the norm identities and real-value
//!   bounds satisfied by convergents.
//! - [`analytic`]: p-adic logarithm, exponential, powers `A^B = exp(B·ln A)`,
//!   and square roots, with explicit series-truncation plans.
//! - [`independence`]: growth certificates for quotient-sequence pairs, the
//!   power-approximation inequality, the ultrametric polynomial perturbation
//!   bound, and the exponent-growth contradiction witness.
//! - [`places`]: the product formula over all absolute values of Q.
//!
//! Every verdict a verifier emits is computed in exact rational or integer
//! arithmetic; floating point appears only in one interval-guarded fast path
//! (and never decides a verdict on its own). Values that cannot be
//! represented exactly are tracked as digit windows that only ever shrink, so
//! a result is either correct to its stated precision or an [`Error`].

pub mod analytic;
pub mod approx;
pub mod error;
pub mod expansion;
pub mod independence;
pub mod lemmas;
pub mod places;
pub mod prime;
pub mod rational;

/// Version tag carried by every JSON document this crate reads or writes.
pub const SCHEMA: &str = "padic-cf/1";

pub use approx::PAdicApprox;
pub use error::{Error, ErrorKind, Result};
pub use expansion::{CFExpansion, Convergent, PartialQuotient};
pub use prime::OddPrime;
pub use rational::{PRational, Valuation};
