//! Exact arithmetic for truncated q-series and a verified catalog of
//! minimal-model character identities.
//!
//! Everything here works with formal power series in t = q^(1/D), where the
//! substrate D is a positive integer (the catalog uses D in {1, 2, 4}).
//! Coefficients are arbitrary-precision signed integers and all comparisons
//! are exact: there is no floating point and no tolerance anywhere.
//!
//! Module map:
//!
//! * [`series`]      — the truncated Laurent-series ring (`QSeries`).
//! * [`qfunctions`]  — q-Pochhammer symbols, Gaussian polynomials, a naive
//!   partition-counting oracle, and the two q-binomial summation lemmas.
//! * [`prodexpr`]    — parser/renderer/evaluator for textual products of
//!   q-Pochhammer symbols such as `(q^3,q^4;q^7)_inf / (q;q)_inf`.
//! * [`characters`]  — Virasoro minimal-model characters: conformal
//!   dimensions, central charges, the bosonic sum, pure product forms, and
//!   the quintuple/triple-product character combinations.
//! * [`fermionic`]   — declarative fermionic multisum forms and a pruned
//!   exact evaluator with a self-checking enumeration certificate.
//! * [`verify`]      — the identity catalog and the verification engine
//!   comparing both sides of every identity coefficient by coefficient.

pub mod characters;
pub mod fermionic;
pub mod prodexpr;
pub mod qfunctions;
pub mod series;
pub mod verify;

/// Exact rational numbers for exponents, conformal dimensions and central
/// charges.  Magnitudes stay tiny (numerators bounded by a few thousand),
/// so a 64-bit ratio is ample.
pub type Rat = num_rational::Rational64;

/// Unified error type for the whole library.
///
/// Domain-style errors (bad parameters, malformed expressions) are kept
/// distinct from internal evaluation failures so the command line can map
/// them to different exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Two series on different substrates were combined.
    #[error("substrate mismatch: D = {0} vs D = {1}")]
    SubstrateMismatch(u32, u32),
    /// A requested truncation order cannot represent the value.
    #[error("order {order} is too small: {what}")]
    OrderTooSmall { order: i64, what: String },
    /// Series inversion needs a unit (±1) lowest tracked coefficient.
    #[error("cannot invert: lowest tracked coefficient at t^{0} is {1}, not ±1")]
    NonUnitLeadingCoeff(i64, String),
    /// A coefficient beyond the tracked order was requested.
    #[error("coefficient of t^{exp} is unknown: series is only tracked through t^{order}")]
    UnknownCoefficient { exp: i64, order: i64 },
    /// An exponent is not a multiple of 1/D for the active substrate.
    #[error("exponent {0} does not live on the q^(1/{1}) substrate")]
    ExponentOffSubstrate(String, u32),
    /// An infinite Pochhammer product with argument exactly 1 vanishes.
    #[error("vanishing infinite product: argument q^0 with sign +1")]
    VanishingProduct,
    /// Text did not conform to the product-expression grammar.
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    /// Parameters outside an identity's stated domain, unknown ids, etc.
    #[error("domain error: {0}")]
    Domain(String),
    /// The doubled-bound enumeration certificate found a mismatch.
    #[error("pruning certificate failure: {0}")]
    PruningCertificate(String),
    /// Internal evaluation failure that is not a usage problem.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
