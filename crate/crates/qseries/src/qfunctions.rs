//! Standard q-objects: Pochhammer symbols, Gaussian polynomials, a naive
//! partition oracle, and the two q-binomial summation lemmas.
//!
//! Conventions:
//!
//!   (a;z)_n   = prod_{i=0}^{n-1} (1 - a z^i),   (q)_n = (q;q)_n,
//!   (a;z)_inf = prod_{i=0}^{inf} (1 - a z^i),
//!
//! where the argument a is a signed q-monomial ±q^e.  The Gaussian
//! polynomial [P N] is defined by the Pascal-type recurrence
//!
//!   [P N] = [P-1 N-1] + q^N [P-1 N],    [P 0] = 1,
//!
//! and is 0 outside 0 <= N <= P.  Its degree is N(P-N).
//!
//! The partition oracle counts partitions by direct recursive enumeration —
//! deliberately without generating functions or memoisation — so it is an
//! independent witness for 1/(q)_inf.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::series::QSeries;
use crate::{Error, Rat, Result};

// ---------------------------------------------------------------------------
// Signed q-monomials
// ---------------------------------------------------------------------------

/// A signed monomial ±q^e used as a Pochhammer argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QMonomial {
    /// +1 or −1.
    pub sign: i64,
    /// Exponent of q, an exact nonnegative rational on the active substrate.
    pub exp: Rat,
}

impl QMonomial {
    /// +q^(num/den)
    pub fn plus(num: i64, den: i64) -> QMonomial {
        QMonomial { sign: 1, exp: Rat::new(num, den) }
    }

    /// −q^(num/den)
    pub fn minus(num: i64, den: i64) -> QMonomial {
        QMonomial { sign: -1, exp: Rat::new(num, den) }
    }

    /// The plain variable q.
    pub fn q() -> QMonomial {
        QMonomial::plus(1, 1)
    }
}

/// Converts a rational q-exponent to integer t-units on substrate D.
///
/// Errors when the exponent does not live on the substrate.
pub(crate) fn exp_to_t(exp: Rat, denom: u32) -> Result<i64> {
    let scaled = exp * Rat::from_integer(denom as i64);
    if !scaled.is_integer() {
        return Err(Error::ExponentOffSubstrate(exp.to_string(), denom));
    }
    Ok(scaled.to_integer())
}

// ---------------------------------------------------------------------------
// Pochhammer symbols
// ---------------------------------------------------------------------------

/// Finite Pochhammer symbol (a;z)_n = prod_{i=0}^{n-1} (1 − a·q^(i·z_exp)),
/// truncated to t^order on substrate D.
///
/// n = 0 gives the empty product 1.  Factors whose exponent exceeds the
/// truncation contribute only above it and are skipped.
pub fn poch_finite(a: QMonomial, z_exp: Rat, n: u32, denom: u32, order: i64) -> Result<QSeries> {
    poch_finite_signed(a, QMonomial { sign: 1, exp: z_exp }, n, denom, order)
}

/// Finite Pochhammer symbol whose base is itself a signed monomial,
/// (a; ±q^(z.exp))_n: factor i carries the sign a.sign·z.sign^i.
pub fn poch_finite_signed(a: QMonomial, z: QMonomial, n: u32, denom: u32, order: i64) -> Result<QSeries> {
    let a_t = exp_to_t(a.exp, denom)?;
    let z_t = exp_to_t(z.exp, denom)?;
    if a_t < 0 {
        return Err(Error::Domain(format!(
            "Pochhammer argument exponent {} must be nonnegative",
            a.exp
        )));
    }
    if order < 0 {
        return Err(Error::OrderTooSmall { order, what: "Pochhammer product needs order >= 0".into() });
    }
    let mut s = QSeries::one(denom, order);
    let mut sign = a.sign;
    for i in 0..n as i64 {
        let e = a_t + i * z_t;
        if e > order {
            break;
        }
        s.mul_one_minus_monomial(sign, e);
        sign *= z.sign;
    }
    Ok(s)
}

/// Infinite Pochhammer symbol (a;z)_inf truncated to t^order.
///
/// Requires a positive argument exponent (or exponent 0 with sign −1, where
/// the first factor is the constant 2); the factor with exponent 0 and sign
/// +1 would make the whole product vanish, which is reported as an error.
/// Factors with exponent above the truncation are skipped — the only
/// truncation rule in play.
pub fn poch_inf(a: QMonomial, z_exp: Rat, denom: u32, order: i64) -> Result<QSeries> {
    poch_inf_signed(a, QMonomial { sign: 1, exp: z_exp }, denom, order)
}

/// Infinite Pochhammer symbol with a signed base monomial,
/// (a; ±q^(z.exp))_inf; factor i carries the sign a.sign·z.sign^i.
pub fn poch_inf_signed(a: QMonomial, z: QMonomial, denom: u32, order: i64) -> Result<QSeries> {
    let a_t = exp_to_t(a.exp, denom)?;
    let z_t = exp_to_t(z.exp, denom)?;
    if z_t <= 0 {
        return Err(Error::Domain(format!("Pochhammer base exponent {} must be positive", z.exp)));
    }
    if a_t == 0 && a.sign > 0 {
        return Err(Error::VanishingProduct);
    }
    if a_t < 0 {
        return Err(Error::Domain(format!(
            "infinite Pochhammer argument exponent {} must be nonnegative",
            a.exp
        )));
    }
    if order < 0 {
        return Err(Error::OrderTooSmall { order, what: "Pochhammer product needs order >= 0".into() });
    }
    let mut s = QSeries::one(denom, order);
    let mut e = a_t;
    let mut sign = a.sign;
    while e <= order {
        s.mul_one_minus_monomial(sign, e);
        e += z_t;
        sign *= z.sign;
    }
    Ok(s)
}

/// Euler factor (q;q)_inf on an integer substrate, a convenience wrapper.
pub fn euler_inf(denom: u32, order: i64) -> Result<QSeries> {
    poch_inf(QMonomial::q(), Rat::one(), denom, order)
}

// ---------------------------------------------------------------------------
// Gaussian polynomials
// ---------------------------------------------------------------------------

/// The Gaussian polynomial [P N] on D = 1, computed exactly by the
/// Pascal-type recurrence (never by series division).
///
/// Out-of-range indices give the zero polynomial — the definition's
/// "0 otherwise" branch — so callers can sum blindly over a lattice.
pub fn gaussian(p: i64, n: i64) -> QSeries {
    if n < 0 || p < 0 || n > p {
        return QSeries::zero(1, 0);
    }
    // rows[k] is the coefficient vector of [p' k] for the current p'.
    let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
    for p_cur in 1..=p {
        let mut next: Vec<Vec<BigInt>> = Vec::with_capacity(p_cur as usize + 1);
        for k in 0..=p_cur {
            let deg = (k * (p_cur - k)) as usize;
            let mut poly = vec![BigInt::zero(); deg + 1];
            if k > 0 {
                for (i, c) in rows[k as usize - 1].iter().enumerate() {
                    poly[i] += c;
                }
            }
            if k < p_cur {
                // q^k · [p'-1 k]
                for (i, c) in rows[k as usize].iter().enumerate() {
                    poly[i + k as usize] += c;
                }
            }
            next.push(poly);
        }
        rows = next;
    }
    let coeffs = rows.swap_remove(n as usize);
    let order = (coeffs.len() - 1) as i64;
    QSeries::new(1, 0, order, coeffs)
}

// ---------------------------------------------------------------------------
// Partition oracle
// ---------------------------------------------------------------------------

/// Number of integer partitions of n, by naive recursive enumeration.
///
/// Deliberately free of generating functions and memoisation so it is an
/// independent oracle for the series engine; intended for n <= 60.
pub fn partition_count(n: u64) -> u64 {
    fn count(n: u64, max_part: u64) -> u64 {
        if n == 0 {
            return 1;
        }
        let mut total = 0;
        for k in (1..=n.min(max_part)).rev() {
            total += count(n - k, k);
        }
        total
    }
    count(n, n)
}

// ---------------------------------------------------------------------------
// q-binomial summation lemmas
// ---------------------------------------------------------------------------

/// Which q-binomial summation to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QBinomialVariant {
    /// sum_k q^(k²/2) [P k]  =  (−q^(1/2); q)_P
    Plain,
    /// sum_k q^(k²/2 − Pk) [P k]  =  q^(−P²/2) (−q^(1/2); q)_P
    Shifted,
}

/// Evaluates both sides of the chosen q-binomial summation on D = 2.
///
/// Both sides are exact polynomials (Laurent polynomials for the shifted
/// variant); `order` is in t-units and must cover the top t-degree P².
pub fn qbinomial_sum(p: u32, variant: QBinomialVariant, order: i64) -> Result<(QSeries, QSeries)> {
    let p = p as i64;
    if order < p * p {
        return Err(Error::OrderTooSmall {
            order,
            what: format!("q-binomial sides for P = {p} have t-degree {}", p * p),
        });
    }
    // Left side: sum over the Gaussian support.
    let mut lhs = QSeries::zero(2, order);
    for k in 0..=p {
        // q^(k²/2) is t^(k²); the shifted variant subtracts Pk in q-units,
        // i.e. 2Pk in t-units.
        let shift = match variant {
            QBinomialVariant::Plain => k * k,
            QBinomialVariant::Shifted => k * k - 2 * p * k,
        };
        let g = gaussian(p, k); // D = 1 polynomial in q
        let term = g.refine_denom(2).extend_known_zero(order - shift).mul_monomial(1, shift);
        lhs = lhs.add(&term)?;
    }
    // Right side: (−q^(1/2); q)_P, Laurent-shifted for the second variant.
    let rhs = poch_finite(QMonomial::minus(1, 2), Rat::one(), p as u32, 2, order)?;
    let rhs = match variant {
        QBinomialVariant::Plain => rhs,
        QBinomialVariant::Shifted => rhs.extend_known_zero(order + p * p).mul_monomial(1, -p * p),
    };
    Ok((lhs, rhs))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn coeffs_q(s: &QSeries, through: i64) -> Vec<i64> {
        (0..=through)
            .map(|n| {
                let c = s.coeff_q(n).unwrap();
                i64::try_from(&c).expect("fits i64")
            })
            .collect()
    }

    #[test]
    fn poch_finite_empty_product_is_one() {
        let s = poch_finite(QMonomial::q(), Rat::one(), 0, 1, 10).unwrap();
        assert_eq!(s, QSeries::one(1, 10));
    }

    #[test]
    fn poch_finite_q_q_2() {
        let s = poch_finite(QMonomial::q(), Rat::one(), 2, 1, 10).unwrap();
        assert_eq!(coeffs_q(&s, 4), vec![1, -1, -1, 1, 0]);
    }

    #[test]
    fn poch_finite_half_shift_on_d2() {
        // (q^(1/2); q)_2 = 1 - q^(1/2) - q^(3/2) + q^2 on D = 2.
        let s = poch_finite(QMonomial::plus(1, 2), Rat::one(), 2, 2, 10).unwrap();
        assert_eq!(s.coeff_at(0).unwrap(), BigInt::one());
        assert_eq!(s.coeff_at(1).unwrap(), BigInt::from(-1));
        assert_eq!(s.coeff_at(2).unwrap(), BigInt::zero());
        assert_eq!(s.coeff_at(3).unwrap(), BigInt::from(-1));
        assert_eq!(s.coeff_at(4).unwrap(), BigInt::one());
    }

    #[test]
    fn poch_finite_rejects_off_substrate_exponent() {
        assert!(poch_finite(QMonomial::plus(1, 2), Rat::one(), 2, 1, 10).is_err());
    }

    #[test]
    fn poch_inf_euler_pentagonal_start() {
        let s = euler_inf(1, 7).unwrap();
        assert_eq!(coeffs_q(&s, 7), vec![1, -1, -1, 0, 0, 1, 0, 1]);
    }

    #[test]
    fn poch_inf_inverse_counts_partitions() {
        let s = euler_inf(1, 24).unwrap().invert().unwrap();
        for n in 0..=20u64 {
            assert_eq!(
                s.coeff_q(n as i64).unwrap(),
                BigInt::from(partition_count(n)),
                "p({n})"
            );
        }
    }

    #[test]
    fn poch_inf_vanishing_argument_is_an_error() {
        assert!(matches!(
            poch_inf(QMonomial::plus(0, 1), Rat::one(), 1, 10),
            Err(Error::VanishingProduct)
        ));
        // Sign −1 at exponent 0 is fine: first factor is the constant 2.
        let s = poch_inf(QMonomial::minus(0, 1), Rat::one(), 1, 10).unwrap();
        assert_eq!(s.coeff_at(0).unwrap(), BigInt::from(2));
    }

    #[test]
    fn gaussian_edge_rows() {
        assert_eq!(gaussian(0, 0), QSeries::one(1, 0));
        for p in 0..6 {
            assert_eq!(gaussian(p, 0).coeff_at(0).unwrap(), BigInt::one());
        }
        // Out of range: the zero polynomial.
        let z = gaussian(2, 3);
        assert!(z.coeff_at(0).unwrap().is_zero());
    }

    #[test]
    fn gaussian_4_2_explicit() {
        let g = gaussian(4, 2);
        assert_eq!(coeffs_q(&g, 4), vec![1, 1, 2, 1, 1]);
        assert_eq!(g.order(), 4);
    }

    #[test]
    fn gaussian_symmetry_and_division_cross_check() {
        for p in 0..=12i64 {
            for n in 0..=p {
                let a = gaussian(p, n);
                let b = gaussian(p, p - n);
                assert_eq!(a, b, "[{p} {n}] vs its mirror");
                // Independent route: (q)_P / ((q)_N (q)_{P-N}) by division.
                let order = p * p; // comfortably above the degree n(p-n)
                let top = poch_finite(QMonomial::q(), Rat::one(), p as u32, 1, order).unwrap();
                let d1 = poch_finite(QMonomial::q(), Rat::one(), n as u32, 1, order).unwrap();
                let d2 = poch_finite(QMonomial::q(), Rat::one(), (p - n) as u32, 1, order).unwrap();
                let by_div = top.mul(&d1.invert().unwrap()).unwrap();
                let by_div = by_div.mul(&d2.invert().unwrap()).unwrap();
                for e in 0..=(n * (p - n)) {
                    assert_eq!(
                        a.coeff_at(e).unwrap(),
                        by_div.coeff_at(e).unwrap(),
                        "[{p} {n}] coefficient at q^{e}"
                    );
                }
            }
        }
    }

    #[test]
    fn partition_counts_first_values() {
        let expect = [1u64, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42];
        for (n, &e) in expect.iter().enumerate() {
            assert_eq!(partition_count(n as u64), e, "p({n})");
        }
    }

    #[test]
    fn qbinomial_p0_trivial() {
        for variant in [QBinomialVariant::Plain, QBinomialVariant::Shifted] {
            let (lhs, rhs) = qbinomial_sum(0, variant, 4).unwrap();
            assert_eq!(lhs.coeff_at(0).unwrap(), BigInt::one());
            assert_eq!(rhs.coeff_at(0).unwrap(), BigInt::one());
        }
    }

    #[test]
    fn qbinomial_p1_plain_two_terms() {
        let (lhs, rhs) = qbinomial_sum(1, QBinomialVariant::Plain, 4).unwrap();
        // 1 + q^(1/2) on both sides.
        for s in [&lhs, &rhs] {
            assert_eq!(s.coeff_at(0).unwrap(), BigInt::one());
            assert_eq!(s.coeff_at(1).unwrap(), BigInt::one());
            assert_eq!(s.coeff_at(2).unwrap(), BigInt::zero());
        }
    }

    #[test]
    fn qbinomial_sides_agree_small() {
        for p in 0..=10u32 {
            for variant in [QBinomialVariant::Plain, QBinomialVariant::Shifted] {
                let order = (p * p) as i64 + 2;
                let (lhs, rhs) = qbinomial_sum(p, variant, order).unwrap();
                let lo = lhs.offset().min(rhs.offset());
                for e in lo..=order.min(lhs.order()).min(rhs.order()) {
                    assert_eq!(
                        lhs.coeff_at(e).unwrap(),
                        rhs.coeff_at(e).unwrap(),
                        "P = {p}, {variant:?}, t^{e}"
                    );
                }
            }
        }
    }

    #[test]
    fn infinite_product_matches_finite_prefix() {
        // (−q^(1/2); q)_inf agrees with (−q^(1/2); q)_12 through t^24:
        // later factors only touch higher exponents.
        let inf = poch_inf(QMonomial::minus(1, 2), Rat::one(), 2, 24).unwrap();
        let fin = poch_finite(QMonomial::minus(1, 2), Rat::one(), 12, 2, 24).unwrap();
        assert_eq!(inf, fin);
    }
}
