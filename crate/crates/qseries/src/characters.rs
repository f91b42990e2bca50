//! Virasoro minimal-model characters and their product forms.
//!
//! The minimal model M(p,p')_2 is labelled by coprime integers 1 < p < p',
//! its modules by 1 <= r < p, 1 <= s < p'.  The normalised character has
//! the bosonic (alternating lattice sum) expression
//!
//!   χ^{p,p'}_{r,s} = (1/(q)_inf) · Σ_λ ( q^(λ²pp' + λ(p'r − ps))
//!                                      − q^((λp + r)(λp' + s)) ),
//!
//! with conformal dimension Δ^{p,p'}_{r,s} = ((p'r − ps)² − (p'−p)²)/(4pp')
//! and the symmetry χ_{r,s} = χ_{p−r,p'−s}.  χ is a pure product of factors
//! 1/(1 − q^n) exactly when p = 2r, p' = 2s, p = 3r or p' = 3s; those four
//! excluded-residue products are built here directly from their residue
//! classes, independently of the bosonic sum they are checked against.
//!
//! For p = 3 and p = 4 the sums χ_{1,s} ± q^Δdiff χ_{p−1,s} have product
//! forms coming from the quintuple and triple product identities:
//!
//!   p = 3:  shift p'/4 − s/2,
//!     primary:      (∓q^(p'/4−s/2), ∓q^(p'/4+s/2), q^(p'/2); q^(p'/2))_inf
//!                   (q^s, q^(p'−s); q^(p'))_inf / (q)_inf
//!     alternative:  (q^s, q^(p'/2−s), q^(p'/2); q^(p'/2))_inf /
//!                   [ (q)_inf (±q^(p'/4−s/2), ±q^(p'/4+s/2); q^(p'/2))_inf ]
//!                   (needs p' ≠ 2s)
//!   p = 4:  shift p'/2 − s, p' odd,
//!     primary:      (q^s, ∓q^(p'/2−s), ∓q^(p'/2); ∓q^(p'/2))_inf / (q)_inf
//!     alternative:  (∓q^(p'/2−s), ∓q^(p'/2), ∓q^(p'/2+s),
//!                    q^s, q^(p'−s), q^(p'); q^(p'))_inf / (q)_inf
//!
//! where the upper sign of ∓ belongs to the '+' combination.  For s > p'/2
//! some arguments have nonpositive exponents; the finitely many factors
//! involved are multiplied in as explicit Laurent polynomials (with order
//! headroom) and the remaining tail goes through the ordinary infinite
//! Pochhammer product.
//!
//! The W_n central charge c^{p,p'}_n = (n−1)(1 − n(n+1)(p'−p)²/(pp'))
//! is exposed for the exact-rational coincidence checks between ranks.

use num_integer::Integer;
use num_traits::One;

use crate::qfunctions::{euler_inf, exp_to_t, poch_inf_signed, QMonomial};
use crate::series::QSeries;
use crate::{Error, Rat, Result};

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

/// A minimal model M(p,p')_n: coprime 1 < p < p', algebra rank n >= 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelLabel {
    pub p: i64,
    pub p_prime: i64,
    pub rank: i64,
}

impl ModelLabel {
    /// Rank-2 (Virasoro) model label.
    pub fn virasoro(p: i64, p_prime: i64) -> Result<ModelLabel> {
        ModelLabel::new(p, p_prime, 2)
    }

    pub fn new(p: i64, p_prime: i64, rank: i64) -> Result<ModelLabel> {
        if !(1 < p && p < p_prime) {
            return Err(Error::Domain(format!("need 1 < p < p', got p = {p}, p' = {p_prime}")));
        }
        if p.gcd(&p_prime) != 1 {
            return Err(Error::Domain(format!("p = {p} and p' = {p_prime} are not coprime")));
        }
        if rank < 2 {
            return Err(Error::Domain(format!("algebra rank {rank} must be >= 2")));
        }
        Ok(ModelLabel { p, p_prime, rank })
    }
}

/// A module label (r,s) with 1 <= r < p and 1 <= s < p'.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldLabel {
    pub r: i64,
    pub s: i64,
}

impl FieldLabel {
    pub fn new(m: &ModelLabel, r: i64, s: i64) -> Result<FieldLabel> {
        if !(1 <= r && r < m.p) || !(1 <= s && s < m.p_prime) {
            return Err(Error::Domain(format!(
                "field label (r,s) = ({r},{s}) outside 1..{} x 1..{}",
                m.p - 1,
                m.p_prime - 1
            )));
        }
        Ok(FieldLabel { r, s })
    }
}

// ---------------------------------------------------------------------------
// Exact rational invariants
// ---------------------------------------------------------------------------

/// Conformal dimension Δ^{p,p'}_{r,s} = ((p'r − ps)² − (p'−p)²) / (4pp').
pub fn conformal_dim(m: &ModelLabel, f: &FieldLabel) -> Rat {
    let num = (m.p_prime * f.r - m.p * f.s).pow(2) - (m.p_prime - m.p).pow(2);
    Rat::new(num, 4 * m.p * m.p_prime)
}

/// Central charge c^{p,p'}_n = (n−1)(1 − n(n+1)(p'−p)²/(pp')).
pub fn central_charge(n: i64, p: i64, p_prime: i64) -> Rat {
    let frac = Rat::new(n * (n + 1) * (p_prime - p).pow(2), p * p_prime);
    Rat::from_integer(n - 1) * (Rat::one() - frac)
}

// ---------------------------------------------------------------------------
// Bosonic sum
// ---------------------------------------------------------------------------

/// The normalised character χ^{p,p'}_{r,s} as the bosonic lattice sum, on
/// D = 1 through q^order.
///
/// λ is summed while λ²pp' − |λ|(p'r + ps) <= order; that quantity lower
/// bounds both exponents in the λ summand, so no contributing λ is skipped.
pub fn bosonic(m: &ModelLabel, f: &FieldLabel, order: i64) -> Result<QSeries> {
    let (p, pp) = (m.p, m.p_prime);
    let (r, s) = (f.r, f.s);
    let mut sum = QSeries::zero(1, order);
    let mut lam = 0i64;
    loop {
        let mut contributed = false;
        for l in if lam == 0 { vec![0] } else { vec![lam, -lam] } {
            if l * l * p * pp - l.abs() * (pp * r + p * s) > order {
                continue;
            }
            contributed = true;
            let e1 = l * l * p * pp + l * (pp * r - p * s);
            if e1 <= order {
                sum = sum.add(&QSeries::monomial(1, e1, 1, order)?)?;
            }
            let e2 = (l * p + r) * (l * pp + s);
            if e2 <= order {
                sum = sum.add(&QSeries::monomial(-1, e2, 1, order)?)?;
            }
        }
        if !contributed && lam > 0 {
            break;
        }
        lam += 1;
    }
    sum.mul(&euler_inf(1, order)?.invert()?)
}

// ---------------------------------------------------------------------------
// Pure product forms (excluded residue classes)
// ---------------------------------------------------------------------------

/// Which of the four pure-product cases applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductCase {
    /// p = 2r:  n ≢ 0, ±rs (mod rp')
    PEq2R,
    /// p' = 2s: n ≢ 0, ±rs (mod sp)
    PPrimeEq2S,
    /// p = 3r:  n ≢ 0, ±rs (mod 2rp') and n ≢ ±2r(p'−s) (mod 4rp')
    PEq3R,
    /// p' = 3s: n ≢ 0, ±rs (mod 2sp) and n ≢ ±2s(p−r) (mod 4sp)
    PPrimeEq3S,
}

/// The pure-product character: the product over all n >= 1 avoiding the
/// case's excluded residues of 1/(1 − q^n), assembled as one infinite
/// Pochhammer factor per *included* residue class and inverted.
///
/// Exact through q^order on D = 1; independent of the bosonic route.
pub fn product_char(case: ProductCase, m: &ModelLabel, f: &FieldLabel, order: i64) -> Result<QSeries> {
    let (p, pp) = (m.p, m.p_prime);
    let (r, s) = (f.r, f.s);
    let ok = match case {
        ProductCase::PEq2R => p == 2 * r,
        ProductCase::PPrimeEq2S => pp == 2 * s,
        ProductCase::PEq3R => p == 3 * r,
        ProductCase::PPrimeEq3S => pp == 3 * s,
    };
    if !ok {
        return Err(Error::Domain(format!(
            "case {case:?} does not hold for (p,p',r,s) = ({p},{pp},{r},{s})"
        )));
    }
    // The excluded set is periodic with period `modulus`; excluded residues
    // are listed mod that period.
    let (modulus, excluded): (i64, Vec<i64>) = match case {
        ProductCase::PEq2R => {
            let m0 = r * pp;
            (m0, vec![0, (r * s).rem_euclid(m0), (-r * s).rem_euclid(m0)])
        }
        ProductCase::PPrimeEq2S => {
            let m0 = s * p;
            (m0, vec![0, (r * s).rem_euclid(m0), (-r * s).rem_euclid(m0)])
        }
        ProductCase::PEq3R => {
            let m0 = 4 * r * pp;
            let half = 2 * r * pp;
            let a = (r * s).rem_euclid(half);
            let b = (2 * r * (pp - s)).rem_euclid(m0);
            (
                m0,
                vec![
                    0,
                    half,
                    a,
                    half - a,
                    a + half,
                    (2 * half - a) % m0,
                    b,
                    (m0 - b) % m0,
                ],
            )
        }
        ProductCase::PPrimeEq3S => {
            let m0 = 4 * s * p;
            let half = 2 * s * p;
            let a = (r * s).rem_euclid(half);
            let b = (2 * s * (p - r)).rem_euclid(m0);
            (
                m0,
                vec![
                    0,
                    half,
                    a,
                    half - a,
                    a + half,
                    (2 * half - a) % m0,
                    b,
                    (m0 - b) % m0,
                ],
            )
        }
    };
    let mut den = QSeries::one(1, order);
    for c in 1..=modulus {
        if excluded.contains(&(c % modulus)) {
            continue;
        }
        let arg = QMonomial::plus(c, 1);
        let base = QMonomial::plus(modulus, 1);
        den = den.mul(&poch_inf_signed(arg, base, 1, order)?)?;
    }
    den.invert()
}

// ---------------------------------------------------------------------------
// Character-combination products (p = 3 and p = 4)
// ---------------------------------------------------------------------------

/// Which printed form of the combination product to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComboForm {
    Primary,
    Alternative,
}

/// The coarsest substrate on which the combination χ_{1,s} ± q^shift
/// χ_{p−1,s} and its product lives: D = 4 for p = 3 with odd p'; D = 2 for
/// p = 4, or p = 3 with even p' and odd p'/2 − s; D = 1 otherwise.
pub fn natural_substrate(p: i64, p_prime: i64, s: i64) -> u32 {
    match p {
        3 => {
            if p_prime % 2 != 0 {
                4
            } else if (p_prime / 2 - s) % 2 != 0 {
                2
            } else {
                1
            }
        }
        4 => 2,
        _ => 1,
    }
}

/// The combination shift exponent: p'/4 − s/2 for p = 3, p'/2 − s for p = 4
/// (equal to Δ_{p−1,s} − Δ_{1,s}; may be negative for s > p'/2).
pub fn combo_shift(p: i64, p_prime: i64, s: i64) -> Rat {
    match p {
        3 => Rat::new(p_prime, 4) - Rat::new(s, 2),
        4 => Rat::new(p_prime, 2) - Rat::from_integer(s),
        _ => unreachable!("combination products exist for p in {{3,4}} only"),
    }
}

fn combo_preconditions(p: i64, p_prime: i64, s: i64, form: ComboForm, denom: u32) -> Result<()> {
    match p {
        3 => {
            if p_prime % 3 == 0 {
                return Err(Error::Domain(format!("p = 3 needs p' ≢ 0 (mod 3), got p' = {p_prime}")));
            }
        }
        4 => {
            if p_prime % 2 == 0 {
                return Err(Error::Domain(format!("p = 4 needs odd p', got p' = {p_prime}")));
            }
        }
        _ => return Err(Error::Domain(format!("no combination product for p = {p}"))),
    }
    if !(1 <= s && s < p_prime) {
        return Err(Error::Domain(format!("need 1 <= s < p', got s = {s}")));
    }
    if p == 3 && form == ComboForm::Alternative && p_prime == 2 * s {
        return Err(Error::Domain("alternative p = 3 form needs p' ≠ 2s".into()));
    }
    let natural = natural_substrate(p, p_prime, s);
    if denom % natural != 0 {
        return Err(Error::Domain(format!(
            "substrate D = {denom} too coarse: this combination needs a multiple of {natural}"
        )));
    }
    Ok(())
}

/// One Pochhammer argument of a combination product, with the finitely many
/// nonpositive-exponent factors peeled off as explicit Laurent factors.
struct ComboArg {
    arg: QMonomial,
    base: QMonomial,
}

/// Evaluates prod of (1 − sign·t^e)-style factors for one argument chain,
/// multiplying into `acc` (tracked to `acc`'s order).  Exponents are in
/// t-units and may start nonpositive; the chain step is base.exp > 0.
///
/// Returns None when a vanishing factor (exponent 0, sign +) appears — the
/// caller maps that to the zero series or an error depending on position.
fn mul_arg_chain(acc: QSeries, a: &ComboArg, denom: u32) -> Result<Option<QSeries>> {
    let mut e = exp_to_t(a.arg.exp, denom)?;
    let z = exp_to_t(a.base.exp, denom)?;
    debug_assert!(z > 0);
    let mut sign = a.arg.sign;
    let mut acc = acc;
    // Explicit leading factors with e <= 0: exact two-term Laurent
    // polynomials, tracked wide enough that the multiplication loses exactly
    // |e| of the accumulator's order — the honest loss, since unknown
    // coefficients above the window multiply against t^e.
    while e <= 0 {
        if e == 0 && sign > 0 {
            return Ok(None);
        }
        let wide = acc.order() + e - acc.offset();
        let mut factor = QSeries::monomial(1, 0, denom, wide)?;
        factor = factor.add(&QSeries::monomial(-sign, e, denom, wide)?)?;
        acc = acc.mul(&factor)?;
        e += z;
        sign *= a.base.sign;
    }
    // Tail: an ordinary infinite Pochhammer product starting at exponent e,
    // tracked across the accumulator's full window so its order is kept.
    let tail_arg = QMonomial { sign, exp: Rat::new(e, denom as i64) };
    let tail = poch_inf_signed(tail_arg, a.base, denom, acc.order() - acc.offset().min(0))?;
    Ok(Some(acc.mul(&tail)?))
}

/// Evaluates the combination product for p in {3,4} on substrate D through
/// t^order, for either printed form and either sign of the combination.
///
/// `sign` is the combination sign (so the '∓' arguments in the products get
/// −sign, the '±' ones +sign).
pub fn combo_product(
    p: i64,
    p_prime: i64,
    s: i64,
    sign: i64,
    form: ComboForm,
    denom: u32,
    order: i64,
) -> Result<QSeries> {
    combo_preconditions(p, p_prime, s, form, denom)?;
    if order < 0 {
        return Err(Error::OrderTooSmall { order, what: "combination product needs order >= 0".into() });
    }
    let minus = -sign; // the '∓' sign for this combination
    let plus = sign; // the '±' sign
    let half = Rat::new(p_prime, 2);
    let quarter_minus = Rat::new(p_prime, 4) - Rat::new(s, 2);
    let quarter_plus = Rat::new(p_prime, 4) + Rat::new(s, 2);
    let s_exp = Rat::from_integer(s);
    let q_base = QMonomial::plus(p_prime, 1);
    let half_base = QMonomial { sign: 1, exp: half };

    let mono = |sg: i64, exp: Rat| QMonomial { sign: sg, exp };

    // Numerator and denominator argument chains for the requested form.
    let (num_args, den_args): (Vec<ComboArg>, Vec<ComboArg>) = match (p, form) {
        (3, ComboForm::Primary) => (
            vec![
                ComboArg { arg: mono(minus, quarter_minus), base: half_base },
                ComboArg { arg: mono(minus, quarter_plus), base: half_base },
                ComboArg { arg: mono(1, half), base: half_base },
                ComboArg { arg: mono(1, s_exp), base: q_base },
                ComboArg { arg: mono(1, Rat::from_integer(p_prime - s)), base: q_base },
            ],
            vec![],
        ),
        (3, ComboForm::Alternative) => (
            vec![
                ComboArg { arg: mono(1, s_exp), base: half_base },
                ComboArg { arg: mono(1, half - s_exp), base: half_base },
                ComboArg { arg: mono(1, half), base: half_base },
            ],
            vec![
                ComboArg { arg: mono(plus, quarter_minus), base: half_base },
                ComboArg { arg: mono(plus, quarter_plus), base: half_base },
            ],
        ),
        (4, ComboForm::Primary) => {
            let signed_base = QMonomial { sign: minus, exp: half };
            (
                vec![
                    ComboArg { arg: mono(1, s_exp), base: signed_base },
                    ComboArg { arg: mono(minus, half - s_exp), base: signed_base },
                    ComboArg { arg: mono(minus, half), base: signed_base },
                ],
                vec![],
            )
        }
        (4, ComboForm::Alternative) => (
            vec![
                ComboArg { arg: mono(minus, half - s_exp), base: q_base },
                ComboArg { arg: mono(minus, half), base: q_base },
                ComboArg { arg: mono(minus, half + s_exp), base: q_base },
                ComboArg { arg: mono(1, s_exp), base: q_base },
                ComboArg { arg: mono(1, Rat::from_integer(p_prime - s)), base: q_base },
                ComboArg { arg: mono(1, Rat::from_integer(p_prime)), base: q_base },
            ],
            vec![],
        ),
        _ => unreachable!(),
    };

    // Order headroom: every explicit nonpositive-exponent factor costs its
    // magnitude in tracked order when multiplied in.
    let mut headroom = 0i64;
    for a in num_args.iter().chain(den_args.iter()) {
        let mut e = exp_to_t(a.arg.exp, denom)?;
        let z = exp_to_t(a.base.exp, denom)?;
        while e <= 0 {
            headroom += -e;
            e += z;
        }
    }
    let work = order + headroom;

    let mut num = QSeries::one(denom, work);
    for a in &num_args {
        match mul_arg_chain(num, a, denom)? {
            Some(next) => num = next,
            // A vanishing numerator factor: the whole product is zero.
            None => return Ok(QSeries::zero(denom, order)),
        }
    }
    let q_ord = work.div_euclid(denom as i64) + 1;
    let mut den = euler_inf(1, q_ord)?.refine_denom(denom).truncate(work);
    for a in &den_args {
        match mul_arg_chain(den, a, denom)? {
            Some(next) => den = next,
            None => return Err(Error::VanishingProduct),
        }
    }
    let result = num.mul(&den.invert()?)?;
    Ok(result.truncate(order.min(result.order())))
}

/// The bosonic route to the same combination: χ_{1,s} ± q^shift·χ_{p−1,s}
/// lifted to substrate D through t^order.
pub fn combo_bosonic(
    p: i64,
    p_prime: i64,
    s: i64,
    sign: i64,
    denom: u32,
    order: i64,
) -> Result<QSeries> {
    let m = ModelLabel::virasoro(p, p_prime)?;
    let f1 = FieldLabel::new(&m, 1, s)?;
    let f2 = FieldLabel::new(&m, p - 1, s)?;
    let shift_t = exp_to_t(combo_shift(p, p_prime, s), denom)?;
    let d = denom as i64;
    // χ_{1,s} needs q-order ceil(order/D); the shifted χ_{p−1,s} needs
    // ceil((order − shift)/D).  Both are computed on D = 1 and lifted.
    let q_order_1 = order.div_euclid(d) + 1;
    let chi1 = bosonic(&m, &f1, q_order_1.max(0))?.refine_denom(denom).truncate(order);
    if shift_t > order {
        // The shifted character lies entirely above the window.
        return Ok(chi1);
    }
    let q_order_2 = (order - shift_t).div_euclid(d) + 1;
    let chi2 = bosonic(&m, &f2, q_order_2.max(0))?.refine_denom(denom);
    let shifted = chi2.mul_monomial(sign, shift_t);
    chi1.add(&shifted.truncate(order))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn coeffs_q(s: &QSeries, through: i64) -> Vec<i64> {
        (0..=through)
            .map(|n| i64::try_from(&s.coeff_q(n).unwrap()).unwrap())
            .collect()
    }

    #[test]
    fn conformal_dims_for_the_3_14_model() {
        let m = ModelLabel::virasoro(3, 14).unwrap();
        let f11 = FieldLabel::new(&m, 1, 1).unwrap();
        let f21 = FieldLabel::new(&m, 2, 1).unwrap();
        assert_eq!(conformal_dim(&m, &f11), Rat::zero());
        assert_eq!(conformal_dim(&m, &f21) - conformal_dim(&m, &f11), Rat::from_integer(3));
        // Symmetry (r,s) -> (p−r, p'−s).
        let f2_13 = FieldLabel::new(&m, 2, 13).unwrap();
        assert_eq!(conformal_dim(&m, &f11), conformal_dim(&m, &f2_13));
    }

    #[test]
    fn combo_shift_matches_conformal_dimension_difference() {
        for (p, pps) in [(3i64, vec![4, 5, 7, 8, 10, 11, 13, 14, 16]), (4, vec![5, 7, 9, 11, 13])] {
            for pp in pps {
                for s in 1..pp {
                    let m = ModelLabel::virasoro(p, pp).unwrap();
                    let f1 = FieldLabel::new(&m, 1, s).unwrap();
                    let f2 = FieldLabel::new(&m, p - 1, s).unwrap();
                    assert_eq!(
                        conformal_dim(&m, &f2) - conformal_dim(&m, &f1),
                        combo_shift(p, pp, s),
                        "shift mismatch at ({p},{pp},{s})"
                    );
                }
            }
        }
    }

    #[test]
    fn central_charges() {
        assert_eq!(central_charge(2, 3, 14), Rat::new(-114, 7));
        assert_eq!(central_charge(3, 3, 7), Rat::new(-114, 7));
        assert_eq!(central_charge(2, 2, 5), Rat::new(-22, 5));
    }

    #[test]
    fn bosonic_2_5_characters() {
        let m = ModelLabel::virasoro(2, 5).unwrap();
        let f12 = FieldLabel::new(&m, 1, 2).unwrap();
        let f11 = FieldLabel::new(&m, 1, 1).unwrap();
        let chi12 = bosonic(&m, &f12, 20).unwrap();
        let chi11 = bosonic(&m, &f11, 20).unwrap();
        assert_eq!(coeffs_q(&chi12, 6), vec![1, 1, 1, 1, 2, 2, 3]);
        assert_eq!(coeffs_q(&chi11, 6), vec![1, 0, 1, 1, 1, 1, 2]);
    }

    #[test]
    fn bosonic_constant_term_is_one() {
        for (p, pp) in [(2i64, 5i64), (3, 5), (3, 7), (4, 7), (5, 6)] {
            let m = ModelLabel::virasoro(p, pp).unwrap();
            for r in 1..p {
                for s in 1..pp {
                    let f = FieldLabel::new(&m, r, s).unwrap();
                    let chi = bosonic(&m, &f, 12).unwrap();
                    assert_eq!(chi.coeff_q(0).unwrap(), 1.into(), "χ^{{{p},{pp}}}_{{{r},{s}}}(0)");
                }
            }
        }
    }

    #[test]
    fn bosonic_label_symmetry() {
        let m = ModelLabel::virasoro(3, 8).unwrap();
        let a = bosonic(&m, &FieldLabel::new(&m, 1, 3).unwrap(), 30).unwrap();
        let b = bosonic(&m, &FieldLabel::new(&m, 2, 5).unwrap(), 30).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn product_case_p2r_matches_bosonic_rogers_ramanujan() {
        let m = ModelLabel::virasoro(2, 5).unwrap();
        let f = FieldLabel::new(&m, 1, 2).unwrap();
        let prod = product_char(ProductCase::PEq2R, &m, &f, 40).unwrap();
        let bos = bosonic(&m, &f, 40).unwrap();
        assert_eq!(prod, bos);
    }

    #[test]
    fn product_case_pp3s_matches_bosonic() {
        let m = ModelLabel::virasoro(4, 9).unwrap();
        let f = FieldLabel::new(&m, 1, 3).unwrap();
        let prod = product_char(ProductCase::PPrimeEq3S, &m, &f, 40).unwrap();
        let bos = bosonic(&m, &f, 40).unwrap();
        assert_eq!(prod, bos);
    }

    #[test]
    fn product_case_precondition_is_checked() {
        let m = ModelLabel::virasoro(3, 5).unwrap();
        let f = FieldLabel::new(&m, 1, 2).unwrap();
        assert!(product_char(ProductCase::PEq2R, &m, &f, 10).is_err());
    }

    #[test]
    fn combo3_product_equals_bosonic_combination() {
        // (p,p',s) = (3,14,1): shift is q^3, everything on D = 1.
        let prod = combo_product(3, 14, 1, 1, ComboForm::Primary, 1, 60).unwrap();
        let bos = combo_bosonic(3, 14, 1, 1, 1, 60).unwrap();
        assert_eq!(prod, bos);
    }

    #[test]
    fn combo3_primary_equals_alternative() {
        for s in [1i64, 2, 3, 5, 6, 7] {
            let d = natural_substrate(3, 8, s);
            let a = combo_product(3, 8, s, 1, ComboForm::Primary, d, 40 * d as i64).unwrap();
            let b = combo_product(3, 8, s, 1, ComboForm::Alternative, d, 40 * d as i64).unwrap();
            assert_eq!(a, b, "s = {s}");
        }
    }

    #[test]
    fn combo4_lowest_shifted_term() {
        // (4,5,1): the shifted character contributes q^(3/2) with coefficient 1.
        let s = combo_product(4, 5, 1, 1, ComboForm::Primary, 2, 120).unwrap();
        assert_eq!(s.coeff_at(0).unwrap(), 1.into());
        assert_eq!(s.coeff_at(3).unwrap(), 1.into()); // t^3 = q^(3/2)
        let bos = combo_bosonic(4, 5, 1, 1, 2, 120).unwrap();
        assert_eq!(s, bos);
    }

    #[test]
    fn combo_products_with_minus_sign_also_match_bosonic() {
        let prod = combo_product(3, 14, 3, -1, ComboForm::Primary, 1, 40).unwrap();
        let bos = combo_bosonic(3, 14, 3, -1, 1, 40).unwrap();
        assert_eq!(prod, bos);
        let prod4 = combo_product(4, 7, 2, -1, ComboForm::Primary, 2, 80).unwrap();
        let bos4 = combo_bosonic(4, 7, 2, -1, 2, 80).unwrap();
        assert_eq!(prod4, bos4);
    }

    #[test]
    fn combo3_large_s_uses_negative_shift() {
        // s > p'/2: the combination has a negative shift and the product
        // acquires explicit Laurent factors; both routes must still agree.
        let d = natural_substrate(3, 10, 7);
        let ord = 40 * d as i64;
        let prod = combo_product(3, 10, 7, 1, ComboForm::Primary, d, ord).unwrap();
        let bos = combo_bosonic(3, 10, 7, 1, d, ord).unwrap();
        assert_eq!(prod.truncate(ord.min(prod.order())), bos.truncate(ord.min(bos.order())));
        assert!(prod.offset() < 0);
    }

    #[test]
    fn combo3_minus_sign_at_p_prime_eq_2s_vanishes() {
        // χ_{1,s} − χ_{2,s} = 0 at p' = 2s by the label symmetry; the
        // primary product picks up the factor (1 − q^0) = 0.
        let z = combo_product(3, 8, 4, -1, ComboForm::Primary, 1, 30).unwrap();
        for e in z.offset()..=z.order() {
            assert!(z.coeff_at(e).unwrap().is_zero());
        }
        let bos = combo_bosonic(3, 8, 4, -1, 1, 30).unwrap();
        for e in bos.offset()..=bos.order() {
            assert!(bos.coeff_at(e).unwrap().is_zero());
        }
    }

    #[test]
    fn substrate_too_coarse_is_rejected() {
        assert!(combo_product(3, 7, 1, 1, ComboForm::Primary, 2, 40).is_err());
        assert!(combo_product(4, 7, 1, 1, ComboForm::Primary, 1, 40).is_err());
    }
}
