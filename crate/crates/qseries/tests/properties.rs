//! Randomized property tests for the series ring and the q-object layer:
//! ring axioms under truncation, inversion round-trips, truncation
//! consistency, window contracts, Gaussian-polynomial symmetries, and
//! Pochhammer prefix stability.

use proptest::prelude::*;

use qseries::qfunctions::{gaussian, poch_finite, QMonomial};
use qseries::series::QSeries;
use qseries::Rat;

/// Builds a series with the given low t-exponent and coefficient run using
/// only public constructors.
fn build_series(d: u32, low: i64, coeffs: &[i64]) -> QSeries {
    let order = low + coeffs.len() as i64 - 1;
    let mut s = QSeries::zero(d, order);
    for (i, &c) in coeffs.iter().enumerate() {
        if c != 0 {
            let m = QSeries::monomial(c, low + i as i64, d, order).expect("inside window");
            s = s.add(&m).expect("same substrate");
        }
    }
    s
}

/// Raw material for one random series: low exponent and coefficients with a
/// nonzero lead (an all-zero lead would merely shrink the window).
fn raw_series() -> impl Strategy<Value = (i64, Vec<i64>)> {
    (-5i64..=5, prop::collection::vec(-9i64..=9, 1..=24)).prop_map(|(low, mut coeffs)| {
        if coeffs[0] == 0 {
            coeffs[0] = 1;
        }
        (low, coeffs)
    })
}

fn substrate() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![1u32, 2, 4])
}

/// Coefficients agree at every exponent from below both offsets through
/// `through` (which must be inside both windows).
fn assert_agree_through(a: &QSeries, b: &QSeries, through: i64) {
    assert_eq!(a.denom(), b.denom());
    let lo = a.offset().min(b.offset()).min(0);
    for e in lo..=through {
        assert_eq!(
            a.coeff_at(e).unwrap(),
            b.coeff_at(e).unwrap(),
            "coefficient mismatch at t^{e}"
        );
    }
}

proptest! {
    #[test]
    fn add_commutes_and_associates(
        d in substrate(),
        ra in raw_series(),
        rb in raw_series(),
        rc in raw_series(),
    ) {
        let a = build_series(d, ra.0, &ra.1);
        let b = build_series(d, rb.0, &rb.1);
        let c = build_series(d, rc.0, &rc.1);
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        let left = a.add(&b).unwrap().add(&c).unwrap();
        let right = a.add(&b.add(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn mul_commutes_and_associates(
        d in substrate(),
        ra in raw_series(),
        rb in raw_series(),
        rc in raw_series(),
    ) {
        let a = build_series(d, ra.0, &ra.1);
        let b = build_series(d, rb.0, &rb.1);
        let c = build_series(d, rc.0, &rc.1);
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn mul_distributes_over_add(
        d in substrate(),
        ra in raw_series(),
        rb in raw_series(),
        rc in raw_series(),
    ) {
        let a = build_series(d, ra.0, &ra.1);
        let b = build_series(d, rb.0, &rb.1);
        let c = build_series(d, rc.0, &rc.1);
        // b + c may cancel its lead, which widens one side's tracked
        // window; the two routes must agree on the common window.
        let left = a.mul(&b.add(&c).unwrap()).unwrap();
        let right = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        let through = left.order().min(right.order());
        assert_agree_through(&left, &right, through);
    }

    #[test]
    fn invert_round_trips(
        d in substrate(),
        raw in raw_series(),
        negative_lead in any::<bool>(),
    ) {
        let (low, mut coeffs) = raw;
        coeffs[0] = if negative_lead { -1 } else { 1 };
        let a = build_series(d, low, &coeffs);
        let inv = a.invert().unwrap();
        prop_assert_eq!(inv.offset(), -a.offset());
        let product = a.mul(&inv).unwrap();
        for e in product.offset().min(0)..=product.order() {
            let expected = if e == 0 { 1 } else { 0 };
            prop_assert_eq!(product.coeff_at(e).unwrap(), expected.into());
        }
    }

    #[test]
    fn mul_is_truncation_consistent(
        d in substrate(),
        ra in raw_series(),
        rb in raw_series(),
        keep_a in 1usize..=24,
        keep_b in 1usize..=24,
    ) {
        // The same two series tracked to shorter windows must reproduce the
        // long product's coefficients through the short product's order.
        let a_long = build_series(d, ra.0, &ra.1);
        let b_long = build_series(d, rb.0, &rb.1);
        let a_short = build_series(d, ra.0, &ra.1[..keep_a.min(ra.1.len())]);
        let b_short = build_series(d, rb.0, &rb.1[..keep_b.min(rb.1.len())]);
        let long = a_long.mul(&b_long).unwrap();
        let short = a_short.mul(&b_short).unwrap();
        prop_assert!(short.order() <= long.order());
        assert_agree_through(&long, &short, short.order());
    }

    #[test]
    fn window_contract_never_fabricates(
        d in substrate(),
        raw in raw_series(),
    ) {
        let a = build_series(d, raw.0, &raw.1);
        // Above the order: unknown, always an error.
        prop_assert!(a.coeff_at(a.order() + 1).is_err());
        prop_assert!(a.coeff_at(a.order() + 17).is_err());
        // Below the offset: known zero.
        prop_assert_eq!(a.coeff_at(a.offset() - 1).unwrap(), 0.into());
        // Truncating keeps every surviving coefficient bit-identical.
        let cut = a.truncate(a.offset().max(a.order() - 3));
        for e in cut.offset()..=cut.order() {
            prop_assert_eq!(cut.coeff_at(e).unwrap(), a.coeff_at(e).unwrap());
        }
    }

    #[test]
    fn substrate_refine_and_stretch_place_coefficients(
        raw in raw_series(),
        k in 2u32..=4,
    ) {
        let a = build_series(1, raw.0, &raw.1);
        let fine = a.refine_denom(k);
        prop_assert_eq!(fine.denom(), k);
        let stretched = a.stretch(k);
        prop_assert_eq!(stretched.denom(), 1);
        for e in a.offset()..=a.order() {
            let c = a.coeff_at(e).unwrap();
            prop_assert_eq!(fine.coeff_at(e * k as i64).unwrap(), c.clone());
            prop_assert_eq!(stretched.coeff_at(e * k as i64).unwrap(), c);
        }
        // In-between exponents are known zeros on both routes.
        if a.order() > a.offset() {
            prop_assert_eq!(fine.coeff_at(a.offset() * k as i64 + 1).unwrap(), 0.into());
            prop_assert_eq!(stretched.coeff_at(a.offset() * k as i64 + 1).unwrap(), 0.into());
        }
    }

    #[test]
    fn gaussian_symmetry_degree_and_support(p in 0i64..=14, n in -3i64..=17) {
        let g = gaussian(p, n);
        let mirrored = gaussian(p, p - n);
        prop_assert_eq!(&g, &mirrored);
        if n < 0 || n > p {
            // Outside the support the polynomial is zero.
            for e in 0..=g.order() {
                prop_assert_eq!(g.coeff_at(e).unwrap(), 0.into());
            }
        } else {
            // Monic of exact degree n(p - n), constant term 1.
            let degree = n * (p - n);
            prop_assert_eq!(g.coeff_at(0).unwrap(), 1.into());
            prop_assert_eq!(g.coeff_at(degree).unwrap(), 1.into());
            for e in degree + 1..=g.order() {
                prop_assert_eq!(g.coeff_at(e).unwrap(), 0.into());
            }
        }
    }

    #[test]
    fn poch_finite_prefix_is_order_stable(
        num in 0i64..=3,
        n in 0u32..=6,
        short in 5i64..=20,
        extra in 1i64..=20,
    ) {
        // (q^num; q)_n computed at two orders agrees through the shorter.
        let a = QMonomial::plus(num.max(1), 1);
        let lo = poch_finite(a, Rat::from_integer(1), n, 1, short).unwrap();
        let hi = poch_finite(a, Rat::from_integer(1), n, 1, short + extra).unwrap();
        for e in 0..=short {
            prop_assert_eq!(lo.coeff_at(e).unwrap(), hi.coeff_at(e).unwrap());
        }
    }
}
