use proptest::prelude::*;

use nonlocal_trefftz::geometry::{Dim, Rect};
use nonlocal_trefftz::nlconv::conv_restricted;
use nonlocal_trefftz::{ConvDomain, Kernel, Polynomial};

fn poly_2d(coeffs: &[f64], center: [f64; 2]) -> Polynomial {
    let alphas = Dim::Two.multi_indices(3);
    let terms: Vec<_> = alphas.into_iter().zip(coeffs.iter().copied()).collect();
    Polynomial::from_terms(Dim::Two, center, &terms)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_in_the_field(
        cf in prop::collection::vec(-1.0..1.0f64, 10),
        cg in prop::collection::vec(-1.0..1.0f64, 10),
        a in -2.0..2.0f64, b in -2.0..2.0f64,
        x in -1.0..1.0f64, y in -1.0..1.0f64,
    ) {
        let k = Kernel::gaussian(Dim::Two, 0.5).unwrap();
        let dom = ConvDomain::single(Dim::Two, Rect::new([-1.5, -2.0], [2.0, 1.0])).unwrap();
        let f = poly_2d(&cf, [0.1, 0.0]);
        let g = poly_2d(&cg, [0.1, 0.0]);
        let combo = f.scaled(a).add(&g.scaled(b));
        for beta in [[0, 0], [1, 0], [1, 2]] {
            let lhs = conv_restricted(&k, &combo, &dom, [x, y], beta, 12).unwrap();
            let fv = conv_restricted(&k, &f, &dom, [x, y], beta, 12).unwrap();
            let gv = conv_restricted(&k, &g, &dom, [x, y], beta, 12).unwrap();
            let rhs = a * fv + b * gv;
            let scale = (a * fv).abs() + (b * gv).abs();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(lhs.abs()).max(1e-14));
        }
    }

    #[test]
    fn enlarging_a_covering_domain_changes_nothing(
        p in 0..6usize, sigma in prop::sample::select(vec![0.25, 0.5, 1.0]),
        x in -1.0..1.0f64, pad in 0.5..3.0f64,
    ) {
        let k = Kernel::gaussian(Dim::One, sigma).unwrap();
        let r = k.truncation_radius(1e-18).unwrap();
        let f = Polynomial::monomial(Dim::One, [0.0, 0.0], [p, 0]);
        let small = ConvDomain::interval(x - r, x + r).unwrap();
        let big = ConvDomain::interval(x - r - pad, x + r + 2.0 * pad).unwrap();
        let a = conv_restricted(&k, &f, &small, [x, 0.0], [0, 0], 12).unwrap();
        let b = conv_restricted(&k, &f, &big, [x, 0.0], [0, 0], 12).unwrap();
        prop_assert!(rel(a, b) <= 1e-12 || (a - b).abs() < 1e-14);
    }

    #[test]
    fn kernel_derivative_matches_finite_difference(
        cf in prop::collection::vec(-1.0..1.0f64, 10),
        x in -0.8..0.8f64, y in -0.8..0.8f64,
    ) {
        let k = Kernel::gaussian(Dim::Two, 0.5).unwrap();
        let dom = ConvDomain::single(Dim::Two, Rect::new([-1.0, -1.0], [1.0, 1.0])).unwrap();
        let f = poly_2d(&cf, [0.0, 0.0]);
        let h = 1e-5;
        let d = conv_restricted(&k, &f, &dom, [x, y], [1, 0], 12).unwrap();
        let fd = (conv_restricted(&k, &f, &dom, [x + h, y], [0, 0], 12).unwrap()
            - conv_restricted(&k, &f, &dom, [x - h, y], [0, 0], 12).unwrap())
            / (2.0 * h);
        let scale = d.abs().max(1.0);
        prop_assert!((d - fd).abs() <= 1e-6 * scale, "{d} vs {fd}");
    }
}

/// Doubling the quadrature density leaves values unchanged.
#[test]
fn quadrature_refinement() {
    let k = Kernel::gaussian(Dim::Two, 0.5).unwrap();
    let dom = ConvDomain::single(Dim::Two, Rect::centered(Dim::Two, [0.0, 0.0], 3.0)).unwrap();
    for alpha in Dim::Two.multi_indices(4) {
        let f = Polynomial::monomial(Dim::Two, [0.0, 0.0], alpha);
        for beta in Dim::Two.multi_indices(3) {
            for &x in &[[0.0, 0.0], [0.3, -0.2], [2.8, 1.0]] {
                let a = conv_restricted(&k, &f, &dom, x, beta, 12).unwrap();
                let b = conv_restricted(&k, &f, &dom, x, beta, 24).unwrap();
                assert!(rel(a, b) <= 1e-10 || (a - b).abs() < 1e-13, "α={alpha:?} β={beta:?}: {a} {b}");
            }
        }
    }
}
