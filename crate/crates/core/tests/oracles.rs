//! Independent oracles: elimination rank and closed-form Gaussian moments.

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use nonlocal_trefftz::geometry::Dim;
use nonlocal_trefftz::nlconv::{conv_gaussian_analytic, conv_restricted, DEFAULT_QUAD_POINTS_PER_SIGMA};
use nonlocal_trefftz::numerics::{null_space, numerical_rank, DEFAULT_REL_TOL};
use nonlocal_trefftz::polynomials::monomial_basis;
use nonlocal_trefftz::trefftz::{build_constraints, TrefftzOptions};
use nonlocal_trefftz::{presets, ConvDomain, Kernel, Polynomial};

/// Rank by Gaussian elimination with partial pivoting on a row-scaled copy.
fn elimination_rank(a: &DMatrix<f64>, tol: f64) -> usize {
    let mut m: Vec<Vec<f64>> = (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect();
    let (rows, cols) = (m.len(), a.ncols());
    let mut rank = 0;
    for c in 0..cols {
        let Some((p, pv)) = (rank..rows)
            .map(|r| (r, m[r][c].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
        else {
            break;
        };
        if pv <= tol {
            continue;
        }
        m.swap(rank, p);
        for r in rank + 1..rows {
            let f = m[r][c] / m[rank][c];
            for k in c..cols {
                m[r][k] -= f * m[rank][k];
            }
        }
        rank += 1;
    }
    rank
}

#[test]
fn null_space_matches_elimination_rank_on_presets() {
    let opts = TrefftzOptions::default();
    let b1 = presets::trefftz_1d().unwrap();
    let b2 = presets::trefftz_2d().unwrap();
    for b in [b1, b2] {
        let basis = monomial_basis(b.cfg.dim(), b.n_max, b.x0);
        let sys = build_constraints(&b.cfg, &basis, b.x0, b.m, &opts).unwrap();
        let rank = elimination_rank(&sys.matrix, 1e-9);
        assert_eq!(rank, numerical_rank(&sys.matrix, DEFAULT_REL_TOL));
        let ns = null_space(&sys.matrix, DEFAULT_REL_TOL);
        assert_eq!(ns.ncols(), basis.len() - rank);
        assert!((&sys.matrix * &ns).amax() < 1e-12);
    }
}

#[test]
fn null_space_random_low_rank() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..30 {
        let (r, n, k) = (rng.random_range(2..7), rng.random_range(3..9), rng.random_range(1..3));
        let left = DMatrix::from_fn(r, k, |_, _| rng.random_range(-1.0..1.0));
        let right = DMatrix::from_fn(k, n, |_, _| rng.random_range(-1.0..1.0));
        let a = left * right;
        let rank = elimination_rank(&a, 1e-10);
        let ns = null_space(&a, DEFAULT_REL_TOL);
        assert_eq!(ns.ncols(), n - rank);
        assert!((&a * &ns).amax() < 1e-12);
        assert_relative_eq!(ns.transpose() * &ns, DMatrix::identity(ns.ncols(), ns.ncols()), epsilon = 1e-12);
    }
}

/// 50 random (degree, σ, interval, x) cases: quadrature vs closed form.
#[test]
fn quadrature_matches_closed_form() {
    let mut rng = StdRng::seed_from_u64(2024);
    for _ in 0..50 {
        let p = rng.random_range(0..=6usize);
        let sigma = [0.25, 0.5, 1.0][rng.random_range(0..3)];
        let a = rng.random_range(-3.0..1.0);
        let b = a + rng.random_range(0.1..4.0);
        // beyond ~3σ outside the interval the closed form loses digits to binomial cancellation
        let x = rng.random_range(a - 3.0 * sigma..b + 3.0 * sigma);
        let c = rng.random_range(-1.0..1.0);
        let f = Polynomial::monomial(Dim::One, [c, 0.0], [p, 0]);
        let k = Kernel::gaussian(Dim::One, sigma).unwrap();
        let dom = ConvDomain::interval(a, b).unwrap();
        let quad = conv_restricted(&k, &f, &dom, [x, 0.0], [0, 0], DEFAULT_QUAD_POINTS_PER_SIGMA).unwrap();
        let exact = conv_gaussian_analytic(sigma, p, c, (a, b), x).unwrap();
        let rel = (quad - exact).abs() / exact.abs();
        assert!(rel <= 1e-10, "p={p} σ={sigma} c={c:?} ({a:?},{b:?}) x={x:?}: {quad:?} vs {exact:?}");
    }
}

/// Far-tail case where the closed form is ill-conditioned; reference from
/// 50-digit adaptive quadrature.
#[test]
fn quadrature_far_tail_reference() {
    let (a, b, x, c) = (0.040397354843557665, 2.2082276471281257, -1.4876839166715143, -0.07071874755620611);
    let f = Polynomial::monomial(Dim::One, [c, 0.0], [6, 0]);
    let k = Kernel::gaussian(Dim::One, 0.25).unwrap();
    let dom = ConvDomain::interval(a, b).unwrap();
    let quad = conv_restricted(&k, &f, &dom, [x, 0.0], [0, 0], DEFAULT_QUAD_POINTS_PER_SIGMA).unwrap();
    assert_relative_eq!(quad, 1.1828935821597822e-14, max_relative = 1e-12);
}
