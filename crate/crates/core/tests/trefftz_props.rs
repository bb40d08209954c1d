use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};

use nonlocal_trefftz::geometry::{Dim, Rect};
use nonlocal_trefftz::nlconv::{d_field_partial, ConvConfig, ConvDomain};
use nonlocal_trefftz::polynomials::{harmonic_basis_2d, monomial_basis};
use nonlocal_trefftz::presets;
use nonlocal_trefftz::trefftz::*;
use nonlocal_trefftz::{Kernel, Polynomial};

fn opts() -> TrefftzOptions {
    TrefftzOptions::default()
}

fn bulk(b: &presets::Bulk) -> TrefftzSet {
    build_trefftz_bulk(&b.cfg, b.n_max, b.x0, b.m, b.trefftz_domain, &opts()).unwrap()
}

fn coeff_matrix(ts: &TrefftzSet) -> DMatrix<f64> {
    DMatrix::from_fn(ts.n_funcs(), ts.n_basis(), |i, j| ts.coeffs[i][j])
}

#[test]
fn rows_orthonormal() {
    for b in [presets::trefftz_1d().unwrap(), presets::trefftz_2d().unwrap()] {
        let c = coeff_matrix(&bulk(&b));
        let g = &c * c.transpose();
        assert_relative_eq!(g, DMatrix::identity(c.nrows(), c.nrows()), epsilon = 1e-12);
    }
}

#[test]
fn translation_covariance() {
    for (b, shift) in [
        (presets::trefftz_1d().unwrap(), [0.37, 0.0]),
        (presets::trefftz_2d().unwrap(), [0.4, -0.25]),
    ] {
        let dim = b.cfg.dim();
        let base = bulk(&b);
        let moved = build_trefftz_bulk(
            &b.cfg.translated(shift),
            b.n_max,
            [b.x0[0] + shift[0], b.x0[1] + shift[1]],
            b.m,
            b.trefftz_domain.translate(dim, shift),
            &opts(),
        )
        .unwrap();
        assert_eq!(base.n_funcs(), moved.n_funcs());
        assert!((coeff_matrix(&base) - coeff_matrix(&moved)).amax() < 1e-10);
    }
}

#[test]
fn parity_decoupling_1d() {
    let cfg = ConvConfig::new(
        1.0,
        10.0,
        Kernel::gaussian(Dim::One, 0.5).unwrap(),
        ConvDomain::interval(-4.0, 4.0).unwrap(),
    )
    .unwrap();
    let basis = monomial_basis(Dim::One, 6, [0.0, 0.0]);
    let sys = build_constraints(&cfg, &basis, [0.0, 0.0], 3, &opts()).unwrap();
    let scale = sys.raw.amax();
    for (i, label) in sys.row_labels.iter().enumerate() {
        let RowLabel::Divergence { gamma } = label else { unreachable!() };
        for alpha in 0..basis.len() {
            if (gamma[0] + alpha) % 2 == 1 {
                // ∂^γ of an even function's divergence, odd order, or vice versa
                assert!(sys.raw[(i, alpha)].abs() <= 1e-13 * scale, "γ={gamma:?} α={alpha}");
            }
        }
    }
}

#[test]
fn nesting_in_m_and_n() {
    for b in [presets::trefftz_1d().unwrap(), presets::trefftz_2d().unwrap()] {
        let count = |n: usize, m: usize| {
            build_trefftz_bulk(&b.cfg, n, b.x0, m, b.trefftz_domain, &opts())
                .map(|t| t.n_funcs())
                .unwrap_or(0)
        };
        for n in 1..=5 {
            for m in 0..4 {
                assert!(count(n, m + 1) <= count(n, m), "n={n} m={m}");
                assert!(count(n + 1, m) >= count(n, m), "n={n} m={m}");
            }
        }
    }
}

#[test]
fn serialization_round_trip_and_determinism() {
    let b = presets::trefftz_2d().unwrap();
    let a = bulk(&b);
    let json = a.to_json();
    assert_eq!(json, bulk(&b).to_json());
    let back = TrefftzSet::from_json(&json).unwrap();
    assert_eq!(back, a);
    assert_eq!(back.to_json(), json);
    assert!(TrefftzSet::from_json("{\"dim\": 3}").is_err());
}

#[test]
fn evaluation_consistency() {
    let b = presets::trefftz_2d().unwrap();
    let ts = bulk(&b);
    let h = 1e-5;
    for which in 0..ts.n_funcs() {
        // constant monomial is column 0
        let u0 = evaluate_trefftz(&ts, which, FieldKind::U, &[b.x0]).unwrap()[0][0];
        assert!((u0 - ts.coeffs[which][0]).abs() < 1e-14);
        let p = [0.13, -0.21];
        let e = &evaluate_trefftz(&ts, which, FieldKind::E, &[p]).unwrap()[0];
        for axis in 0..2 {
            let mut pp = p;
            let mut pm = p;
            pp[axis] += h;
            pm[axis] -= h;
            let u = evaluate_trefftz(&ts, which, FieldKind::U, &[pp, pm]).unwrap();
            let fd = -(u[0][0] - u[1][0]) / (2.0 * h);
            assert!((fd - e[axis]).abs() < 1e-6);
        }
        let div = evaluate_trefftz(&ts, which, FieldKind::DivD, &[b.x0]).unwrap()[0][0];
        assert!(div.abs() <= 1e-8 * ts.residual_scale);
    }
}

#[test]
fn bulk_residuals_small() {
    for b in [presets::trefftz_1d().unwrap(), presets::trefftz_2d().unwrap()] {
        let ts = bulk(&b);
        assert!(ts.max_relative_residual() <= 1e-8);
        assert!(ts.dropped_rows.is_empty());
    }
}

fn interface_preset() -> (presets::Interface, TrefftzSet) {
    let p = presets::interface_2d().unwrap();
    let ts =
        build_trefftz_interface_2d(&p.cfg_nl, p.eps_local, p.n_max, p.m, p.p_max, p.x0, p.trefftz_domain, &opts())
            .unwrap();
    (p, ts)
}

#[test]
fn local_interface_contains_global_harmonics() {
    let p = presets::interface_2d().unwrap();
    let cfg0 = ConvConfig { eps_nl: 0.0, ..p.cfg_nl.clone() };
    let ts = build_trefftz_interface_2d(&cfg0, cfg0.eps_loc, 4, p.m, p.p_max, p.x0, p.trefftz_domain, &opts())
        .unwrap();
    let c = coeff_matrix(&ts);
    let harm = harmonic_basis_2d(4, [0.0, 0.0]);
    for (k, h) in harm.iter().enumerate() {
        let mut v = vec![0.0; harm.len()];
        v[k] = 1.0;
        let mono = h.recentered([0.0, 0.0]);
        v.extend(monomial_basis(Dim::Two, 4, [0.0, 0.0]).iter().map(|m| {
            let alpha = m.terms().find(|t| t.1 != 0.0).unwrap().0;
            mono.coeff(alpha)
        }));
        let v = DVector::from_vec(v);
        let proj = c.transpose() * (&c * &v);
        let rel = (&v - proj).norm() / v.norm();
        assert!(rel <= 1e-6, "harmonic {k}: {rel}");
    }
}

#[test]
fn interface_jumps_vanish_through_p_max() {
    let (p, ts) = interface_preset();
    assert!(ts.n_funcs() > 0);
    assert!(ts.max_relative_residual() <= 1e-8);
    let o = [0.0, 0.0];
    for which in 0..ts.n_funcs() {
        let Potential::Glued { local, nonlocal } = ts.potential(which).unwrap() else { unreachable!() };
        for k in 0..=p.p_max {
            let du = local.partial([0, k]).eval(o) - nonlocal.partial([0, k]).eval(o);
            let dl = -p.eps_local * local.partial([1, k]).eval(o);
            let dn = d_field_partial(&p.cfg_nl, &nonlocal, o, 0, [0, k]).unwrap();
            assert!(du.abs() <= 1e-8 * ts.residual_scale, "u jump k={k}: {du}");
            assert!((dl - dn).abs() <= 1e-8 * ts.residual_scale, "D·n jump k={k}: {}", dl - dn);
        }
        // the potential jump along the interface is O(y^{p_max+1})
        let ys = [-0.1, -0.05, 0.0, 0.05, 0.1];
        let jumps: Vec<f64> = ys.iter().map(|&y| (local.eval([0.0, y]) - nonlocal.eval([0.0, y])).abs()).collect();
        let bound = (0..5).map(|k| 0.1f64.powi(k + 3)).sum::<f64>();
        let cn: f64 = ts.coeffs[which].iter().map(|v| v.abs()).sum();
        assert!(jumps.iter().all(|&j| j <= bound * cn));
    }
}

#[test]
fn nonlocal_side_d_not_proportional_to_e() {
    let (p, ts) = interface_preset();
    let pts: Vec<[f64; 2]> = [0.1, 0.25, 0.4]
        .iter()
        .flat_map(|&x| [-0.4, 0.0, 0.4].map(|y| [x, y]))
        .collect();
    let varies = (0..ts.n_funcs()).any(|which| {
        let e = evaluate_trefftz(&ts, which, FieldKind::E, &pts).unwrap();
        let d = evaluate_trefftz(&ts, which, FieldKind::D, &pts).unwrap();
        let ratios: Vec<f64> = e
            .iter()
            .zip(&d)
            .filter(|(e, _)| e[0].abs() > 1e-3)
            .map(|(e, d)| d[0] / e[0])
            .collect();
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, &r| (a.0.min(r), a.1.max(r)));
        ratios.len() >= 2 && (hi - lo) >= 0.1 * lo.abs().max(hi.abs())
    });
    assert!(varies);
    let _ = p;
}

#[test]
fn glued_local_side_uses_local_law() {
    let (p, ts) = interface_preset();
    let q = [-0.2, 0.1];
    for which in 0..ts.n_funcs() {
        let e = &evaluate_trefftz(&ts, which, FieldKind::E, &[q]).unwrap()[0];
        let d = &evaluate_trefftz(&ts, which, FieldKind::D, &[q]).unwrap()[0];
        assert_relative_eq!(d[0], p.eps_local * e[0], epsilon = 1e-14);
        let div = evaluate_trefftz(&ts, which, FieldKind::DivD, &[q]).unwrap()[0][0];
        assert!(div.abs() < 1e-12);
    }
}

#[test]
fn literal_indexing_gives_one_more_function() {
    let b = presets::trefftz_1d().unwrap();
    let literal = TrefftzOptions {
        indexing: ConstraintIndexing::OneThroughM,
        ..opts()
    };
    let ts = build_trefftz_bulk(&b.cfg, b.n_max, b.x0, b.m, b.trefftz_domain, &literal).unwrap();
    assert_eq!(ts.n_funcs(), 4);
}

#[test]
fn padding_covers_kernel() {
    let k = Kernel::gaussian(Dim::One, 0.5).unwrap();
    let dom = padded_conv_domain(&k, Dim::One, &Rect::interval(0.75, 1.25)).unwrap();
    let hull = dom.hull();
    assert_relative_eq!(hull.lo[0], 0.75 - 3.0, epsilon = 1e-12);
    assert_relative_eq!(hull.hi[0], 1.25 + 3.0, epsilon = 1e-12);
    let _ = Polynomial::constant(Dim::One, [0.0, 0.0], 1.0);
}
