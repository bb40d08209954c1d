//! Quadrature rules and small dense linear algebra.
//!
//! Singular value decompositions come from `nalgebra`; the contract here is the
//! tolerance policy: a singular value `s` counts as zero iff `s ≤ rel_tol · s_max`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::geometry::{Dim, Point};
use crate::{Error, Result};

/// Default relative singular-value cutoff.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

const CACHED_RULES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub dim: Dim,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    /// Polynomial exactness degree.
    pub order: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

/// Nodes and weights on `[-1, 1]` (Newton iteration on the Legendre recurrence).
fn compute_reference_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            x = 0.0;
            dp = 1.0;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Cached Gauss-Legendre rule on `[-1, 1]`.
pub fn reference_rule(n: usize) -> std::borrow::Cow<'static, (Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    if (1..=CACHED_RULES).contains(&n) {
        let cache = CACHE.get_or_init(|| (1..=CACHED_RULES).map(compute_reference_rule).collect());
        std::borrow::Cow::Borrowed(&cache[n - 1])
    } else {
        std::borrow::Cow::Owned(compute_reference_rule(n))
    }
}

/// `n_points`-point Gauss-Legendre rule mapped to `[a, b]`; exact to degree `2 n - 1`.
pub fn gauss_legendre(n_points: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if n_points == 0 {
        return Err(Error::InvalidInput("at least one quadrature point required".into()));
    }
    if !(a < b) {
        return Err(Error::InvalidInput(format!("empty interval [{a}, {b}]")));
    }
    let rule = reference_rule(n_points);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    Ok(QuadratureRule {
        dim: Dim::One,
        nodes: rule.0.iter().map(|&t| [mid + half * t, 0.0]).collect(),
        weights: rule.1.iter().map(|&w| half * w).collect(),
        order: 2 * n_points - 1,
    })
}

/// Tensor product of two 1D rules (x from `rx`, y from `ry`).
pub fn tensor_rule(rx: &QuadratureRule, ry: &QuadratureRule) -> Result<QuadratureRule> {
    if rx.dim != Dim::One || ry.dim != Dim::One {
        return Err(Error::InvalidInput("tensor_rule expects two 1D rules".into()));
    }
    let mut nodes = Vec::with_capacity(rx.len() * ry.len());
    let mut weights = Vec::with_capacity(rx.len() * ry.len());
    for (px, wx) in rx.nodes.iter().zip(&rx.weights) {
        for (py, wy) in ry.nodes.iter().zip(&ry.weights) {
            nodes.push([px[0], py[0]]);
            weights.push(wx * wy);
        }
    }
    Ok(QuadratureRule {
        dim: Dim::Two,
        nodes,
        weights,
        order: rx.order.min(ry.order),
    })
}

fn padded_svd(a: &DMatrix<f64>) -> nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn> {
    let (m, n) = a.shape();
    let rows = m.max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (m, n)).copy_from(a);
    padded.svd(false, true)
}

/// Singular values of `a`, descending.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Orthonormal basis (as columns) of `{c : A c = 0}`.
pub fn null_space(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let svd = padded_svd(a);
    let s = &svd.singular_values;
    let s_max = s.iter().copied().fold(0.0, f64::max);
    if s_max == 0.0 {
        return DMatrix::identity(n, n);
    }
    let v_t = svd.v_t.expect("requested V^T");
    let null: Vec<usize> = (0..n).filter(|&i| s[i] <= rel_tol * s_max).collect();
    let mut out = DMatrix::zeros(n, null.len());
    for (k, &i) in null.iter().enumerate() {
        out.set_column(k, &v_t.row(i).transpose());
    }
    out
}

/// Numerical rank under the same tolerance policy as [`null_space`].
pub fn numerical_rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(a);
    match s.first() {
        Some(&s_max) if s_max > 0.0 => s.iter().filter(|&&v| v > rel_tol * s_max).count(),
        _ => 0,
    }
}

/// A basis of the column space of `basis` that depends only on the spanned
/// subspace: Gram-Schmidt on the projector columns `P e_1, P e_2, ...`.
///
/// The first canonical vector is `e_j` itself whenever `e_j` lies in the span
/// and all earlier unit vectors are orthogonal to it.
pub fn canonical_basis(basis: &DMatrix<f64>) -> DMatrix<f64> {
    canonical_basis_with_seeds(basis, &[])
}

/// As [`canonical_basis`], but any `seeds` lying in the span come first.
pub fn canonical_basis_with_seeds(basis: &DMatrix<f64>, seeds: &[DVector<f64>]) -> DMatrix<f64> {
    let (n, k) = basis.shape();
    if k == 0 {
        return DMatrix::zeros(n, 0);
    }
    let projector = basis * basis.transpose();
    let mut accepted: Vec<DVector<f64>> = Vec::with_capacity(k);
    let orthogonalize = |v: &mut DVector<f64>, accepted: &[DVector<f64>]| {
        for _ in 0..2 {
            for q in accepted {
                let d = q.dot(v);
                v.axpy(-d, q, 1.0);
            }
        }
    };
    for s in seeds {
        let norm = s.norm();
        if norm == 0.0 || accepted.len() == k {
            continue;
        }
        if (&projector * s - s).norm() > 1e-8 * norm {
            continue;
        }
        let mut v = s.clone();
        orthogonalize(&mut v, &accepted);
        if v.norm() > 0.5 * norm {
            let vn = v.norm();
            accepted.push(v / vn);
        }
    }
    // n τ² < 1 guarantees k vectors in total (a missing direction would need
    // projector trace below one).
    let threshold = 0.5 / (n as f64).sqrt();
    for j in 0..n {
        if accepted.len() == k {
            break;
        }
        let mut v: DVector<f64> = projector.column(j).into_owned();
        orthogonalize(&mut v, &accepted);
        let norm = v.norm();
        if norm > threshold {
            accepted.push(v / norm);
        }
    }
    if accepted.len() < k {
        return basis.clone();
    }
    DMatrix::from_columns(&accepted)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresFit {
    pub coeffs: Vec<f64>,
    /// `sqrt(Σ w_i (B c - t)_i²)`
    pub residual: f64,
}

/// Minimal-norm minimiser of `Σ_i w_i (Σ_j B_ij c_j - t_i)²` via the SVD pseudo-inverse.
pub fn least_squares_fit(
    basis_samples: &DMatrix<f64>,
    target: &[f64],
    weights: &[f64],
    rel_tol: f64,
) -> Result<LeastSquaresFit> {
    let (nq, nb) = basis_samples.shape();
    if target.len() != nq || weights.len() != nq {
        return Err(Error::InvalidInput(format!(
            "sample count mismatch: basis {nq}, target {}, weights {}",
            target.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidInput("weights must be positive".into()));
    }
    let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let tw = DVector::from_iterator(nq, target.iter().zip(&sw).map(|(t, s)| t * s));
    if nb == 0 {
        return Ok(LeastSquaresFit {
            coeffs: Vec::new(),
            residual: tw.norm(),
        });
    }
    let mut bw = basis_samples.clone();
    for (i, s) in sw.iter().enumerate() {
        bw.row_mut(i).scale_mut(*s);
    }
    let svd = bw.clone().svd(true, true);
    let s_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let coeffs = if s_max == 0.0 {
        DVector::zeros(nb)
    } else {
        let u = svd.u.as_ref().expect("requested U");
        let v_t = svd.v_t.as_ref().expect("requested V^T");
        let mut c = DVector::zeros(nb);
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s > rel_tol * s_max {
                let proj = u.column(i).dot(&tw) / s;
                c += v_t.row(i).transpose() * proj;
            }
        }
        c
    };
    let resid = &bw * &coeffs - &tw;
    Ok(LeastSquaresFit {
        coeffs: coeffs.iter().copied().collect(),
        residual: resid.norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_rule() {
        let r = gauss_legendre(2, -1.0, 1.0).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r.nodes[0][0] + s).abs() < 1e-15);
        assert!((r.nodes[1][0] - s).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15 && (r.weights[1] - 1.0).abs() < 1e-15);
        assert!((r.integrate(|p| p[0] * p[0]) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.order, 3);
    }

    #[test]
    fn weights_sum_to_length() {
        let r = gauss_legendre(7, 0.0, 2.0).unwrap();
        assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(gauss_legendre(3, 1.0, 1.0).is_err());
    }

    #[test]
    fn one_point_rule_is_midpoint() {
        let r = gauss_legendre(1, 2.0, 4.0).unwrap();
        assert_eq!(r.nodes, vec![[3.0, 0.0]]);
        assert_eq!(r.weights, vec![2.0]);
    }

    #[test]
    fn exactness_up_to_order() {
        for n in 1..=40 {
            let r = gauss_legendre(n, -0.5, 1.5).unwrap();
            for k in 0..=r.order {
                let exact = (1.5f64.powi(k as i32 + 1) - (-0.5f64).powi(k as i32 + 1)) / (k as f64 + 1.0);
                let got = r.integrate(|p| p[0].powi(k as i32));
                assert!((got - exact).abs() <= 1e-12 * exact.abs().max(1.0), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn tensor_rule_examples() {
        let r = gauss_legendre(2, -1.0, 1.0).unwrap();
        let t = tensor_rule(&r, &r).unwrap();
        assert_eq!(t.len(), 4);
        assert!((t.weights.iter().sum::<f64>() - 4.0).abs() < 1e-13);
        assert!((t.integrate(|p| p[0] * p[0] * p[1] * p[1]) - 4.0 / 9.0).abs() < 1e-14);
        let t2 = tensor_rule(&gauss_legendre(3, 0.0, 1.0).unwrap(), &gauss_legendre(5, 0.0, 2.0).unwrap()).unwrap();
        assert_eq!(t2.len(), 15);
        assert_eq!(t2.order, 5);
    }

    #[test]
    fn null_space_examples() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let n = null_space(&a, 1e-9);
        assert_eq!(n.ncols(), 2);
        assert!((&a * &n).norm() <= 1e-12);
        let z = DMatrix::<f64>::zeros(2, 3);
        assert_eq!(null_space(&z, 1e-9).ncols(), 3);
    }

    #[test]
    fn canonical_basis_prefers_unit_vectors() {
        // span{e0, (e1+e2)/√2}, given in a rotated form
        let mut b = DMatrix::zeros(3, 2);
        let r = 0.5f64.sqrt();
        b.set_column(0, &DVector::from_vec(vec![r, 0.5, 0.5]));
        b.set_column(1, &DVector::from_vec(vec![r, -0.5, -0.5]));
        let c = canonical_basis(&b);
        assert!((c[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((c[(1, 1)] - r).abs() < 1e-14 && (c[(2, 1)] - r).abs() < 1e-14);
    }

    #[test]
    fn least_squares_examples() {
        let b = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        let fit = least_squares_fit(&b, &[2.0, 4.0, 6.0], &[1.0, 1.0, 1.0], 1e-9).unwrap();
        assert!(fit.residual <= 1e-10 * 56f64.sqrt());
        assert!((fit.coeffs[0] - 2.0).abs() < 1e-12);

        let empty = DMatrix::<f64>::zeros(3, 0);
        let fit = least_squares_fit(&empty, &[1.0, 2.0, 2.0], &[1.0, 1.0, 4.0], 1e-9).unwrap();
        assert!(fit.coeffs.is_empty());
        assert!((fit.residual - 21f64.sqrt()).abs() < 1e-14);

        let t = [1.0, -1.0, 0.5, 2.0];
        let single = DMatrix::from_row_slice(4, 1, &[1.0, 0.3, -0.2, 1.1]);
        let dup = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, 0.3, 0.3, -0.2, -0.2, 1.1, 1.1]);
        let w = [1.0, 2.0, 0.5, 1.0];
        let a = least_squares_fit(&single, &t, &w, 1e-9).unwrap();
        let b = least_squares_fit(&dup, &t, &w, 1e-9).unwrap();
        assert!((a.residual - b.residual).abs() < 1e-13);
        assert!((b.coeffs[0] - b.coeffs[1]).abs() < 1e-12, "minimal norm splits evenly");
        assert!(least_squares_fit(&single, &t, &[1.0, 0.0, 1.0, 1.0], 1e-9).is_err());
    }
}
