//! Dense polynomials in one or two variables, stored about an expansion center.
//!
//! A polynomial of total degree ≤ `degree` is
//!
//! ```text
//! p(x, y) = Σ_{i+j ≤ degree} c_ij (x - x0)^i (y - y0)^j
//! ```
//!
//! with the coefficients kept in graded-lexicographic order: degree by degree,
//! and within a degree from `x^k` down to `y^k`. That order fixes the meaning of
//! every coefficient vector downstream (constraint columns, Trefftz rows).

use serde::{Deserialize, Serialize};

use crate::geometry::{order, Dim, MultiIndex, Point};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    dim: Dim,
    center: Point,
    degree: usize,
    coeffs: Vec<f64>,
}

/// Position of `alpha` in the graded-lexicographic ordering.
pub fn graded_index(dim: Dim, alpha: MultiIndex) -> usize {
    match dim {
        Dim::One => alpha[0],
        Dim::Two => {
            let k = alpha[0] + alpha[1];
            k * (k + 1) / 2 + alpha[1]
        }
    }
}

/// Number of monomials of total degree ≤ `degree`.
pub fn basis_len(dim: Dim, degree: usize) -> usize {
    match dim {
        Dim::One => degree + 1,
        Dim::Two => (degree + 1) * (degree + 2) / 2,
    }
}

/// `n (n-1) ... (n-k+1)`, zero when `k > n`.
fn falling(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    ((n - k + 1)..=n).fold(1.0, |acc, v| acc * v as f64)
}

fn binomial(n: usize, k: usize) -> f64 {
    falling(n, k) / falling(k, k)
}

impl Polynomial {
    pub fn zero(dim: Dim, center: Point, degree: usize) -> Polynomial {
        Polynomial {
            dim,
            center: normalize_point(dim, center),
            degree,
            coeffs: vec![0.0; basis_len(dim, degree)],
        }
    }

    pub fn constant(dim: Dim, center: Point, value: f64) -> Polynomial {
        let mut p = Polynomial::zero(dim, center, 0);
        p.coeffs[0] = value;
        p
    }

    /// `(x - x0)^alpha[0] (y - y0)^alpha[1]`.
    pub fn monomial(dim: Dim, center: Point, alpha: MultiIndex) -> Polynomial {
        let alpha = normalize_index(dim, alpha);
        let mut p = Polynomial::zero(dim, center, order(alpha));
        let idx = graded_index(dim, alpha);
        p.coeffs[idx] = 1.0;
        p
    }

    /// Builds a polynomial from `(alpha, coefficient)` pairs.
    pub fn from_terms(dim: Dim, center: Point, terms: &[(MultiIndex, f64)]) -> Polynomial {
        let degree = terms.iter().map(|(a, _)| order(normalize_index(dim, *a))).max().unwrap_or(0);
        let mut p = Polynomial::zero(dim, center, degree);
        for &(alpha, c) in terms {
            let idx = graded_index(dim, normalize_index(dim, alpha));
            p.coeffs[idx] += c;
        }
        p
    }

    /// Builds a polynomial from a dense graded-lex coefficient vector.
    pub fn from_coeffs(dim: Dim, center: Point, degree: usize, coeffs: Vec<f64>) -> Result<Polynomial> {
        if coeffs.len() != basis_len(dim, degree) {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients for degree {degree}, got {}",
                basis_len(dim, degree),
                coeffs.len()
            )));
        }
        Ok(Polynomial {
            dim,
            center: normalize_point(dim, center),
            degree,
            coeffs,
        })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn center(&self) -> Point {
        self.center
    }

    /// Storage degree (an upper bound on the true degree).
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: MultiIndex) -> f64 {
        let alpha = normalize_index(self.dim, alpha);
        if order(alpha) > self.degree {
            return 0.0;
        }
        self.coeffs[graded_index(self.dim, alpha)]
    }

    /// Iterates `(alpha, c_alpha)` in graded-lex order, including zeros.
    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, f64)> + '_ {
        self.dim
            .multi_indices(self.degree)
            .into_iter()
            .zip(self.coeffs.iter().copied())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Exact evaluation, Horner in each shifted variable.
    pub fn eval(&self, p: Point) -> f64 {
        let dx = p[0] - self.center[0];
        match self.dim {
            Dim::One => self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * dx + c),
            Dim::Two => {
                let dy = p[1] - self.center[1];
                let n = self.degree;
                // p = Σ_i dx^i q_i(dy), q_i(dy) = Σ_j c_ij dy^j
                let mut acc = 0.0;
                for i in (0..=n).rev() {
                    let mut q = 0.0;
                    for j in (0..=(n - i)).rev() {
                        q = q * dy + self.coeffs[graded_index(Dim::Two, [i, j])];
                    }
                    acc = acc * dx + q;
                }
                acc
            }
        }
    }

    /// Exact partial derivative `∂^beta p`.
    pub fn partial(&self, beta: MultiIndex) -> Polynomial {
        let beta = normalize_index(self.dim, beta);
        let b = order(beta);
        if b > self.degree {
            return Polynomial::zero(self.dim, self.center, 0);
        }
        let mut out = Polynomial::zero(self.dim, self.center, self.degree - b);
        for (alpha, c) in self.terms() {
            if c == 0.0 || alpha[0] < beta[0] || alpha[1] < beta[1] {
                continue;
            }
            let f = falling(alpha[0], beta[0]) * falling(alpha[1], beta[1]);
            let target = [alpha[0] - beta[0], alpha[1] - beta[1]];
            out.coeffs[graded_index(self.dim, target)] += c * f;
        }
        out
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.dim.count())
            .map(|axis| self.partial(self.dim.unit(axis)))
            .collect()
    }

    pub fn laplacian(&self) -> Polynomial {
        let mut out = self.partial([2, 0]);
        if self.dim == Dim::Two {
            out = out.add(&self.partial([0, 2]));
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Polynomial {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    /// Sum of two polynomials sharing dimension and center.
    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        assert_eq!(self.center, other.center, "expansion centers differ");
        let degree = self.degree.max(other.degree);
        let mut out = Polynomial::zero(self.dim, self.center, degree);
        for p in [self, other] {
            for (alpha, c) in p.terms() {
                out.coeffs[graded_index(self.dim, alpha)] += c;
            }
        }
        out
    }

    /// `Σ_k weights[k] polys[k]`; all inputs must share dimension and center.
    pub fn linear_combination(polys: &[Polynomial], weights: &[f64]) -> Result<Polynomial> {
        let first = polys
            .first()
            .ok_or_else(|| Error::InvalidInput("empty polynomial list".into()))?;
        if polys.len() != weights.len() {
            return Err(Error::InvalidInput("weights/basis length mismatch".into()));
        }
        let degree = polys.iter().map(|p| p.degree).max().unwrap_or(0);
        let mut out = Polynomial::zero(first.dim, first.center, degree);
        for (p, &w) in polys.iter().zip(weights) {
            if p.dim != first.dim || p.center != first.center {
                return Err(Error::InvalidInput("basis polynomials must share dim and center".into()));
            }
            for (alpha, c) in p.terms() {
                out.coeffs[graded_index(first.dim, alpha)] += w * c;
            }
        }
        Ok(out)
    }

    /// Same polynomial re-expanded about `new_center` (exact binomial shift).
    pub fn recentered(&self, new_center: Point) -> Polynomial {
        let new_center = normalize_point(self.dim, new_center);
        let shift = [new_center[0] - self.center[0], new_center[1] - self.center[1]];
        let mut out = Polynomial::zero(self.dim, new_center, self.degree);
        // (x - c)^i = ((x - c') + s)^i = Σ_a C(i,a) s^{i-a} (x - c')^a
        for (alpha, c) in self.terms() {
            if c == 0.0 {
                continue;
            }
            for a in 0..=alpha[0] {
                let fx = binomial(alpha[0], a) * shift[0].powi((alpha[0] - a) as i32);
                for b in 0..=alpha[1] {
                    let fy = binomial(alpha[1], b) * shift[1].powi((alpha[1] - b) as i32);
                    out.coeffs[graded_index(self.dim, [a, b])] += c * fx * fy;
                }
            }
        }
        out
    }
}

fn normalize_point(dim: Dim, p: Point) -> Point {
    match dim {
        Dim::One => [p[0], 0.0],
        Dim::Two => p,
    }
}

fn normalize_index(dim: Dim, a: MultiIndex) -> MultiIndex {
    match dim {
        Dim::One => [a[0], 0],
        Dim::Two => a,
    }
}

/// All monomials `(x-x0)^i (y-y0)^j` with `i + j ≤ n_max`, graded-lex order.
pub fn monomial_basis(dim: Dim, n_max: usize, center: Point) -> Vec<Polynomial> {
    dim.multi_indices(n_max)
        .into_iter()
        .map(|alpha| Polynomial::monomial(dim, center, alpha))
        .collect()
}

/// `{1} ∪ {Re (z-z0)^k, Im (z-z0)^k : 1 ≤ k ≤ n_max}`, `2 n_max + 1` harmonic polynomials.
pub fn harmonic_basis_2d(n_max: usize, center: Point) -> Vec<Polynomial> {
    let mut out = vec![Polynomial::constant(Dim::Two, center, 1.0)];
    for k in 1..=n_max {
        // (dx + i dy)^k = Σ_j C(k,j) dx^{k-j} i^j dy^j
        let mut re = Vec::new();
        let mut im = Vec::new();
        for j in 0..=k {
            let c = binomial(k, j);
            let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if j % 2 == 0 {
                re.push(([k - j, j], sign * c));
            } else {
                im.push(([k - j, j], sign * c));
            }
        }
        out.push(Polynomial::from_terms(Dim::Two, center, &re));
        out.push(Polynomial::from_terms(Dim::Two, center, &im));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_eval(p: &Polynomial, x: Point) -> f64 {
        p.terms()
            .map(|(a, c)| {
                c * (x[0] - p.center()[0]).powi(a[0] as i32) * (x[1] - p.center()[1]).powi(a[1] as i32)
            })
            .sum()
    }

    #[test]
    fn monomial_basis_counts_and_order() {
        let b = monomial_basis(Dim::One, 4, [1.0, 0.0]);
        assert_eq!(b.len(), 5);
        for (k, p) in b.iter().enumerate() {
            assert_eq!(p.eval([3.0, 0.0]), 2f64.powi(k as i32));
        }
        let b2 = monomial_basis(Dim::Two, 1, [0.0, 0.0]);
        assert_eq!(b2.len(), 3);
        assert_eq!(b2[1].eval([2.0, 5.0]), 2.0);
        assert_eq!(b2[2].eval([2.0, 5.0]), 5.0);
        assert_eq!(monomial_basis(Dim::Two, 4, [0.0, 0.0]).len(), 15);
    }

    #[test]
    fn harmonic_basis_low_order() {
        let h = harmonic_basis_2d(2, [0.0, 0.0]);
        assert_eq!(h.len(), 5);
        let p = [1.3, -0.7];
        let (x, y) = (p[0], p[1]);
        let expect = [1.0, x, y, x * x - y * y, 2.0 * x * y];
        for (poly, e) in h.iter().zip(expect) {
            assert!((poly.eval(p) - e).abs() < 1e-14);
        }
        assert_eq!(harmonic_basis_2d(4, [0.0, 0.0]).len(), 9);
    }

    #[test]
    fn harmonic_basis_laplacian_is_exactly_zero() {
        for p in harmonic_basis_2d(6, [0.3, -1.2]) {
            assert!(p.laplacian().coeffs().iter().all(|&c| c == 0.0));
        }
    }

    #[test]
    fn eval_examples() {
        let p = Polynomial::monomial(Dim::One, [1.0, 0.0], [2, 0]);
        assert_eq!(p.eval([3.0, 0.0]), 4.0);
        assert_eq!(Polynomial::zero(Dim::Two, [0.0, 0.0], 3).eval([1.0, 2.0]), 0.0);
    }

    #[test]
    fn partial_examples() {
        let p = Polynomial::monomial(Dim::One, [1.0, 0.0], [3, 0]);
        let d = p.partial([1, 0]);
        assert_eq!(d.coeff([2, 0]), 3.0);
        assert_eq!(d.degree(), 2);

        let h = Polynomial::from_terms(Dim::Two, [0.0, 0.0], &[([2, 0], 1.0), ([0, 2], -1.0)]);
        assert!(h.partial([1, 1]).is_zero());
        assert!(h.partial([3, 0]).is_zero());
    }

    #[test]
    fn gradient_examples() {
        let u = Polynomial::monomial(Dim::One, [1.0, 0.0], [2, 0]);
        let g = u.gradient();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].eval([4.0, 0.0]), 6.0);

        let u = Polynomial::from_terms(Dim::Two, [0.0, 0.0], &[([1, 1], 2.0)]);
        let g = u.gradient();
        assert_eq!(g[0].eval([3.0, 5.0]), 10.0);
        assert_eq!(g[1].eval([3.0, 5.0]), 6.0);

        let c = Polynomial::constant(Dim::Two, [0.0, 0.0], 7.0);
        assert!(c.gradient().iter().all(Polynomial::is_zero));
    }

    #[test]
    fn serialization_is_stable() {
        let a = serde_json::to_string(&monomial_basis(Dim::Two, 3, [0.5, 0.25])).unwrap();
        let b = serde_json::to_string(&monomial_basis(Dim::Two, 3, [0.5, 0.25])).unwrap();
        assert_eq!(a, b);
    }

    fn arb_poly2() -> impl Strategy<Value = Polynomial> {
        (prop::collection::vec(-2.0..2.0f64, 15), -1.0..1.0f64, -1.0..1.0f64).prop_map(|(c, x0, y0)| {
            Polynomial::from_coeffs(Dim::Two, [x0, y0], 4, c).unwrap()
        })
    }

    proptest! {
        #[test]
        fn eval_matches_naive_sum(p in arb_poly2(), x in -2.0..2.0f64, y in -2.0..2.0f64) {
            let a = p.eval([x, y]);
            let b = naive_eval(&p, [x, y]);
            let scale = p.terms().map(|(_, c)| c.abs()).sum::<f64>() * 81.0 + 1.0;
            prop_assert!((a - b).abs() <= 1e-14 * scale);
        }

        #[test]
        fn derivative_matches_finite_difference(p in arb_poly2(), x in -1.0..1.0f64, y in -1.0..1.0f64) {
            let h = 1e-5;
            for axis in 0..2 {
                let mut xp = [x, y];
                let mut xm = [x, y];
                xp[axis] += h;
                xm[axis] -= h;
                let fd = (p.eval(xp) - p.eval(xm)) / (2.0 * h);
                let exact = p.partial(Dim::Two.unit(axis)).eval([x, y]);
                prop_assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()));
            }
        }

        #[test]
        fn recentering_preserves_values(p in arb_poly2(), cx in -1.0..1.0f64, cy in -1.0..1.0f64, x in -1.0..1.0f64, y in -1.0..1.0f64) {
            let q = p.recentered([cx, cy]);
            prop_assert!((p.eval([x, y]) - q.eval([x, y])).abs() <= 1e-11 * (1.0 + p.eval([x, y]).abs()) * 100.0);
        }
    }
}
