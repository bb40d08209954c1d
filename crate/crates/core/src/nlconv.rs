//! Restricted-domain convolution and the nonlocal displacement field.
//!
//! ```text
//! (K *_Ω f)(x) = ∫_Ω K(x - x') f(x') dx'
//! D(x)         = eps_loc E(x) + eps_nl (K *_Ω E)(x),     E = -∇u
//! ```
//!
//! Ω is fixed, so derivatives in `x` always act on the kernel:
//! `∂^β (K *_Ω f) = (∂^β K) *_Ω f`. Moving them onto `f` would drop the boundary
//! terms that make restricted convolution differ from the whole-space one.

use serde::{Deserialize, Serialize};

use crate::geometry::{add_index, Dim, MultiIndex, Point, Rect};
use crate::kernels::{gaussian_derivative_1d, Kernel, KernelKind};
use crate::numerics::reference_rule;
use crate::polynomials::Polynomial;
use crate::{Error, Result};

pub const DEFAULT_QUAD_POINTS_PER_SIGMA: usize = 12;

/// Union of pairwise disjoint axis-aligned boxes (intervals in 1D).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvDomain {
    pub dim: Dim,
    pub boxes: Vec<Rect>,
}

impl ConvDomain {
    pub fn new(dim: Dim, boxes: Vec<Rect>) -> Result<ConvDomain> {
        let d = ConvDomain { dim, boxes };
        d.validate()?;
        Ok(d)
    }

    pub fn single(dim: Dim, r: Rect) -> Result<ConvDomain> {
        ConvDomain::new(dim, vec![r])
    }

    pub fn interval(a: f64, b: f64) -> Result<ConvDomain> {
        ConvDomain::new(Dim::One, vec![Rect::interval(a, b)])
    }

    pub fn validate(&self) -> Result<()> {
        if self.boxes.is_empty() {
            return Err(Error::InvalidInput("convolution domain has no boxes".into()));
        }
        for b in &self.boxes {
            b.validate(self.dim)?;
        }
        for (i, a) in self.boxes.iter().enumerate() {
            for b in &self.boxes[i + 1..] {
                if a.intersect(self.dim, b).is_some() {
                    return Err(Error::InvalidInput(format!("overlapping boxes {a:?} and {b:?}")));
                }
            }
        }
        Ok(())
    }

    pub fn measure(&self) -> f64 {
        self.boxes.iter().map(|b| b.measure(self.dim)).sum()
    }

    pub fn translate(&self, shift: Point) -> ConvDomain {
        ConvDomain {
            dim: self.dim,
            boxes: self.boxes.iter().map(|b| b.translate(self.dim, shift)).collect(),
        }
    }

    /// Smallest box containing every component.
    pub fn hull(&self) -> Rect {
        let mut h = self.boxes[0];
        for b in &self.boxes[1..] {
            for i in 0..2 {
                h.lo[i] = h.lo[i].min(b.lo[i]);
                h.hi[i] = h.hi[i].max(b.hi[i]);
            }
        }
        h
    }

    pub fn contains(&self, p: Point) -> bool {
        self.boxes.iter().any(|b| b.contains(self.dim, p))
    }
}

/// Constitutive configuration `D = eps_loc E + eps_nl K *_Ω E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvConfig {
    pub eps_loc: f64,
    pub eps_nl: f64,
    pub kernel: Kernel,
    pub conv_domain: ConvDomain,
    pub quad_points_per_sigma: usize,
}

impl ConvConfig {
    pub fn new(eps_loc: f64, eps_nl: f64, kernel: Kernel, conv_domain: ConvDomain) -> Result<ConvConfig> {
        let cfg = ConvConfig {
            eps_loc,
            eps_nl,
            kernel,
            conv_domain,
            quad_points_per_sigma: DEFAULT_QUAD_POINTS_PER_SIGMA,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn dim(&self) -> Dim {
        self.conv_domain.dim
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_loc > 0.0 && self.eps_loc.is_finite()) {
            return Err(Error::InvalidInput(format!("eps_loc must be positive, got {}", self.eps_loc)));
        }
        if !(self.eps_nl >= 0.0 && self.eps_nl.is_finite()) {
            return Err(Error::InvalidInput(format!("eps_nl must be non-negative, got {}", self.eps_nl)));
        }
        if self.quad_points_per_sigma < 4 {
            return Err(Error::InvalidInput("quad_points_per_sigma must be at least 4".into()));
        }
        if self.kernel.dim != self.conv_domain.dim {
            return Err(Error::InvalidInput("kernel and domain dimensions differ".into()));
        }
        self.kernel.validate()?;
        self.conv_domain.validate()
    }

    /// Same configuration with the convolution domain replaced.
    pub fn with_domain(&self, conv_domain: ConvDomain) -> ConvConfig {
        ConvConfig {
            conv_domain,
            ..self.clone()
        }
    }

    pub fn translated(&self, shift: Point) -> ConvConfig {
        self.with_domain(self.conv_domain.translate(shift))
    }

    /// `eps_loc + eps_nl (K *_Ω 1)(x)`: the response a uniform field sees at `x`.
    pub fn effective_permittivity(&self, x: Point) -> Result<f64> {
        let one = Polynomial::constant(self.dim(), x, 1.0);
        Ok(self.eps_loc + self.eps_nl * conv_restricted_with(self, &one, x, [0, 0])?)
    }
}

/// `M_p = ∫_a^b K^{(d)}(x - x') (x' - c)^p dx'` for `p = 0..=p_max`, Gaussian `K`,
/// panels of width ≤ σ with `points` Gauss-Legendre nodes each.
pub fn gaussian_moments_1d(
    sigma: f64,
    d: usize,
    x: f64,
    (a, b): (f64, f64),
    c: f64,
    p_max: usize,
    points: usize,
) -> Vec<f64> {
    let mut out = vec![0.0; p_max + 1];
    let panels = ((b - a) / sigma).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    let rule = reference_rule(points);
    let (nodes, weights) = (&rule.0, &rule.1);
    for k in 0..panels {
        let lo = a + k as f64 * width;
        let mid = lo + 0.5 * width;
        let half = 0.5 * width;
        for (t, w) in nodes.iter().zip(weights) {
            let xp = mid + half * t;
            let kw = half * w * gaussian_derivative_1d(sigma, d, x - xp);
            let s = xp - c;
            let mut pw = 1.0;
            for m in out.iter_mut() {
                *m += kw * pw;
                pw *= s;
            }
        }
    }
    out
}

/// `∂^β_x ∫_dom K(x - x') f(x') dx'`.
///
/// Gaussian kernels use panel Gauss-Legendre quadrature (tensorised over each
/// box through separability); polynomial test kernels are integrated exactly.
pub fn conv_restricted(
    kernel: &Kernel,
    f: &Polynomial,
    dom: &ConvDomain,
    x: Point,
    beta: MultiIndex,
    quad_points_per_sigma: usize,
) -> Result<f64> {
    if f.dim() != dom.dim || kernel.dim != dom.dim {
        return Err(Error::InvalidInput("kernel, polynomial and domain dimensions must agree".into()));
    }
    if !x[..dom.dim.count()].iter().all(|v| v.is_finite()) {
        return Err(Error::Domain("non-finite evaluation point".into()));
    }
    match &kernel.kind {
        KernelKind::Gaussian { sigma } => {
            if beta[0].max(beta[1]) > crate::kernels::MAX_GAUSSIAN_ORDER {
                return Err(Error::Unsupported("Gaussian derivative order too high".into()));
            }
            Ok(gaussian_conv(*sigma, f, dom, x, beta, quad_points_per_sigma))
        }
        KernelKind::PolyTest { poly } => {
            if beta[1] != 0 {
                return Err(Error::InvalidInput("1D kernel has no y derivative".into()));
            }
            Ok(poly_conv_exact(poly, f, dom, x[0], beta[0]))
        }
        KernelKind::Yukawa { .. } => Err(Error::Unsupported(
            "restricted convolution with the singular Yukawa kernel".into(),
        )),
    }
}

fn conv_restricted_with(cfg: &ConvConfig, f: &Polynomial, x: Point, beta: MultiIndex) -> Result<f64> {
    conv_restricted(&cfg.kernel, f, &cfg.conv_domain, x, beta, cfg.quad_points_per_sigma)
}

fn gaussian_conv(sigma: f64, f: &Polynomial, dom: &ConvDomain, x: Point, beta: MultiIndex, points: usize) -> f64 {
    let n = f.degree();
    let c = f.center();
    let mut total = 0.0;
    for b in &dom.boxes {
        let mx = gaussian_moments_1d(sigma, beta[0], x[0], (b.lo[0], b.hi[0]), c[0], n, points);
        match dom.dim {
            Dim::One => {
                total += f.terms().map(|(a, coef)| coef * mx[a[0]]).sum::<f64>();
            }
            Dim::Two => {
                let my = gaussian_moments_1d(sigma, beta[1], x[1], (b.lo[1], b.hi[1]), c[1], n, points);
                total += f.terms().map(|(a, coef)| coef * mx[a[0]] * my[a[1]]).sum::<f64>();
            }
        }
    }
    total
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact `∫_dom q^{(β)}(x - x') f(x') dx'` for a polynomial kernel `q`.
fn poly_conv_exact(kernel_poly: &Polynomial, f: &Polynomial, dom: &ConvDomain, x: f64, beta: usize) -> f64 {
    let q = kernel_poly.partial([beta, 0]);
    let s = x - q.center()[0];
    // q(x - x') = Σ_k a_k (s - x')^k  →  coefficients of x'^l
    let mut g = vec![0.0; q.degree() + 1];
    for (alpha, a) in q.terms() {
        let k = alpha[0];
        for (l, gl) in g.iter_mut().enumerate().take(k + 1) {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            *gl += a * binomial(k, l) * s.powi((k - l) as i32) * sign;
        }
    }
    let fg = f.recentered([0.0, 0.0]);
    let fc: Vec<f64> = fg.coeffs().to_vec();
    let mut h = vec![0.0; g.len() + fc.len() - 1];
    for (l, gl) in g.iter().enumerate() {
        for (m, fm) in fc.iter().enumerate() {
            h[l + m] += gl * fm;
        }
    }
    dom.boxes
        .iter()
        .map(|b| {
            let (lo, hi) = (b.lo[0], b.hi[0]);
            h.iter()
                .enumerate()
                .map(|(p, hp)| hp * (hi.powi(p as i32 + 1) - lo.powi(p as i32 + 1)) / (p as f64 + 1.0))
                .sum::<f64>()
        })
        .sum()
}

/// Closed form of `∫_a^b exp(-(x - x')²/2σ²) (x' - c)^p dx'` (erf plus boundary terms).
///
/// Independent of the quadrature path; infinite bounds are allowed.
pub fn conv_gaussian_analytic(sigma: f64, power: usize, c: f64, (a, b): (f64, f64), x: f64) -> Result<f64> {
    if power > 8 {
        return Err(Error::Unsupported("analytic Gaussian moments limited to power ≤ 8".into()));
    }
    if !(sigma > 0.0) || !(a < b) {
        return Err(Error::InvalidInput("need sigma > 0 and a < b".into()));
    }
    let sa = (a - x) / sigma;
    let sb = (b - x) / sigma;
    let jm = incomplete_gaussian_moments(sa, sb, power);
    let h = x - c;
    // (x' - c) = σ s + h
    let mut total = 0.0;
    for (k, j) in jm.iter().enumerate() {
        total += binomial(power, k) * sigma.powi(k as i32) * h.powi((power - k) as i32) * j;
    }
    Ok(sigma * total)
}

/// `J_k = ∫_{sa}^{sb} s^k exp(-s²/2) ds` for `k = 0..=k_max`.
fn incomplete_gaussian_moments(sa: f64, sb: f64, k_max: usize) -> Vec<f64> {
    let root_half_pi = (std::f64::consts::PI / 2.0).sqrt();
    let r2 = std::f64::consts::SQRT_2;
    let j0 = if sa >= 0.0 {
        root_half_pi * (libm::erfc(sa / r2) - libm::erfc(sb / r2))
    } else if sb <= 0.0 {
        root_half_pi * (libm::erfc(-sb / r2) - libm::erfc(-sa / r2))
    } else {
        root_half_pi * (libm::erf(sb / r2) - libm::erf(sa / r2))
    };
    // boundary term s^k exp(-s²/2), zero at ±∞
    let edge = |s: f64, k: usize| -> f64 {
        if s.is_finite() {
            s.powi(k as i32) * (-0.5 * s * s).exp()
        } else {
            0.0
        }
    };
    let mut j = vec![0.0; k_max + 1];
    j[0] = j0;
    if k_max >= 1 {
        j[1] = edge(sa, 0) - edge(sb, 0);
    }
    for k in 2..=k_max {
        j[k] = (k - 1) as f64 * j[k - 2] + edge(sa, k - 1) - edge(sb, k - 1);
    }
    j
}

/// `∂^β D_i(x)` for the potential `u`, component `i`.
pub fn d_field_partial(cfg: &ConvConfig, u: &Polynomial, x: Point, component: usize, beta: MultiIndex) -> Result<f64> {
    if u.dim() != cfg.dim() {
        return Err(Error::InvalidInput("potential and configuration dimensions differ".into()));
    }
    let e = u.partial(cfg.dim().unit(component)).scaled(-1.0);
    let local = cfg.eps_loc * e.partial(beta).eval(x);
    if cfg.eps_nl == 0.0 || e.is_zero() {
        return Ok(local);
    }
    Ok(local + cfg.eps_nl * conv_restricted_with(cfg, &e, x, beta)?)
}

/// `D(x) = eps_loc E(x) + eps_nl (K *_Ω E)(x)` with `E = -∇u`.
pub fn d_field(cfg: &ConvConfig, u: &Polynomial, x: Point) -> Result<Vec<f64>> {
    (0..cfg.dim().count())
        .map(|i| d_field_partial(cfg, u, x, i, [0, 0]))
        .collect()
}

/// `∂^γ (∇·D)(x0)`.
pub fn div_d_derivative(cfg: &ConvConfig, u: &Polynomial, x0: Point, gamma: MultiIndex) -> Result<f64> {
    let dim = cfg.dim();
    (0..dim.count())
        .map(|i| d_field_partial(cfg, u, x0, i, add_index(gamma, dim.unit(i))))
        .sum()
}
