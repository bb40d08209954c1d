//! 1D two-point problem for a nonlocal medium with a local inclusion.
//!
//! On `Ω = (a, b)` with no free charge `D` is constant. `E` is taken piecewise
//! constant on a uniform grid and collocated at cell midpoints:
//!
//! ```text
//! eps_loc E(x_i) + eps_nl Σ_j E_j ∫_{cell_j ∩ dom} K(x_i - x') dx' = D
//! Σ_j E_j h = u(a) - u(b)
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::geometry::{Dim, Rect};
use crate::kernels::{Kernel, KernelKind};
use crate::nlconv::{conv_gaussian_analytic, conv_restricted, ConvDomain, DEFAULT_QUAD_POINTS_PER_SIGMA};
use crate::numerics::singular_values;
use crate::polynomials::Polynomial;
use crate::{Error, Result};

/// Which part of `Ω` the convolution integrates over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvVariant {
    /// `dom = Ω`
    WholeDomain,
    /// `dom = Ω \ Ω_l`
    NonlocalOnly,
}

/// Where the nonlocal term enters the constitutive law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ApplyConvIn {
    /// At every collocation point of `Ω`.
    #[default]
    Everywhere,
    /// Only at points outside `Ω_l`; inside, `D = eps_loc E`.
    NonlocalRegionOnly,
}

impl ConvVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            ConvVariant::WholeDomain => "whole_domain",
            ConvVariant::NonlocalOnly => "nonlocal_only",
        }
    }
}

impl ApplyConvIn {
    pub fn as_str(self) -> &'static str {
        match self {
            ApplyConvIn::Everywhere => "everywhere",
            ApplyConvIn::NonlocalRegionOnly => "nonlocal_region_only",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvpConfig {
    pub domain: (f64, f64),
    pub local_region: (f64, f64),
    pub kernel: Kernel,
    pub eps_loc: f64,
    pub eps_nl: f64,
    pub variant: ConvVariant,
    pub apply_conv_in: ApplyConvIn,
    pub n_cells: usize,
    pub u_a: f64,
    pub u_b: f64,
}

pub const MIN_CELLS: usize = 16;

impl BvpConfig {
    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.domain;
        let (c, d) = self.local_region;
        if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()) {
            return Err(Error::InvalidInput("non-finite interval endpoint".into()));
        }
        if !(a < c && c < d && d < b) {
            return Err(Error::InvalidInput(format!(
                "need a < c < d < b, got ({a}, {b}) and ({c}, {d})"
            )));
        }
        if self.n_cells < MIN_CELLS {
            return Err(Error::InvalidInput(format!("n_cells must be ≥ {MIN_CELLS}")));
        }
        if !(self.eps_loc > 0.0) || !(self.eps_nl >= 0.0) || !self.eps_nl.is_finite() || !self.eps_loc.is_finite() {
            return Err(Error::InvalidInput("need eps_loc > 0 and eps_nl ≥ 0".into()));
        }
        if !(self.u_a.is_finite() && self.u_b.is_finite()) {
            return Err(Error::InvalidInput("non-finite boundary value".into()));
        }
        if self.kernel.dim != Dim::One {
            return Err(Error::InvalidInput("BVP kernel must be 1D".into()));
        }
        self.kernel.validate()
    }

    pub fn h(&self) -> f64 {
        (self.domain.1 - self.domain.0) / self.n_cells as f64
    }

    /// Local-region endpoints moved to the nearest cell edges.
    pub fn snapped_local_region(&self) -> (f64, f64) {
        let (a, _) = self.domain;
        let h = self.h();
        let snap = |x: f64| {
            let k = ((x - a) / h).round().clamp(1.0, (self.n_cells - 1) as f64);
            a + k * h
        };
        (snap(self.local_region.0), snap(self.local_region.1))
    }

    pub fn with_cells(&self, n_cells: usize) -> BvpConfig {
        BvpConfig {
            n_cells,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvpSolution {
    pub midpoints: Vec<f64>,
    pub e: Vec<f64>,
    /// `n_cells + 1` node values.
    pub nodes: Vec<f64>,
    pub u: Vec<f64>,
    pub d: f64,
    /// `‖A x - rhs‖_∞` of the discrete system.
    pub residual: f64,
    /// `min |U_ii| / max |U_ii|` of the LU factor.
    pub pivot_ratio: f64,
    /// Local region after grid snapping.
    pub local_region: (f64, f64),
    pub snapped: bool,
}

fn cell_integral(kernel: &Kernel, lo: f64, hi: f64, x: f64) -> Result<f64> {
    match &kernel.kind {
        KernelKind::Gaussian { sigma } => conv_gaussian_analytic(*sigma, 0, 0.0, (lo, hi), x),
        _ => conv_restricted(
            kernel,
            &Polynomial::constant(Dim::One, [x, 0.0], 1.0),
            &ConvDomain::interval(lo, hi)?,
            [x, 0.0],
            [0, 0],
            DEFAULT_QUAD_POINTS_PER_SIGMA,
        ),
    }
}

/// Whether cell `j` (edges `lo..hi`) belongs to the local region.
fn in_local(lo: f64, hi: f64, (c, d): (f64, f64)) -> bool {
    let mid = 0.5 * (lo + hi);
    mid > c && mid < d
}

/// Discrete operator `A` (without the `D` column) for the given grid.
fn assemble(cfg: &BvpConfig, local: (f64, f64)) -> Result<DMatrix<f64>> {
    let n = cfg.n_cells;
    let (a, _) = cfg.domain;
    let h = cfg.h();
    let edge = |j: usize| a + j as f64 * h;
    let mut m = DMatrix::zeros(n, n);
    // the integral only depends on x_i - cell_j for a uniform grid, but cells of
    // the local region are skipped for NonlocalOnly
    let mut by_offset = vec![f64::NAN; 2 * n - 1];
    for i in 0..n {
        let xi = edge(i) + 0.5 * h;
        let conv_here = cfg.eps_nl != 0.0
            && match cfg.apply_conv_in {
                ApplyConvIn::Everywhere => true,
                ApplyConvIn::NonlocalRegionOnly => !in_local(edge(i), edge(i + 1), local),
            };
        m[(i, i)] += cfg.eps_loc;
        if !conv_here {
            continue;
        }
        for j in 0..n {
            let (lo, hi) = (edge(j), edge(j + 1));
            if cfg.variant == ConvVariant::NonlocalOnly && in_local(lo, hi, local) {
                continue;
            }
            let k = i + n - 1 - j;
            if by_offset[k].is_nan() {
                by_offset[k] = cell_integral(&cfg.kernel, lo - xi, hi - xi, 0.0)?;
            }
            m[(i, j)] += cfg.eps_nl * by_offset[k];
        }
    }
    Ok(m)
}

pub fn solve_bvp_1d(cfg: &BvpConfig) -> Result<BvpSolution> {
    cfg.validate()?;
    let n = cfg.n_cells;
    let h = cfg.h();
    let local = cfg.snapped_local_region();
    let snapped = local != cfg.local_region;
    let op = assemble(cfg, local)?;
    let mut sys = DMatrix::zeros(n + 1, n + 1);
    sys.view_mut((0, 0), (n, n)).copy_from(&op);
    for i in 0..n {
        sys[(i, n)] = -1.0;
        sys[(n, i)] = h;
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs[n] = cfg.u_a - cfg.u_b;
    if sys.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("BVP matrix".into()));
    }
    let lu = sys.clone().lu();
    let diag: Vec<f64> = lu.u().diagonal().iter().map(|v| v.abs()).collect();
    let dmax = diag.iter().copied().fold(0.0, f64::max);
    let dmin = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let pivot_ratio = if dmax > 0.0 { dmin / dmax } else { 0.0 };
    let singular = || {
        let s = singular_values(&sys);
        let smax = s.iter().copied().fold(0.0, f64::max);
        let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
        Error::Singular {
            condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
        }
    };
    if pivot_ratio < 1e-14 {
        return Err(singular());
    }
    let x = lu.solve(&rhs).ok_or_else(singular)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("BVP solution".into()));
    }
    let residual = (&sys * &x - &rhs).amax();
    let e: Vec<f64> = x.iter().take(n).copied().collect();
    let (a, b) = cfg.domain;
    let nodes: Vec<f64> = (0..=n).map(|k| if k == n { b } else { a + k as f64 * h }).collect();
    let mut u = Vec::with_capacity(n + 1);
    u.push(cfg.u_a);
    for ej in &e {
        let last = *u.last().expect("nonempty");
        u.push(last - ej * h);
    }
    u[n] = cfg.u_b;
    Ok(BvpSolution {
        midpoints: (0..n).map(|i| a + (i as f64 + 0.5) * h).collect(),
        e,
        nodes,
        u,
        d: x[n],
        residual,
        pivot_ratio,
        local_region: local,
        snapped,
    })
}

impl BvpSolution {
    pub fn n_cells(&self) -> usize {
        self.e.len()
    }

    fn cell_of(&self, x: f64) -> usize {
        let a = self.nodes[0];
        let h = self.nodes[1] - a;
        (((x - a) / h).floor().max(0.0) as usize).min(self.n_cells() - 1)
    }

    pub fn e_at(&self, x: f64) -> f64 {
        self.e[self.cell_of(x)]
    }

    /// Potential by linear interpolation between nodes.
    pub fn u_at(&self, x: f64) -> f64 {
        let j = self.cell_of(x);
        let t = (x - self.nodes[j]) / (self.nodes[j + 1] - self.nodes[j]);
        self.u[j] + t * (self.u[j + 1] - self.u[j])
    }

    /// `E` linearly interpolated between midpoints of cells in the same region.
    pub fn e_interp(&self, x: f64) -> f64 {
        let j = self.cell_of(x);
        let k = if x < self.midpoints[j] { j.checked_sub(1) } else { Some(j + 1).filter(|&k| k < self.n_cells()) };
        let Some(k) = k else { return self.e[j] };
        let local = |i: usize| in_local(self.nodes[i], self.nodes[i + 1], self.local_region);
        if local(j) != local(k) {
            return self.e[j];
        }
        let t = (x - self.midpoints[j]) / (self.midpoints[k] - self.midpoints[j]);
        self.e[j] + t * (self.e[k] - self.e[j])
    }

    /// Constitutive law re-evaluated at an arbitrary `x`, with the local term
    /// taken from [`Self::e_interp`].
    pub fn d_at(&self, cfg: &BvpConfig, x: f64) -> Result<f64> {
        let mut total = cfg.eps_loc * self.e_interp(x);
        let conv_here = match cfg.apply_conv_in {
            ApplyConvIn::Everywhere => true,
            ApplyConvIn::NonlocalRegionOnly => {
                let j = self.cell_of(x);
                !in_local(self.nodes[j], self.nodes[j + 1], self.local_region)
            }
        };
        if cfg.eps_nl == 0.0 || !conv_here {
            return Ok(total);
        }
        for j in 0..self.n_cells() {
            let (lo, hi) = (self.nodes[j], self.nodes[j + 1]);
            if cfg.variant == ConvVariant::NonlocalOnly && in_local(lo, hi, self.local_region) {
                continue;
            }
            total += cfg.eps_nl * self.e[j] * cell_integral(&cfg.kernel, lo, hi, x)?;
        }
        Ok(total)
    }

    /// Rows `x, u, E` at the cell midpoints.
    pub fn profile_rows(&self) -> Vec<Vec<f64>> {
        self.midpoints
            .iter()
            .zip(&self.e)
            .map(|(&x, &e)| vec![x, self.u_at(x), e])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub solution: BvpSolution,
    /// `(n_cells, D)` for every solve, coarse to fine.
    pub history: Vec<(usize, f64)>,
    pub converged: bool,
    pub rel_change: f64,
}

/// Doubles `n_cells` until successive `D` differ by at most `target_rel_change`.
pub fn refine_until(cfg: &BvpConfig, target_rel_change: f64, max_cells: usize) -> Result<Refinement> {
    if !(target_rel_change > 0.0) {
        return Err(Error::InvalidInput("target_rel_change must be positive".into()));
    }
    if max_cells < cfg.n_cells {
        return Err(Error::InvalidInput("max_cells below the starting grid".into()));
    }
    let mut n = cfg.n_cells;
    let mut sol = solve_bvp_1d(cfg)?;
    let mut history = vec![(n, sol.d)];
    let mut rel_change = f64::INFINITY;
    while 2 * n <= max_cells {
        n *= 2;
        let next = solve_bvp_1d(&cfg.with_cells(n))?;
        let scale = next.d.abs().max(f64::MIN_POSITIVE);
        rel_change = (next.d - sol.d).abs() / scale;
        history.push((n, next.d));
        sol = next;
        if rel_change <= target_rel_change {
            break;
        }
    }
    Ok(Refinement {
        solution: sol,
        history,
        converged: rel_change <= target_rel_change,
        rel_change,
    })
}

/// Integration region of the convolution for a given variant.
pub fn conv_domain_of(cfg: &BvpConfig) -> Result<ConvDomain> {
    let (a, b) = cfg.domain;
    let (c, d) = cfg.snapped_local_region();
    match cfg.variant {
        ConvVariant::WholeDomain => ConvDomain::interval(a, b),
        ConvVariant::NonlocalOnly => ConvDomain::new(Dim::One, vec![Rect::interval(a, c), Rect::interval(d, b)]),
    }
}
