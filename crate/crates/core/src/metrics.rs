//! Approximation error of a space of `D` fields and the Trefftz-vs-Taylor study.
//!
//! The error norm is `‖D‖² = area(Ω_t)⁻¹ ∫_{Ω_t} |D|²`; the error of a space is
//! the least-squares residual of the target in that norm.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::geometry::{Dim, Point, Rect};
use crate::nlconv::{d_field, ConvConfig};
use crate::numerics::{gauss_legendre, least_squares_fit, tensor_rule, QuadratureRule, DEFAULT_REL_TOL};
use crate::polynomials::{basis_len, monomial_basis};
use crate::trefftz::{build_trefftz_bulk, TrefftzOptions};
use crate::{Error, Result};

/// Points per axis of the tensor Gauss-Legendre rule on `Ω_t`.
pub const OMEGA_T_POINTS: usize = 24;

/// Divergence-free field `(∂_y v, -∂_x v)` for `v = sin x e^y + e^{-x} cos y`.
pub fn d_test(p: Point) -> [f64; 2] {
    let [x, y] = p;
    let (ey, emx) = (y.exp(), (-x).exp());
    [x.sin() * ey - emx * y.sin(), -(x.cos() * ey - emx * y.cos())]
}

/// `v = sin x e^y + e^{-x} cos y`
pub fn v_test(p: Point) -> f64 {
    let [x, y] = p;
    x.sin() * y.exp() + (-x).exp() * y.cos()
}

pub fn omega_t_rule(omega_t: &Rect, points: usize) -> Result<QuadratureRule> {
    tensor_rule(
        &gauss_legendre(points, omega_t.lo[0], omega_t.hi[0])?,
        &gauss_legendre(points, omega_t.lo[1], omega_t.hi[1])?,
    )
}

/// Error from pre-sampled fields: `space[k][q]` is field `k` at node `q`.
pub fn approx_error_samples(space: &[Vec<[f64; 2]>], target: &[[f64; 2]], quad: &QuadratureRule) -> Result<f64> {
    let nq = quad.len();
    if target.len() != nq || space.iter().any(|s| s.len() != nq) {
        return Err(Error::InvalidInput("samples do not match the quadrature rule".into()));
    }
    let area: f64 = quad.weights.iter().sum();
    let b = DMatrix::from_fn(2 * nq, space.len(), |r, k| space[k][r / 2][r % 2]);
    let t: Vec<f64> = target.iter().flat_map(|v| [v[0], v[1]]).collect();
    let w: Vec<f64> = quad.weights.iter().flat_map(|&w| [w / area, w / area]).collect();
    Ok(least_squares_fit(&b, &t, &w, DEFAULT_REL_TOL)?.residual)
}

/// `inf_{D ∈ span(space)} ‖D - target‖` over the nodes of `quad`.
pub fn approx_error<F, G>(space: &[F], target: G, quad: &QuadratureRule) -> Result<f64>
where
    F: Fn(Point) -> [f64; 2],
    G: Fn(Point) -> [f64; 2],
{
    let samples: Vec<Vec<[f64; 2]>> = space.iter().map(|f| quad.nodes.iter().map(|&p| f(p)).collect()).collect();
    let t: Vec<[f64; 2]> = quad.nodes.iter().map(|&p| target(p)).collect();
    approx_error_samples(&samples, &t, quad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub cfg: ConvConfig,
    pub n_max_list: Vec<usize>,
    pub m: usize,
    pub omega_t: Rect,
    pub x0: Point,
    /// Add `eps_loc E` to the fitted fields; otherwise `D_a = -K *_{Ω_a} ∇u`.
    pub include_local_term: bool,
    pub options: TrefftzOptions,
    pub quad_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_max: usize,
    pub n_funcs_trefftz: usize,
    pub error_trefftz: f64,
    pub n_funcs_taylor: usize,
    pub error_taylor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub target: String,
    pub omega_t: Rect,
    pub norm: String,
    pub include_local_term: bool,
}

/// One Trefftz-vs-Taylor comparison at a Trefftz function count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedCount {
    pub n_funcs: usize,
    pub error_trefftz: f64,
    /// Taylor error interpolated (log-linear in count) to `n_funcs`.
    pub error_taylor: f64,
}

/// Least-squares slope of `ln y` against `x`.
pub fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > 0.0).map(|&(x, y)| (x, y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `ln y` interpolated linearly in `x` from points sorted by `x`; `None` outside the range.
pub fn interp_log(points: &[(f64, f64)], x: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        (x0 <= x && x <= x1 && y0 > 0.0 && y1 > 0.0).then(|| {
            if x1 == x0 {
                y0
            } else {
                let t = (x - x0) / (x1 - x0);
                (y0.ln() + t * (y1.ln() - y0.ln())).exp()
            }
        })
    })
}

impl ConvergenceReport {
    fn trefftz_points(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.n_funcs_trefftz as f64, r.error_trefftz)).collect()
    }

    fn taylor_points(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.n_funcs_taylor as f64, r.error_taylor)).collect()
    }

    pub fn trefftz_slope(&self) -> Option<f64> {
        log_slope(&self.trefftz_points())
    }

    pub fn taylor_slope(&self) -> Option<f64> {
        log_slope(&self.taylor_points())
    }

    /// Trefftz rows with at least `min_count` functions whose count is bracketed by Taylor rows.
    pub fn matched_counts(&self, min_count: usize) -> Vec<MatchedCount> {
        let taylor = self.taylor_points();
        self.rows
            .iter()
            .filter(|r| r.n_funcs_trefftz >= min_count)
            .filter_map(|r| {
                interp_log(&taylor, r.n_funcs_trefftz as f64).map(|e| MatchedCount {
                    n_funcs: r.n_funcs_trefftz,
                    error_trefftz: r.error_trefftz,
                    error_taylor: e,
                })
            })
            .collect()
    }

    /// Trefftz error strictly decreasing over rows with `n_max` in `range`.
    pub fn trefftz_strictly_decreasing(&self, range: std::ops::RangeInclusive<usize>) -> bool {
        let errs: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| range.contains(&r.n_max))
            .map(|r| r.error_trefftz)
            .collect();
        errs.windows(2).all(|w| w[1] < w[0])
    }

    pub fn csv_rows(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.n_max as f64,
                    r.n_funcs_trefftz as f64,
                    r.error_trefftz,
                    r.n_funcs_taylor as f64,
                    r.error_taylor,
                ]
            })
            .collect()
    }

    pub const CSV_HEADER: [&'static str; 5] =
        ["n_max", "n_funcs_trefftz", "err_trefftz", "n_funcs_taylor", "err_taylor"];
}

/// For each `n_max`: error of the Trefftz `D` fields and of a component-wise Taylor fit.
pub fn convergence_study(study: &StudyConfig) -> Result<ConvergenceReport> {
    let cfg = &study.cfg;
    if cfg.dim() != Dim::Two {
        return Err(Error::InvalidInput("convergence study is 2D".into()));
    }
    if !cfg.conv_domain.hull().contains_rect(Dim::Two, &study.omega_t) {
        return Err(Error::InvalidInput("Ω_t must lie inside Ω_a".into()));
    }
    let quad = omega_t_rule(&study.omega_t, study.quad_points)?;
    let target: Vec<[f64; 2]> = quad.nodes.iter().map(|&p| d_test(p)).collect();
    let fit_cfg = if study.include_local_term {
        cfg.clone()
    } else {
        ConvConfig { eps_loc: 0.0, ..cfg.clone() }
    };
    let mut sorted = study.n_max_list.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let top = sorted.last().copied().unwrap_or(0);
    // D of every monomial (centered at x0) at every node, computed once
    let monos = monomial_basis(Dim::Two, top, study.x0);
    let mono_d: Vec<Vec<[f64; 2]>> = monos
        .iter()
        .map(|u| {
            quad.nodes
                .iter()
                .map(|&p| d_field(&fit_cfg, u, p).map(|d| [d[0], d[1]]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &n_max in &sorted {
        let ts = build_trefftz_bulk(cfg, n_max, study.x0, study.m, study.omega_t, &study.options)?;
        // the basis of degree n_max is a prefix of the degree-`top` basis
        let space: Vec<Vec<[f64; 2]>> = ts
            .coeffs
            .iter()
            .map(|c| {
                (0..quad.len())
                    .map(|q| {
                        let mut v = [0.0; 2];
                        for (k, ck) in c.iter().enumerate() {
                            v[0] += ck * mono_d[k][q][0];
                            v[1] += ck * mono_d[k][q][1];
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        let error_trefftz = approx_error_samples(&space, &target, &quad)?;
        let taylor_space: Vec<Vec<[f64; 2]>> = monomial_basis(Dim::Two, n_max, study.x0)
            .iter()
            .flat_map(|p| {
                let vals: Vec<f64> = quad.nodes.iter().map(|&x| p.eval(x)).collect();
                [
                    vals.iter().map(|&v| [v, 0.0]).collect::<Vec<_>>(),
                    vals.iter().map(|&v| [0.0, v]).collect(),
                ]
            })
            .collect();
        let error_taylor = approx_error_samples(&taylor_space, &target, &quad)?;
        rows.push(ConvergenceRow {
            n_max,
            n_funcs_trefftz: ts.n_funcs(),
            error_trefftz,
            n_funcs_taylor: 2 * basis_len(Dim::Two, n_max),
            error_taylor,
        });
    }
    rows.sort_by_key(|r| (r.n_funcs_trefftz, r.n_max));
    Ok(ConvergenceReport {
        rows,
        target: "D_test = (d_y v, -d_x v), v = sin x e^y + e^-x cos y".into(),
        omega_t: study.omega_t,
        norm: "sqrt(area(omega_t)^-1 * integral over omega_t of |D|^2)".into(),
        include_local_term: study.include_local_term,
    })
}
