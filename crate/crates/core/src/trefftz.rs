//! Pseudoharmonic (quasi-Trefftz) function sets.
//!
//! A potential is expanded in a polynomial basis `u = Σ c_α u_α`; the
//! coefficients are restricted to the null space of the divergence
//! constraints
//!
//! ```text
//! Σ_α c_α ∂^γ (∇·D_α)(x0) = 0
//! ```
//!
//! so that `∇·D` vanishes to a prescribed order at `x0`. At a straight
//! local/nonlocal interface (`x = 0`, local medium on the left) the nonlocal
//! side is glued to harmonic polynomials through Taylor-order matching of
//! `u` and `D·n`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::geometry::{Dim, MultiIndex, Point, Rect};
use crate::nlconv::{d_field_partial, div_d_derivative, ConvConfig, ConvDomain};
use crate::numerics::{canonical_basis_with_seeds, null_space, numerical_rank, DEFAULT_REL_TOL};
use crate::polynomials::{harmonic_basis_2d, monomial_basis, Polynomial};
use crate::{Error, Result};

/// Kernel truncation tolerance used to pad convolution domains.
pub const PADDING_TOL: f64 = 1.522_997_974_471_263e-8; // e^-18

/// Which multi-indices `γ` produce divergence rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintIndexing {
    /// `0 ≤ |γ| ≤ m`
    #[default]
    ZeroThroughM,
    /// `0 ≤ |γ| ≤ m - 1`, i.e. derivatives of `D` of orders `1..=m` in 1D.
    OneThroughM,
}

impl ConstraintIndexing {
    pub fn gammas(self, dim: Dim, m: usize) -> Vec<MultiIndex> {
        match self {
            ConstraintIndexing::ZeroThroughM => dim.multi_indices(m),
            ConstraintIndexing::OneThroughM if m == 0 => Vec::new(),
            ConstraintIndexing::OneThroughM => dim.multi_indices(m - 1),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintIndexing::ZeroThroughM => "zero_through_m",
            ConstraintIndexing::OneThroughM => "one_through_m",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RowLabel {
    /// `∂^γ (∇·D)(x0)`
    Divergence { gamma: MultiIndex },
    /// `∂_y^k [u]` at the interface point
    PotentialJump { k: usize },
    /// `∂_y^k [D·n]` at the interface point
    NormalDJump { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Bulk,
    Local,
    Nonlocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisTerm {
    /// `(x-x0)^i (y-y0)^j`
    Monomial { alpha: MultiIndex },
    Constant,
    /// `Re (z - z0)^k`
    HarmonicRe { k: usize },
    /// `Im (z - z0)^k`
    HarmonicIm { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnLabel {
    pub side: Side,
    pub term: BasisTerm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisSpec {
    Monomial {
        dim: Dim,
        n_max: usize,
        center: Point,
    },
    /// Harmonic polynomials for `x < 0` followed by monomials for `x ≥ 0`.
    Glued {
        n_max: usize,
        center: Point,
        eps_local: f64,
    },
}

impl BasisSpec {
    pub fn columns(&self) -> Vec<ColumnLabel> {
        match *self {
            BasisSpec::Monomial { dim, n_max, .. } => dim
                .multi_indices(n_max)
                .into_iter()
                .map(|alpha| ColumnLabel {
                    side: Side::Bulk,
                    term: BasisTerm::Monomial { alpha },
                })
                .collect(),
            BasisSpec::Glued { n_max, .. } => {
                let mut cols = vec![ColumnLabel {
                    side: Side::Local,
                    term: BasisTerm::Constant,
                }];
                for k in 1..=n_max {
                    cols.push(ColumnLabel {
                        side: Side::Local,
                        term: BasisTerm::HarmonicRe { k },
                    });
                    cols.push(ColumnLabel {
                        side: Side::Local,
                        term: BasisTerm::HarmonicIm { k },
                    });
                }
                cols.extend(Dim::Two.multi_indices(n_max).into_iter().map(|alpha| ColumnLabel {
                    side: Side::Nonlocal,
                    term: BasisTerm::Monomial { alpha },
                }));
                cols
            }
        }
    }

    pub fn len(&self) -> usize {
        self.columns().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Local (harmonic) and nonlocal (monomial) parts; bulk bases have only the latter.
    pub fn polynomials(&self) -> (Vec<Polynomial>, Vec<Polynomial>) {
        match *self {
            BasisSpec::Monomial { dim, n_max, center } => (Vec::new(), monomial_basis(dim, n_max, center)),
            BasisSpec::Glued { n_max, center, .. } => (
                harmonic_basis_2d(n_max, center),
                monomial_basis(Dim::Two, n_max, center),
            ),
        }
    }
}

/// Tolerances for the null-space construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrefftzOptions {
    /// Singular values `≤ rel_tol · s_max` of the row-scaled matrix count as zero.
    pub rel_tol: f64,
    /// Divergence rows whose raw max-norm is at most `row_drop_tol · eps_eff(x0)`
    /// carry only domain-truncation residue and are dropped.
    pub row_drop_tol: f64,
    pub indexing: ConstraintIndexing,
}

impl Default for TrefftzOptions {
    fn default() -> Self {
        TrefftzOptions {
            rel_tol: DEFAULT_REL_TOL,
            row_drop_tol: 1e-3,
            indexing: ConstraintIndexing::ZeroThroughM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedRow {
    pub label: RowLabel,
    pub raw_max: f64,
}

/// Row-scaled constraint matrix plus the raw rows it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    /// Kept rows, each scaled to unit max-norm.
    pub matrix: DMatrix<f64>,
    /// Kept rows before scaling.
    pub raw: DMatrix<f64>,
    pub row_labels: Vec<RowLabel>,
    pub row_scales: Vec<f64>,
    pub col_labels: Vec<ColumnLabel>,
    pub dropped: Vec<DroppedRow>,
}

impl ConstraintSystem {
    fn assemble(
        rows: Vec<(RowLabel, Vec<f64>, f64)>,
        col_labels: Vec<ColumnLabel>,
    ) -> ConstraintSystem {
        let n = col_labels.len();
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        for (label, row, drop_below) in rows {
            let raw_max = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if raw_max <= 1e-14 || raw_max <= drop_below {
                dropped.push(DroppedRow { label, raw_max });
            } else {
                kept.push((label, row, raw_max));
            }
        }
        let raw = DMatrix::from_fn(kept.len(), n, |i, j| kept[i].1[j]);
        let matrix = DMatrix::from_fn(kept.len(), n, |i, j| kept[i].1[j] / kept[i].2);
        ConstraintSystem {
            matrix,
            raw,
            row_labels: kept.iter().map(|k| k.0).collect(),
            row_scales: kept.iter().map(|k| k.2).collect(),
            col_labels,
            dropped,
        }
    }
}

fn divergence_rows(
    cfg: &ConvConfig,
    basis: &[Polynomial],
    leading_zeros: usize,
    x0: Point,
    m: usize,
    opts: &TrefftzOptions,
) -> Result<Vec<(RowLabel, Vec<f64>, f64)>> {
    let drop_below = opts.row_drop_tol * cfg.effective_permittivity(x0)?;
    opts.indexing
        .gammas(cfg.dim(), m)
        .into_iter()
        .map(|gamma| {
            let mut row = vec![0.0; leading_zeros];
            for u in basis {
                row.push(div_d_derivative(cfg, u, x0, gamma)?);
            }
            Ok((RowLabel::Divergence { gamma }, row, drop_below))
        })
        .collect()
}

/// Divergence constraint rows `∂^γ(∇·D_α)(x0)` for `|γ|` per `opts.indexing`.
pub fn build_constraints(
    cfg: &ConvConfig,
    basis: &[Polynomial],
    x0: Point,
    m: usize,
    opts: &TrefftzOptions,
) -> Result<ConstraintSystem> {
    cfg.validate()?;
    let cols = basis
        .iter()
        .map(|p| ColumnLabel {
            side: Side::Bulk,
            term: BasisTerm::Monomial {
                alpha: leading_index(p),
            },
        })
        .collect();
    let rows = divergence_rows(cfg, basis, 0, x0, m, opts)?;
    Ok(ConstraintSystem::assemble(rows, cols))
}

fn leading_index(p: &Polynomial) -> MultiIndex {
    p.terms()
        .filter(|(_, c)| *c != 0.0)
        .map(|(a, _)| a)
        .last()
        .unwrap_or([0, 0])
}

/// A set of pseudoharmonic functions: orthonormal coefficient rows over a basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrefftzSet {
    pub dim: Dim,
    pub basis: BasisSpec,
    pub columns: Vec<ColumnLabel>,
    /// `n_funcs × n_basis`, orthonormal rows.
    pub coeffs: Vec<Vec<f64>>,
    pub cfg: ConvConfig,
    pub x0: Point,
    pub m: usize,
    pub p_max: Option<usize>,
    pub trefftz_domain: Rect,
    pub options: TrefftzOptions,
    pub rank: usize,
    pub row_labels: Vec<RowLabel>,
    pub dropped_rows: Vec<DroppedRow>,
    /// Per function: max over kept rows of `|raw row · c|`.
    pub residuals: Vec<f64>,
    /// Max absolute entry of the raw kept rows.
    pub residual_scale: f64,
}

/// Field sampled by [`evaluate_trefftz`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    U,
    E,
    D,
    DivD,
}

/// The potential of one function, split by medium.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Bulk(Polynomial),
    Glued { local: Polynomial, nonlocal: Polynomial },
}

impl TrefftzSet {
    pub fn n_funcs(&self) -> usize {
        self.coeffs.len()
    }

    pub fn n_basis(&self) -> usize {
        self.columns.len()
    }

    /// Worst relative constraint residual over all functions.
    pub fn max_relative_residual(&self) -> f64 {
        let worst = self.residuals.iter().fold(0.0f64, |a, &r| a.max(r));
        if self.residual_scale > 0.0 {
            worst / self.residual_scale
        } else {
            worst
        }
    }

    pub fn potential(&self, which: usize) -> Result<Potential> {
        let row = self.coeffs.get(which).ok_or(Error::IndexOutOfRange {
            index: which,
            len: self.coeffs.len(),
        })?;
        let (local, nonlocal) = self.basis.polynomials();
        let nl = Polynomial::linear_combination(&nonlocal, &row[local.len()..])?;
        if local.is_empty() {
            Ok(Potential::Bulk(nl))
        } else {
            let loc = Polynomial::linear_combination(&local, &row[..local.len()])?;
            Ok(Potential::Glued {
                local: loc,
                nonlocal: nl,
            })
        }
    }

    fn eps_local(&self) -> Option<f64> {
        match self.basis {
            BasisSpec::Glued { eps_local, .. } => Some(eps_local),
            BasisSpec::Monomial { .. } => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("TrefftzSet serializes")
    }

    pub fn from_json(s: &str) -> Result<TrefftzSet> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("TrefftzSet JSON: {e}")))
    }
}

fn finish_set(
    system: ConstraintSystem,
    basis: BasisSpec,
    cfg: &ConvConfig,
    x0: Point,
    m: usize,
    p_max: Option<usize>,
    trefftz_domain: Rect,
    opts: &TrefftzOptions,
    n_max: usize,
    seeds: &[DVector<f64>],
) -> Result<TrefftzSet> {
    let n = system.col_labels.len();
    let null = if system.matrix.nrows() == 0 {
        DMatrix::identity(n, n)
    } else {
        null_space(&system.matrix, opts.rel_tol)
    };
    if null.ncols() == 0 {
        return Err(Error::EmptyNullSpace { n_max, m });
    }
    let rank = if system.matrix.nrows() == 0 {
        0
    } else {
        numerical_rank(&system.matrix, opts.rel_tol)
    };
    let canon = canonical_basis_with_seeds(&null, seeds);
    let coeffs: Vec<Vec<f64>> = (0..canon.ncols())
        .map(|k| canon.column(k).iter().copied().collect())
        .collect();
    let residuals = coeffs
        .iter()
        .map(|c| {
            let v = &system.raw * DVector::from_column_slice(c);
            v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
        })
        .collect();
    let residual_scale = system.raw.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    Ok(TrefftzSet {
        dim: cfg.dim(),
        columns: system.col_labels,
        basis,
        coeffs,
        cfg: cfg.clone(),
        x0,
        m,
        p_max,
        trefftz_domain,
        options: *opts,
        rank,
        row_labels: system.row_labels,
        dropped_rows: system.dropped,
        residuals,
        residual_scale,
    })
}

/// `trefftz_domain` dilated by the kernel's e^-18 truncation radius.
pub fn padded_conv_domain(cfg_kernel: &crate::Kernel, dim: Dim, trefftz_domain: &Rect) -> Result<ConvDomain> {
    let delta = cfg_kernel.truncation_radius(PADDING_TOL)?;
    ConvDomain::single(dim, trefftz_domain.dilate(dim, delta))
}

/// Pseudoharmonic functions in the bulk of a nonlocal medium, monomial basis about `x0`.
pub fn build_trefftz_bulk(
    cfg: &ConvConfig,
    n_max: usize,
    x0: Point,
    m: usize,
    trefftz_domain: Rect,
    opts: &TrefftzOptions,
) -> Result<TrefftzSet> {
    cfg.validate()?;
    let dim = cfg.dim();
    trefftz_domain.validate(dim)?;
    if !trefftz_domain.contains(dim, x0) {
        return Err(Error::InvalidInput(format!("x0 {x0:?} outside the Trefftz domain")));
    }
    if !cfg.conv_domain.hull().contains_rect(dim, &trefftz_domain) {
        return Err(Error::InvalidInput("Trefftz domain must lie inside the convolution domain".into()));
    }
    let spec = BasisSpec::Monomial {
        dim,
        n_max,
        center: x0,
    };
    let (_, basis) = spec.polynomials();
    let system = build_constraints(cfg, &basis, x0, m, opts)?;
    let mut constant = DVector::zeros(basis.len());
    constant[0] = 1.0;
    finish_set(system, spec, cfg, x0, m, None, trefftz_domain, opts, n_max, &[constant])
}

/// Glued local (harmonic, `x < 0`) / nonlocal (monomial, `x > 0`) pseudoharmonic
/// functions for the interface `x = 0`. Both bases are centred at the origin;
/// divergence rows are imposed at `x0` on the nonlocal side, matching rows at
/// the origin for `k = 0..=p_max`.
#[allow(clippy::too_many_arguments)]
pub fn build_trefftz_interface_2d(
    cfg_nl: &ConvConfig,
    eps_local: f64,
    n_max: usize,
    m: usize,
    p_max: usize,
    x0: Point,
    trefftz_domain: Rect,
    opts: &TrefftzOptions,
) -> Result<TrefftzSet> {
    cfg_nl.validate()?;
    if cfg_nl.dim() != Dim::Two {
        return Err(Error::InvalidInput("interface construction is 2D".into()));
    }
    if !(eps_local > 0.0 && eps_local.is_finite()) {
        return Err(Error::InvalidInput(format!("local permittivity must be positive, got {eps_local}")));
    }
    if !(x0[0] > 0.0) {
        return Err(Error::InvalidInput("x0 must lie on the nonlocal side (x > 0)".into()));
    }
    if cfg_nl.conv_domain.boxes.iter().any(|b| b.lo[0] < 0.0) {
        return Err(Error::InvalidInput("nonlocal convolution domain must lie in x ≥ 0".into()));
    }
    trefftz_domain.validate(Dim::Two)?;
    let center = [0.0, 0.0];
    let spec = BasisSpec::Glued {
        n_max,
        center,
        eps_local,
    };
    let (harm, mono) = spec.polynomials();
    let nh = harm.len();
    let mut rows = divergence_rows(cfg_nl, &mono, nh, x0, m, opts)?;
    for k in 0..=p_max {
        let dy = [0, k];
        let mut row: Vec<f64> = harm.iter().map(|h| -h.partial(dy).eval(center)).collect();
        row.extend(mono.iter().map(|p| p.partial(dy).eval(center)));
        rows.push((RowLabel::PotentialJump { k }, row, 0.0));
    }
    for k in 0..=p_max {
        let mut row = Vec::with_capacity(nh + mono.len());
        // D_local·n = eps_local E_x = -eps_local ∂_x h
        for h in &harm {
            row.push(eps_local * h.partial([1, k]).eval(center));
        }
        for p in &mono {
            row.push(d_field_partial(cfg_nl, p, center, 0, [0, k])?);
        }
        rows.push((RowLabel::NormalDJump { k }, row, 0.0));
    }
    let system = ConstraintSystem::assemble(rows, spec.columns());
    let mut constant = DVector::zeros(nh + mono.len());
    constant[0] = 1.0;
    constant[nh] = 1.0;
    finish_set(system, spec, cfg_nl, x0, m, Some(p_max), trefftz_domain, opts, n_max, &[constant])
}

/// Samples `what` for function `which` at `points`; each entry has 1 (u, divD)
/// or `dim` (E, D) components.
pub fn evaluate_trefftz(ts: &TrefftzSet, which: usize, what: FieldKind, points: &[Point]) -> Result<Vec<Vec<f64>>> {
    let pot = ts.potential(which)?;
    points
        .iter()
        .map(|&p| {
            let (u, local_eps) = match &pot {
                Potential::Bulk(u) => (u, None),
                Potential::Glued { local, nonlocal } => {
                    if p[0] < 0.0 {
                        (local, ts.eps_local())
                    } else {
                        (nonlocal, None)
                    }
                }
            };
            let e = || -> Vec<f64> { u.gradient().iter().map(|g| -g.eval(p)).collect() };
            Ok(match (what, local_eps) {
                (FieldKind::U, _) => vec![u.eval(p)],
                (FieldKind::E, _) => e(),
                (FieldKind::D, Some(eps)) => e().into_iter().map(|v| eps * v).collect(),
                (FieldKind::D, None) => crate::nlconv::d_field(&ts.cfg, u, p)?,
                (FieldKind::DivD, Some(eps)) => vec![-eps * u.laplacian().eval(p)],
                (FieldKind::DivD, None) => vec![div_d_derivative(&ts.cfg, u, p, [0, 0])?],
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Kernel;

    fn cfg_1d(eps_nl: f64, dom: (f64, f64)) -> ConvConfig {
        ConvConfig::new(
            1.0,
            eps_nl,
            Kernel::gaussian(Dim::One, 0.5).unwrap(),
            ConvDomain::interval(dom.0, dom.1).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn constraint_shapes() {
        let cfg = cfg_1d(10.0, (0.0, 4.25));
        let basis = monomial_basis(Dim::One, 4, [1.0, 0.0]);
        let sys = build_constraints(&cfg, &basis, [1.0, 0.0], 1, &TrefftzOptions::default()).unwrap();
        assert_eq!(sys.matrix.shape(), (2, 5));
        assert!(sys.raw.column(0).iter().all(|&v| v == 0.0), "constant column");
        for i in 0..sys.matrix.nrows() {
            let m = sys.matrix.row(i).iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!((m - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn local_limit_contains_affine_potentials() {
        let cfg = cfg_1d(0.0, (-4.0, 4.0));
        for n in 1..=5 {
            let ts = build_trefftz_bulk(&cfg, n, [0.0, 0.0], n - 1, Rect::interval(-0.5, 0.5), &TrefftzOptions::default())
                .unwrap();
            // u = 1 and u = x lie in the row space
            for target in [[1.0, 0.0], [0.0, 1.0]] {
                let mut v = vec![0.0; n + 1];
                v[0] = target[0];
                v[1] = target[1];
                let proj: f64 = ts
                    .coeffs
                    .iter()
                    .map(|r| r.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>().powi(2))
                    .sum();
                assert!((proj - 1.0).abs() < 1e-10, "n={n}");
            }
        }
    }

    #[test]
    fn constant_comes_first() {
        let cfg = cfg_1d(10.0, (0.0, 4.25));
        let ts = build_trefftz_bulk(&cfg, 4, [1.0, 0.0], 1, Rect::interval(0.75, 1.25), &TrefftzOptions::default())
            .unwrap();
        assert_eq!(ts.n_funcs(), 3);
        assert!((ts.coeffs[0][0] - 1.0).abs() < 1e-14);
        assert!(ts.coeffs[0][1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn empty_null_space_is_reported() {
        let cfg = cfg_1d(10.0, (0.0, 4.25));
        let opts = TrefftzOptions::default();
        // 3 monomials, rows γ = 0..=3 with the constant column zero: nullity 1 (constant)
        let ts = build_trefftz_bulk(&cfg, 2, [1.0, 0.0], 3, Rect::interval(0.75, 1.25), &opts).unwrap();
        assert_eq!(ts.n_funcs(), 1);
        let sys_cfg = cfg.clone();
        let basis: Vec<Polynomial> = monomial_basis(Dim::One, 3, [1.0, 0.0]).into_iter().skip(1).collect();
        let sys = build_constraints(&sys_cfg, &basis, [1.0, 0.0], 3, &opts).unwrap();
        assert_eq!(null_space(&sys.matrix, opts.rel_tol).ncols(), 0);
    }

    #[test]
    fn evaluate_index_out_of_range() {
        let cfg = cfg_1d(10.0, (0.0, 4.25));
        let ts = build_trefftz_bulk(&cfg, 4, [1.0, 0.0], 1, Rect::interval(0.75, 1.25), &TrefftzOptions::default())
            .unwrap();
        assert!(matches!(
            evaluate_trefftz(&ts, 7, FieldKind::U, &[[1.0, 0.0]]),
            Err(Error::IndexOutOfRange { index: 7, len: 3 })
        ));
    }

    #[test]
    fn rejects_bad_geometry() {
        let cfg = cfg_1d(10.0, (0.0, 4.25));
        let opts = TrefftzOptions::default();
        assert!(build_trefftz_bulk(&cfg, 4, [2.0, 0.0], 1, Rect::interval(0.75, 1.25), &opts).is_err());
        assert!(build_trefftz_bulk(&cfg, 4, [1.0, 0.0], 1, Rect::interval(-1.0, 1.25), &opts).is_err());
    }
}
