//! Reference configurations for the reproducible experiments.

use crate::bvp1d::{ApplyConvIn, BvpConfig, ConvVariant};
use crate::geometry::{Dim, Point, Rect};
use crate::kernels::Kernel;
use crate::metrics::{StudyConfig, OMEGA_T_POINTS};
use crate::nlconv::{ConvConfig, ConvDomain};
use crate::trefftz::{padded_conv_domain, TrefftzOptions, PADDING_TOL};
use crate::Result;

pub const EPS_LOC: f64 = 1.0;
pub const EPS_NL: f64 = 10.0;

/// Two-point problem: σ = 1, Ω = (-5, 5), Ω_l = (-1, 1), u(-5) = 0, u(5) = 1.
pub fn bvp(variant: ConvVariant, apply_conv_in: ApplyConvIn) -> BvpConfig {
    BvpConfig {
        domain: (-5.0, 5.0),
        local_region: (-1.0, 1.0),
        kernel: Kernel::gaussian(Dim::One, 1.0).expect("valid sigma"),
        eps_loc: EPS_LOC,
        eps_nl: EPS_NL,
        variant,
        apply_conv_in,
        n_cells: 20,
        u_a: 0.0,
        u_b: 1.0,
    }
}

pub const BVP_TARGET_REL_CHANGE: f64 = 1e-4;
pub const BVP_MAX_CELLS: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct Bulk {
    pub cfg: ConvConfig,
    pub n_max: usize,
    pub m: usize,
    pub x0: Point,
    pub trefftz_domain: Rect,
}

/// 1D bulk: σ = 0.5, x0 = 1, n = 4, m = 1; Trefftz domain `x0 ± σ/2`,
/// convolution domain `[0, x_max + δ]`.
pub fn trefftz_1d() -> Result<Bulk> {
    let sigma = 0.5;
    let kernel = Kernel::gaussian(Dim::One, sigma)?;
    let x0 = [1.0, 0.0];
    let trefftz_domain = Rect::interval(0.75, 1.25);
    let delta = kernel.truncation_radius(PADDING_TOL)?;
    let conv = ConvDomain::interval(0.0, trefftz_domain.hi[0] + delta)?;
    Ok(Bulk {
        cfg: ConvConfig::new(EPS_LOC, EPS_NL, kernel, conv)?,
        n_max: 4,
        m: 1,
        x0,
        trefftz_domain,
    })
}

/// 2D bulk: σ = 1/2, Ω_a = [-6σ, 6σ]², Ω_t = (-σ, σ)², x0 = 0, n = 4, m = 2.
pub fn trefftz_2d() -> Result<Bulk> {
    let sigma = 0.5;
    let kernel = Kernel::gaussian(Dim::Two, sigma)?;
    let conv = ConvDomain::single(Dim::Two, Rect::centered(Dim::Two, [0.0, 0.0], 6.0 * sigma))?;
    Ok(Bulk {
        cfg: ConvConfig::new(EPS_LOC, EPS_NL, kernel, conv)?,
        n_max: 4,
        m: 2,
        x0: [0.0, 0.0],
        trefftz_domain: Rect::centered(Dim::Two, [0.0, 0.0], sigma),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interface {
    pub cfg_nl: ConvConfig,
    pub eps_local: f64,
    pub n_max: usize,
    pub m: usize,
    pub p_max: usize,
    pub x0: Point,
    pub trefftz_domain: Rect,
}

/// Interface at x = 0: σ = 1/2, n = 4, m = 2, p_max = 2, x0 = (σ/2, 0),
/// Trefftz box (-σ, σ)²; the nonlocal convolution domain is the x ≥ 0 part
/// of the padded box.
pub fn interface_2d() -> Result<Interface> {
    let sigma = 0.5;
    let kernel = Kernel::gaussian(Dim::Two, sigma)?;
    let trefftz_domain = Rect::centered(Dim::Two, [0.0, 0.0], sigma);
    let padded = padded_conv_domain(&kernel, Dim::Two, &trefftz_domain)?.hull();
    let right = Rect::new([0.0, padded.lo[1]], padded.hi);
    Ok(Interface {
        cfg_nl: ConvConfig::new(EPS_LOC, EPS_NL, kernel, ConvDomain::single(Dim::Two, right)?)?,
        eps_local: EPS_LOC,
        n_max: 4,
        m: 2,
        p_max: 2,
        x0: [0.5 * sigma, 0.0],
        trefftz_domain,
    })
}

/// Convergence study on the 2D bulk preset, `n_max = 0..=4`.
pub fn convergence(include_local_term: bool) -> Result<StudyConfig> {
    let b = trefftz_2d()?;
    Ok(StudyConfig {
        cfg: b.cfg,
        n_max_list: (0..=4).collect(),
        m: b.m,
        omega_t: b.trefftz_domain,
        x0: b.x0,
        include_local_term,
        options: TrefftzOptions::default(),
        quad_points: OMEGA_T_POINTS,
    })
}
