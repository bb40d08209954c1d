//! Convolution kernels `K(r)` for the nonlocal constitutive law.
//!
//! The Gaussian is unnormalized (peak value 1):
//!
//! ```text
//! K(r) = exp(-|r|² / (2 σ²))
//! ```
//!
//! and its derivatives follow from the probabilists' Hermite polynomials,
//! `d^n/dx^n exp(-x²/2σ²) = (-1/σ)^n He_n(x/σ) exp(-x²/2σ²)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{Dim, MultiIndex, Point};
use crate::polynomials::Polynomial;
use crate::{Error, Result};

/// Highest derivative order served for the Gaussian kernel.
pub const MAX_GAUSSIAN_ORDER: usize = 16;

/// Unit system for the Yukawa prefactor `1 / ([4π] λ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YukawaPrefactor {
    /// `1 / λ²`
    Gaussian,
    /// `1 / (4π λ²)`
    Si,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    Gaussian { sigma: f64 },
    Yukawa { lambda: f64, prefactor: YukawaPrefactor },
    /// Polynomial in the displacement; 1D only. Used to exercise the
    /// finite-domain convolution identities through the production path.
    PolyTest { poly: Polynomial },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub kind: KernelKind,
    pub dim: Dim,
}

impl Kernel {
    pub fn gaussian(dim: Dim, sigma: f64) -> Result<Kernel> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidInput(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Kernel {
            kind: KernelKind::Gaussian { sigma },
            dim,
        })
    }

    pub fn yukawa(dim: Dim, lambda: f64, prefactor: YukawaPrefactor) -> Result<Kernel> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
        }
        Ok(Kernel {
            kind: KernelKind::Yukawa { lambda, prefactor },
            dim,
        })
    }

    pub fn poly_test(poly: Polynomial) -> Result<Kernel> {
        if poly.dim() != Dim::One {
            return Err(Error::InvalidInput("polynomial test kernels are 1D only".into()));
        }
        Ok(Kernel {
            kind: KernelKind::PolyTest { poly },
            dim: Dim::One,
        })
    }

    /// Gaussian width, if this is a Gaussian kernel.
    pub fn sigma(&self) -> Option<f64> {
        match self.kind {
            KernelKind::Gaussian { sigma } => Some(sigma),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            KernelKind::Gaussian { sigma } if !(*sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::InvalidInput(format!("sigma must be positive, got {sigma}")))
            }
            KernelKind::Yukawa { lambda, .. } if !(*lambda > 0.0 && lambda.is_finite()) => {
                Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")))
            }
            KernelKind::PolyTest { poly } if poly.dim() != Dim::One || self.dim != Dim::One => {
                Err(Error::InvalidInput("polynomial test kernels are 1D only".into()))
            }
            _ => Ok(()),
        }
    }

    fn norm(&self, r: Point) -> f64 {
        match self.dim {
            Dim::One => r[0].abs(),
            Dim::Two => r[0].hypot(r[1]),
        }
    }

    pub fn value(&self, r: Point) -> Result<f64> {
        if !r[..self.dim.count()].iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("non-finite displacement".into()));
        }
        match &self.kind {
            KernelKind::Gaussian { sigma } => Ok((0..self.dim.count())
                .map(|i| gaussian_1d(*sigma, r[i]))
                .product()),
            KernelKind::Yukawa { lambda, prefactor } => {
                let d = self.norm(r);
                if d == 0.0 {
                    return Err(Error::Domain("Yukawa kernel is singular at r = 0".into()));
                }
                let pre = match prefactor {
                    YukawaPrefactor::Gaussian => 1.0,
                    YukawaPrefactor::Si => 4.0 * PI,
                };
                Ok((-d / lambda).exp() / (pre * lambda * lambda))
            }
            KernelKind::PolyTest { poly } => Ok(poly.eval([r[0], 0.0])),
        }
    }

    /// Exact partial derivative `∂^beta K(r)`.
    pub fn partial(&self, beta: MultiIndex, r: Point) -> Result<f64> {
        match &self.kind {
            KernelKind::Gaussian { sigma } => {
                let beta = match self.dim {
                    Dim::One => [beta[0], 0],
                    Dim::Two => beta,
                };
                if beta[0].max(beta[1]) > MAX_GAUSSIAN_ORDER {
                    return Err(Error::Unsupported(format!(
                        "Gaussian derivative order above {MAX_GAUSSIAN_ORDER}"
                    )));
                }
                Ok((0..self.dim.count())
                    .map(|i| gaussian_derivative_1d(*sigma, beta[i], r[i]))
                    .product())
            }
            KernelKind::Yukawa { .. } => Err(Error::Unsupported(
                "derivatives of the singular Yukawa kernel".into(),
            )),
            KernelKind::PolyTest { poly } => {
                if beta[1] != 0 {
                    return Err(Error::InvalidInput("1D kernel has no y derivative".into()));
                }
                Ok(poly.partial([beta[0], 0]).eval([r[0], 0.0]))
            }
        }
    }

    /// Smallest radius beyond which `|K| ≤ tol · K_ref`, where `K_ref` is the
    /// peak for the Gaussian and the exponential factor's value at 0 for Yukawa.
    pub fn truncation_radius(&self, tol: f64) -> Result<f64> {
        if !(tol > 0.0 && tol <= 1.0) {
            return Err(Error::InvalidInput(format!("tolerance must lie in (0, 1], got {tol}")));
        }
        match &self.kind {
            KernelKind::Gaussian { sigma } => Ok(sigma * (-2.0 * tol.ln()).sqrt()),
            KernelKind::Yukawa { lambda, .. } => Ok(-lambda * tol.ln()),
            KernelKind::PolyTest { .. } => Err(Error::Unsupported(
                "polynomial kernels have unbounded support".into(),
            )),
        }
    }
}

pub fn gaussian_1d(sigma: f64, x: f64) -> f64 {
    (-x * x / (2.0 * sigma * sigma)).exp()
}

/// `d^n/dx^n exp(-x²/2σ²)` via the Hermite recurrence `He_{k+1} = t He_k - k He_{k-1}`.
pub fn gaussian_derivative_1d(sigma: f64, n: usize, x: f64) -> f64 {
    let t = x / sigma;
    let g = (-0.5 * t * t).exp();
    if n == 0 {
        return g;
    }
    let (mut h0, mut h1) = (1.0, t);
    for k in 1..n {
        let h2 = t * h1 - k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * h1 * g / sigma.powi(n as i32)
}
