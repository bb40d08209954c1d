//! Quasi-Trefftz ("pseudoharmonic") basis functions for electrostatics with a
//! nonlocal, domain-restricted convolution constitutive law
//!
//! ```text
//! D(r) = eps_loc E(r) + eps_nl ∫_Ω K(r - r') E(r') dr',    E = -∇u
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`kernels`]: convolution kernels and their exact derivatives
//! * [`polynomials`]: dense 1D/2D polynomials about an expansion center
//! * [`numerics`]: Gauss-Legendre rules, SVD null spaces, weighted least squares
//! * [`nlconv`]: the restricted-domain convolution engine and the D field
//! * [`trefftz`]: bulk and interface pseudoharmonic function sets
//! * [`bvp1d`]: the 1D two-point nonlocal boundary-value problem
//! * [`metrics`]: approximation error and the Trefftz-vs-Taylor convergence study

pub mod bvp1d;
pub mod csv;
mod error;
pub mod geometry;
pub mod kernels;
pub mod metrics;
pub mod nlconv;
pub mod numerics;
pub mod polynomials;
pub mod presets;
pub mod trefftz;

pub use error::{Error, Result};
pub use geometry::{Dim, MultiIndex, Point, Rect};
pub use kernels::{Kernel, KernelKind, YukawaPrefactor};
pub use nlconv::{ConvConfig, ConvDomain};
pub use polynomials::Polynomial;
pub use trefftz::{ConstraintIndexing, TrefftzSet};

