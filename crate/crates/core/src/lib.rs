//! Numerical construction of unbounded equilibrium surfaces in three
//! dimensions: periodic perturbations of a straight cylinder whose constant
//! surface charge density is an electrostatic equilibrium.
//!
//! The crate is organized bottom-up:
//!
//! * [`bessel`] — modified Bessel functions `I0, I1, K0, K1, K2` to near
//!   machine precision.
//! * [`quad`] — Gauss–Legendre and tanh-sinh quadrature building blocks.
//! * [`kernels`] — the convolution kernels `g`, `G`, `G0`, `G1`, `F` of the
//!   linearized boundary operator.
//! * [`dispersion`] — the dispersion relation `V(rho)`, its derivative and
//!   quadrature oracle, and the critical radius `lambda_star`.
//! * [`profile`] — even `2π`-periodic boundary profiles as cosine series.
//! * [`operator`] — the nonlinear boundary operator `H(φ)` evaluated by two
//!   independent quadrature strategies behind a common trait.
//! * [`linearized`] — the linearization `L_λ` at constant profiles and its
//!   diagonal spectral inverse.
//! * [`solver`] — Fourier–Galerkin Newton continuation of the bifurcating
//!   branches of nonconstant equilibrium profiles.

pub mod bessel;
pub mod dispersion;
pub mod error;
pub mod kernels;
pub mod linearized;
pub mod operator;
pub mod profile;
pub mod quad;
pub mod solver;

pub use error::{Error, Result};
pub use profile::PeriodicProfile;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
