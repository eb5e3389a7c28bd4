//! The nonlinear boundary operator `H(φ)`.
//!
//! `H(φ)(s) = -(1 + φ'(s)²)^{-1/2} ℋ(φ)(s)` where `ℋ` is a double integral
//! over the circle parameter `θ` (through `p = |σ - e₁|`) and the axial
//! offset `ξ`:
//!
//! ```text
//! ℋ(φ)(s) = ∫_{S¹} ∫_ℝ  [ (φ(s) - φ(s-ξ) - ξ φ'(s)) + ½ p² φ(s-ξ) ]
//!                        · φ(s-ξ) √(1 + φ'(s-ξ)²)  /  D^{3/2}   dξ dσ,
//! D = ξ² + (φ(s) - φ(s-ξ))² + p² φ(s) φ(s-ξ).
//! ```
//!
//! For constant profiles `H(λ) ≡ -2π`, so `H(φ) + 2π` is the equilibrium
//! residual.
//!
//! Everything except the bare `ξ` in the numerator and denominator is
//! `2π`-periodic in `ξ`, so the axial line integral is folded exactly onto
//! the unit cell `[-π, π]` with the lattice sums [`lattice_sums`]. Two
//! independent evaluation strategies implement this behind the
//! [`HEvaluator`] trait and are selectable by name:
//!
//! * `"regularized"` ([`RegularizedEvaluator`]) — the production evaluator.
//!   Symmetrizes the cell integral in `ξ`, groups the first numerator with
//!   the second differences `L_e(ξ) = 2φ(s) - φ(s-ξ) - φ(s+ξ)` and
//!   `L_d(ξ) = φ(s+ξ) - φ(s-ξ)` (both evaluated by exact trigonometric
//!   identities, free of cancellation), integrates `θ` by a tanh-sinh rule
//!   (the integrand has a `ln sin θ` endpoint singularity), and uses
//!   Euler–Maclaurin accelerated lattice tails.
//! * `"direct"` ([`DirectEvaluator`]) — the slow cross-validation oracle.
//!   Takes the numerators literally, uses graded Gauss–Legendre panels in a
//!   different θ parametrization, an unsymmetrized `ξ` cell, and brute-force
//!   lattice partial sums. It shares no discretization choices with the
//!   regularized path.

mod direct;
mod lattice;
mod regularized;

pub use direct::DirectEvaluator;
pub use lattice::{lattice_sums, lattice_sums_brute};
pub use regularized::RegularizedEvaluator;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::profile::PeriodicProfile;

/// Quadrature settings for the operator evaluation.
///
/// The axial cell `[-π, π]` is discretized by geometric panels with ratio 4
/// running from `π·10^{-xi_min_exp}` up to `π` (the integrand develops a
/// layer of width `~p·φ` at `ξ = 0` as `θ -> 0`, and the nested grading
/// resolves every layer scale at once).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct QuadratureSpec {
    /// Tanh-sinh node count for `θ ∈ [0, π/2]`.
    pub theta_nodes: usize,
    /// Gauss–Legendre nodes per geometric axial panel.
    pub xi_nodes_per_panel: usize,
    /// Smallest axial panel edge is `π·10^{-xi_min_exp}`.
    pub xi_min_exp: f64,
    /// Direct lattice terms per side before the Euler–Maclaurin tail.
    pub lattice_terms: usize,
    /// Self-check target: refining the discretization must move the result
    /// by less than this (relative).
    pub target_rel_error: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            theta_nodes: 72,
            xi_nodes_per_panel: 10,
            xi_min_exp: 12.0,
            lattice_terms: 12,
            target_rel_error: 1e-9,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.theta_nodes < 24 {
            return Err(Error::domain("QuadratureSpec", "theta_nodes must be >= 24"));
        }
        if self.xi_nodes_per_panel < 4 {
            return Err(Error::domain("QuadratureSpec", "xi_nodes_per_panel must be >= 4"));
        }
        if !(self.xi_min_exp > 0.0) || self.lattice_terms == 0 {
            return Err(Error::domain("QuadratureSpec", "panel extent and lattice terms must be positive"));
        }
        if !(self.target_rel_error > 0.0) {
            return Err(Error::domain("QuadratureSpec", "target_rel_error must be > 0"));
        }
        Ok(())
    }

    /// Elevated settings for verification passes.
    pub fn elevated(&self) -> QuadratureSpec {
        QuadratureSpec {
            theta_nodes: self.theta_nodes.max(96),
            xi_nodes_per_panel: self.xi_nodes_per_panel + 2,
            xi_min_exp: self.xi_min_exp + 0.5,
            lattice_terms: self.lattice_terms.max(16),
            target_rel_error: self.target_rel_error * 0.1,
        }
    }

    /// A differently refined variant for the doubling self-check.
    pub fn refined(&self) -> QuadratureSpec {
        QuadratureSpec {
            theta_nodes: self.theta_nodes * 3 / 2 + 1,
            xi_nodes_per_panel: self.xi_nodes_per_panel + 3,
            xi_min_exp: self.xi_min_exp,
            lattice_terms: self.lattice_terms * 2,
            target_rel_error: self.target_rel_error,
        }
    }
}

/// One strategy for evaluating the boundary operator at a point.
pub trait HEvaluator: Sync {
    fn name(&self) -> &'static str;

    /// `H(φ)(s)`.
    fn evaluate(&self, profile: &PeriodicProfile, s: f64, spec: &QuadratureSpec) -> Result<f64>;
}

static DIRECT: DirectEvaluator = DirectEvaluator;
static REGULARIZED: RegularizedEvaluator = RegularizedEvaluator;

/// Look up an evaluator by name (`"direct"` or `"regularized"`).
pub fn evaluator(name: &str) -> Option<&'static dyn HEvaluator> {
    match name {
        "direct" => Some(&DIRECT),
        "regularized" => Some(&REGULARIZED),
        _ => None,
    }
}

pub fn evaluator_names() -> &'static [&'static str] {
    &["direct", "regularized"]
}

/// The production evaluator.
pub fn default_evaluator() -> &'static dyn HEvaluator {
    &REGULARIZED
}

/// Samples of the equilibrium residual `H(φ)(s_j) + 2π` on a uniform grid
/// of `[0, π]` (endpoints included; evenness halves the domain).
pub fn equilibrium_residual(
    ev: &dyn HEvaluator,
    profile: &PeriodicProfile,
    grid_size: usize,
    spec: &QuadratureSpec,
) -> Result<Vec<f64>> {
    if grid_size < 2 {
        return Err(Error::domain("equilibrium_residual", "grid_size must be >= 2"));
    }
    profile.ensure_positive()?;
    (0..grid_size)
        .into_par_iter()
        .map(|j| {
            let s = j as f64 * std::f64::consts::PI / (grid_size - 1) as f64;
            Ok(ev.evaluate(profile, s, spec)? + 2.0 * std::f64::consts::PI)
        })
        .collect()
}

/// Evaluate with the given spec and its refinement; the pair must agree to
/// `target_rel_error`, which is the quadrature self-consistency contract.
pub fn h_with_self_check(
    ev: &dyn HEvaluator,
    profile: &PeriodicProfile,
    s: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let a = ev.evaluate(profile, s, spec)?;
    let b = ev.evaluate(profile, s, &spec.refined())?;
    let delta = (a - b).abs();
    let tol = spec.target_rel_error * (1.0 + a.abs());
    if delta > tol {
        return Err(Error::QuadratureNonConvergence { context: "operator evaluation", delta, tol });
    }
    Ok(b)
}

/// Shared per-evaluation state: everything about the profile at the sample
/// point that does not depend on `θ` or `ξ`.
pub(crate) struct PointContext {
    pub phi_s: f64,
    pub dphi_s: f64,
    /// `sqrt(1 + φ'(s)²)`, the prefactor of `H = -ℋ/…`.
    pub slope_norm: f64,
}

impl PointContext {
    pub fn new(profile: &PeriodicProfile, s: f64) -> Self {
        let phi_s = profile.eval(s);
        let dphi_s = profile.deriv(s);
        Self { phi_s, dphi_s, slope_norm: (1.0 + dphi_s * dphi_s).sqrt() }
    }
}
