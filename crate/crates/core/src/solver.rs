//! Fourier–Galerkin Newton continuation of the bifurcating branches.
//!
//! Branch `k` bifurcates from the straight cylinder at radius `λ*/k`. Along
//! the branch the profile is parametrized by its `cos(k·)` amplitude `s`:
//!
//! ```text
//! φ = λ + s (cos(k·) + μ),       <μ, cos(k·)> = 0,  <μ, 1> = 0,
//! ```
//!
//! with the radius `λ` and the free coefficients of `μ` as unknowns. The
//! equations are the cosine projections `<H(φ) + 2π, cos(l·)>/π = 0` for
//! `l = 1..N`; the `cos(k·)` equation pairs with the `λ` unknown through the
//! transversality `V'(λ*) > 0`. The mode-0 projection is not part of the
//! system (the codomain is zero-mean); it is logged as a diagnostic and
//! flagged when it exceeds 1e-6.
//!
//! The Jacobian is built column-by-column by forward differences and reused
//! across iterations while convergence stays fast (rebuilt on stagnation),
//! which cuts the dominant cost of continuation by a factor of a few.

use rayon::prelude::*;
use serde::Serialize;

use crate::dispersion::CriticalRadius;
use crate::error::{Error, Result};
use crate::operator::{equilibrium_residual, HEvaluator, QuadratureSpec};
use crate::profile::{dct_coefficients, PeriodicProfile};

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Galerkin truncation `N`.
    pub modes: usize,
    /// Convergence target for the coefficient-space residual sup-norm.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Forward-difference step for Jacobian columns.
    pub fd_eps: f64,
    /// Amplitude increment of the continuation.
    pub s_step: f64,
    /// Final amplitude (both signs are traced).
    pub s_max: f64,
    pub quad: QuadratureSpec,
    /// Dense grid size used by [`verify_branch_point`].
    pub verify_grid: usize,
    /// Verification threshold on the dense-grid residual sup-norm.
    pub verify_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            modes: 32,
            newton_tol: 1e-10,
            max_newton_iters: 25,
            fd_eps: 1e-6,
            s_step: 5e-3,
            s_max: 0.05,
            quad: QuadratureSpec::default(),
            verify_grid: 256,
            verify_tol: 1e-7,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, k: u32) -> Result<()> {
        self.quad.validate()?;
        if self.modes < 2 * k as usize {
            return Err(Error::domain(
                "SolverConfig",
                format!("modes = {} must be >= 2k = {}", self.modes, 2 * k),
            ));
        }
        if !(self.newton_tol > 0.0 && self.fd_eps > 0.0 && self.s_step > 0.0 && self.s_max >= 0.0)
        {
            return Err(Error::domain("SolverConfig", "tolerances and steps must be positive"));
        }
        if self.max_newton_iters == 0 || self.verify_grid < 8 {
            return Err(Error::domain("SolverConfig", "iteration and grid counts too small"));
        }
        Ok(())
    }

    /// Projection grid: `2N + 1` uniform samples of `[0, π]` make the cosine
    /// projections exact for trigonometric polynomials of degree `<= N`.
    fn projection_points(&self) -> usize {
        2 * self.modes + 1
    }
}

/// One continuation state on branch `k`.
#[derive(Debug, Clone, Serialize)]
pub struct BranchPoint {
    pub k: u32,
    /// Signed amplitude of the `cos(k·)` component.
    pub s: f64,
    /// Radius `λ_k(s)`.
    pub lambda: f64,
    /// Orthogonal correction; `μ_0 = μ_k = 0` structurally.
    pub mu: PeriodicProfile,
    /// Sup-norm of the Galerkin residual vector at acceptance.
    #[serde(skip)]
    pub residual_galerkin: f64,
    /// Dense-grid sup-norm of `H(φ) + 2π` from verification.
    #[serde(rename = "residual_sup")]
    pub residual_grid_sup: f64,
    /// Mode-0 projection of the residual (diagnostic, not solved for).
    pub mode0_residual: f64,
    pub verified: bool,
}

impl BranchPoint {
    /// The full profile `φ = λ + s(cos(k·) + μ)`.
    pub fn profile(&self) -> PeriodicProfile {
        reconstruct_profile(self.k, self.s, self.lambda, &self.mu)
    }
}

/// `φ = λ + s (cos(k·) + μ)`.
pub fn reconstruct_profile(k: u32, s: f64, lambda: f64, mu: &PeriodicProfile) -> PeriodicProfile {
    let n = mu.order().max(k as usize);
    let mut coeffs = vec![0.0; n + 1];
    coeffs[0] = lambda;
    for (l, c) in coeffs.iter_mut().enumerate().skip(1) {
        *c = s * mu.coeff(l);
    }
    coeffs[k as usize] += s;
    PeriodicProfile::new(coeffs)
}

/// Galerkin projections of the equilibrium residual for the profile
/// `λ + s(cos(k·) + μ)`: returns `(<R, cos(l·)>/π for l = 1..N, mode-0)`.
pub fn residual_galerkin(
    ev: &dyn HEvaluator,
    lambda: f64,
    mu: &PeriodicProfile,
    k: u32,
    s: f64,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, f64)> {
    let profile = reconstruct_profile(k, s, lambda, mu);
    profile.ensure_positive()?;
    let samples = equilibrium_residual(ev, &profile, cfg.projection_points(), &cfg.quad)?;
    let coeffs = dct_coefficients(&samples, cfg.modes);
    Ok((coeffs[1..].to_vec(), coeffs[0]))
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Unknown vector layout: `x[0] = λ`, then the μ coefficients for modes
/// `1..=N` except `k`.
fn unpack(x: &[f64], k: u32, modes: usize) -> (f64, PeriodicProfile) {
    let mut mu = PeriodicProfile::zeros(modes);
    let mut idx = 1;
    for l in 1..=modes {
        if l != k as usize {
            mu.set_coeff(l, x[idx]);
            idx += 1;
        }
    }
    (x[0], mu)
}

struct NewtonState {
    x: Vec<f64>,
    residual: Vec<f64>,
    mode0: f64,
}

type Factorization = nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>;

/// Solve the square system for one amplitude `s` starting from
/// `(lambda, mu)`. Returns an unverified [`BranchPoint`]
/// (`residual_grid_sup` is filled in by [`verify_branch_point`]).
pub fn newton_solve(
    ev: &dyn HEvaluator,
    k: u32,
    s: f64,
    initial: (f64, &PeriodicProfile),
    cfg: &SolverConfig,
) -> Result<BranchPoint> {
    newton_solve_reusing(ev, k, s, initial, cfg, &mut None)
}

/// Quasi-Newton variant: a factorization carried over from a nearby
/// continuation step is used as long as it keeps making progress, so most
/// steps skip the expensive finite-difference Jacobian build entirely.
fn newton_solve_reusing(
    ev: &dyn HEvaluator,
    k: u32,
    s: f64,
    initial: (f64, &PeriodicProfile),
    cfg: &SolverConfig,
    jacobian: &mut Option<Factorization>,
) -> Result<BranchPoint> {
    cfg.validate(k)?;
    let modes = cfg.modes;
    let mut x = vec![0.0; modes];
    x[0] = initial.0;
    let mut idx = 1;
    for l in 1..=modes {
        if l != k as usize {
            x[idx] = initial.1.coeff(l);
            idx += 1;
        }
    }

    let eval_residual = |x: &[f64]| -> Result<(Vec<f64>, f64)> {
        let (lambda, mu) = unpack(x, k, modes);
        residual_galerkin(ev, lambda, &mu, k, s, cfg)
    };

    let (r0, m0) = eval_residual(&x)?;
    let mut state = NewtonState { x, residual: r0, mode0: m0 };

    for iter in 0..cfg.max_newton_iters {
        let rn = sup_norm(&state.residual);
        if rn <= cfg.newton_tol {
            let (lambda, mu) = unpack(&state.x, k, modes);
            return Ok(BranchPoint {
                k,
                s,
                lambda,
                mu,
                residual_galerkin: rn,
                residual_grid_sup: f64::NAN,
                mode0_residual: state.mode0,
                verified: false,
            });
        }

        let fresh = jacobian.is_none();
        if fresh {
            *jacobian = Some(build_jacobian(&state.x, &state.residual, &eval_residual, cfg)?);
        }
        let lu = jacobian.as_ref().unwrap();

        let rhs = nalgebra::DVector::from_iterator(modes, state.residual.iter().map(|r| -r));
        let delta = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Internal("singular Newton matrix".into()))?;

        // Damped update: halve on positivity loss or (with a fresh Jacobian)
        // on residual growth.
        let mut step = 1.0f64;
        let mut accepted = None;
        for _ in 0..12 {
            let trial: Vec<f64> =
                state.x.iter().zip(delta.iter()).map(|(xi, di)| xi + step * di).collect();
            let (lambda_t, mu_t) = unpack(&trial, k, modes);
            let profile = reconstruct_profile(k, s, lambda_t, &mu_t);
            if profile.min_on_dense_grid() <= 0.0 {
                step *= 0.5;
                continue;
            }
            let (r_t, m_t) = eval_residual(&trial)?;
            let rn_t = sup_norm(&r_t);
            if rn_t.is_finite() && (rn_t < rn || !fresh) {
                accepted = Some((trial, r_t, m_t, rn_t));
                break;
            }
            step *= 0.5;
        }

        match accepted {
            Some((trial, r_t, m_t, rn_t)) => {
                // A stale Jacobian that stops making progress gets rebuilt.
                if rn_t > 0.5 * rn {
                    *jacobian = None;
                }
                state = NewtonState { x: trial, residual: r_t, mode0: m_t };
            }
            None if !fresh => {
                *jacobian = None; // retry this iterate with a fresh Jacobian
            }
            None => {
                return Err(Error::NewtonNonConvergence { iters: iter, residual: rn });
            }
        }
    }

    let rn = sup_norm(&state.residual);
    if rn <= cfg.newton_tol {
        let (lambda, mu) = unpack(&state.x, k, modes);
        return Ok(BranchPoint {
            k,
            s,
            lambda,
            mu,
            residual_galerkin: rn,
            residual_grid_sup: f64::NAN,
            mode0_residual: state.mode0,
            verified: false,
        });
    }
    Err(Error::NewtonNonConvergence { iters: cfg.max_newton_iters, residual: rn })
}

fn build_jacobian<F>(
    x: &[f64],
    base_residual: &[f64],
    eval_residual: &F,
    cfg: &SolverConfig,
) -> Result<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>
where
    F: Fn(&[f64]) -> Result<(Vec<f64>, f64)> + Sync,
{
    let n = x.len();
    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let h = cfg.fd_eps * if j == 0 { x[0].abs().max(1.0) } else { 1.0 };
            let mut xp = x.to_vec();
            xp[j] += h;
            let (rp, _) = eval_residual(&xp)?;
            Ok(rp.iter().zip(base_residual).map(|(a, b)| (a - b) / h).collect())
        })
        .collect::<Result<_>>()?;
    let mat = nalgebra::DMatrix::from_fn(n, n, |i, j| columns[j][i]);
    Ok(mat.lu())
}

/// Verification report for one branch point.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub sup_norm: f64,
    pub mode0_residual: f64,
    pub min_phi: f64,
    /// `<μ, cos(k·)>` — structurally zero.
    pub mu_k_component: f64,
    pub verified: bool,
}

/// Recompute the residual on a dense grid at elevated quadrature settings.
pub fn verify_branch_point(
    ev: &dyn HEvaluator,
    point: &BranchPoint,
    dense_grid: usize,
    cfg: &SolverConfig,
) -> Result<VerifyReport> {
    let profile = point.profile();
    let min_phi = profile.min_on_dense_grid();
    let samples = equilibrium_residual(ev, &profile, dense_grid, &cfg.quad.elevated())?;
    let sup = sup_norm(&samples);
    let coeffs = dct_coefficients(&samples, 0);
    Ok(VerifyReport {
        sup_norm: sup,
        mode0_residual: coeffs[0],
        min_phi,
        mu_k_component: point.mu.coeff(point.k as usize),
        verified: sup < cfg.verify_tol,
    })
}

/// A traced branch. `stopped_early` carries the reason when the
/// continuation could not reach `s_max` (the bifurcation theory only
/// guarantees some neighborhood of `s = 0`). `reports` are the per-point
/// verification reports, aligned with `points`.
#[derive(Debug, Clone, Serialize)]
pub struct BranchResult {
    pub points: Vec<BranchPoint>,
    pub reports: Vec<VerifyReport>,
    pub stopped_early: Option<String>,
    pub warnings: Vec<String>,
}

/// Trace branch `k` from `(λ*/k, μ = 0, s = 0)` in both amplitude
/// directions, verifying every accepted point.
pub fn trace_branch(
    ev: &dyn HEvaluator,
    k: u32,
    critical: &CriticalRadius,
    cfg: &SolverConfig,
) -> Result<BranchResult> {
    cfg.validate(k)?;
    let lambda_k = critical.lambda_star / k as f64;
    let mut points = Vec::new();
    let mut reports = Vec::new();
    let mut warnings = Vec::new();
    let mut stopped_early = None;

    // s = 0: the constant cylinder solves the system for every λ, and the
    // k-mode equation degenerates there (any λ is a solution), so the
    // bifurcation point is emitted directly rather than solved for.
    let mu0 = PeriodicProfile::zeros(cfg.modes);
    let (r0, m0) = residual_galerkin(ev, lambda_k, &mu0, k, 0.0, cfg)?;
    let mut origin = BranchPoint {
        k,
        s: 0.0,
        lambda: lambda_k,
        mu: mu0,
        residual_galerkin: sup_norm(&r0),
        residual_grid_sup: f64::NAN,
        mode0_residual: m0,
        verified: false,
    };
    let report = verify_branch_point(ev, &origin, cfg.verify_grid, cfg)?;
    origin.residual_grid_sup = report.sup_norm;
    origin.verified = report.verified;
    points.push(origin);
    reports.push(report);

    for sign in [1.0, -1.0] {
        let mut lambda = lambda_k;
        let mut mu = PeriodicProfile::zeros(cfg.modes);
        let mut step_idx = 1usize;
        let mut carried_jacobian: Option<Factorization> = None;
        loop {
            let s = sign * step_idx as f64 * cfg.s_step;
            if s.abs() > cfg.s_max + 1e-12 {
                break;
            }
            match newton_solve_reusing(ev, k, s, (lambda, &mu), cfg, &mut carried_jacobian) {
                Ok(mut point) => {
                    let report = verify_branch_point(ev, &point, cfg.verify_grid, cfg)?;
                    point.residual_grid_sup = report.sup_norm;
                    point.verified = report.verified;
                    if point.mode0_residual.abs() > 1e-6 {
                        warnings.push(format!(
                            "mode-0 residual {:.3e} at (k = {k}, s = {s})",
                            point.mode0_residual
                        ));
                    }
                    lambda = point.lambda;
                    mu = point.mu.clone();
                    points.push(point);
                    reports.push(report);
                    step_idx += 1;
                }
                Err(err) => {
                    stopped_early = Some(format!("branch k = {k} stopped at s = {s}: {err}"));
                    break;
                }
            }
        }
        if stopped_early.is_some() {
            break;
        }
    }

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].s.partial_cmp(&points[b].s).unwrap());
    let points: Vec<BranchPoint> = order.iter().map(|&i| points[i].clone()).collect();
    let reports: Vec<VerifyReport> = order.iter().map(|&i| reports[i].clone()).collect();
    Ok(BranchResult { points, reports, stopped_early, warnings })
}

/// Finite-difference estimate of the operator Jacobian's mode-diagonal at a
/// constant profile: entry `l` approximates
/// `∂<H(λ + a_l cos(l·)) + 2π, cos(l·)>/π / ∂a_l`, which is `-V(λl)/λ`.
/// At `λ = λ*/k` the entry `l = k` vanishes — the bifurcation signature.
pub fn jacobian_mode_diagonal(
    ev: &dyn HEvaluator,
    lambda: f64,
    modes: usize,
    fd_step: f64,
    quad: &QuadratureSpec,
) -> Result<Vec<f64>> {
    if !(lambda > 0.0 && fd_step > 0.0) {
        return Err(Error::domain("jacobian_mode_diagonal", "lambda and fd_step must be > 0"));
    }
    let m = 2 * modes + 1;
    (1..=modes)
        .map(|l| {
            let h = fd_step * lambda;
            let mut plus = PeriodicProfile::zeros(l);
            plus.set_coeff(0, lambda);
            plus.set_coeff(l, h);
            let mut minus = PeriodicProfile::zeros(l);
            minus.set_coeff(0, lambda);
            minus.set_coeff(l, -h);
            let rp = equilibrium_residual(ev, &plus, m, quad)?;
            let rm = equilibrium_residual(ev, &minus, m, quad)?;
            let cp = dct_coefficients(&rp, l);
            let cm = dct_coefficients(&rm, l);
            Ok((cp[l] - cm[l]) / (2.0 * h))
        })
        .collect()
}

/// CSV flattening: one row per (point, coefficient).
pub fn branch_to_csv(points: &[BranchPoint]) -> String {
    let mut out = String::from(
        "k,s,lambda,coeff_index,coeff_value,residual_sup,mode0_residual,verified\n",
    );
    for p in points {
        for (l, &c) in p.mu.coeffs().iter().enumerate() {
            out.push_str(&format!(
                "{},{:.12e},{:.12e},{},{:.12e},{:.12e},{:.12e},{}\n",
                p.k, p.s, p.lambda, l, c, p.residual_grid_sup, p.mode0_residual, p.verified
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::find_lambda_star;
    use crate::operator::default_evaluator;

    fn small_cfg() -> SolverConfig {
        SolverConfig { modes: 8, s_max: 0.01, verify_grid: 64, ..SolverConfig::default() }
    }

    #[test]
    fn residual_vanishes_on_trivial_branch() {
        let ev = default_evaluator();
        let cfg = small_cfg();
        let mu = PeriodicProfile::zeros(cfg.modes);
        for &lam in &[0.6, 0.7] {
            let (r, m0) = residual_galerkin(ev, lam, &mu, 1, 0.0, &cfg).unwrap();
            assert!(sup_norm(&r) < 1e-8, "λ = {lam}: {:e}", sup_norm(&r));
            assert!(m0.abs() < 1e-8);
        }
    }

    #[test]
    fn newton_at_origin_returns_immediately() {
        let ev = default_evaluator();
        let cfg = small_cfg();
        let cr = find_lambda_star(1e-12).unwrap();
        let mu = PeriodicProfile::zeros(cfg.modes);
        let p = newton_solve(ev, 1, 0.0, (cr.lambda_star, &mu), &cfg).unwrap();
        assert_eq!(p.lambda, cr.lambda_star);
        assert!(p.residual_galerkin < 1e-8);
    }

    #[test]
    fn linearized_residual_structure_near_bifurcation() {
        // At (λ*, s) with μ = 0 and tiny s, the cos component l = k is o(s)
        // and the others are O(s²).
        let ev = default_evaluator();
        let cfg = small_cfg();
        let cr = find_lambda_star(1e-12).unwrap();
        let mu = PeriodicProfile::zeros(cfg.modes);
        let s = 1e-4;
        let (r, _) = residual_galerkin(ev, cr.lambda_star, &mu, 1, s, &cfg).unwrap();
        assert!(r[0].abs() < 1e-6 * 10.0, "kernel-mode component {:e}", r[0]);
        for (i, &c) in r.iter().enumerate().skip(1) {
            assert!(c.abs() < 100.0 * s * s, "mode {}: {:e}", i + 1, c);
        }
    }

    #[test]
    fn csv_layout() {
        let p = BranchPoint {
            k: 1,
            s: 0.0,
            lambda: 0.5,
            mu: PeriodicProfile::zeros(2),
            residual_galerkin: 0.0,
            residual_grid_sup: 0.0,
            mode0_residual: 0.0,
            verified: true,
        };
        let csv = branch_to_csv(&[p]);
        assert!(csv.starts_with(
            "k,s,lambda,coeff_index,coeff_value,residual_sup,mode0_residual,verified\n"
        ));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn branch_point_json_schema() {
        let p = BranchPoint {
            k: 2,
            s: 0.01,
            lambda: 0.28,
            mu: PeriodicProfile::zeros(4),
            residual_galerkin: 1e-12,
            residual_grid_sup: 1e-9,
            mode0_residual: 1e-10,
            verified: true,
        };
        let json = serde_json::to_value(&p).unwrap();
        for key in ["k", "s", "lambda", "mu", "residual_sup", "mode0_residual", "verified"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert!(json.get("residual_galerkin").is_none());
        assert_eq!(json["mu"]["N"], 4);
    }

    #[test]
    fn config_validation() {
        let cfg = SolverConfig::default();
        assert!(cfg.validate(1).is_ok());
        assert!(cfg.validate(20).is_err());
    }
}
