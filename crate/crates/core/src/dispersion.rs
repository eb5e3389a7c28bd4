//! The dispersion relation of the linearized boundary operator.
//!
//! The linearization at a constant radius acts diagonally on the Fourier
//! basis with eigenvalues `V(λk)`, where
//!
//! ```text
//! V(ρ) = 4πρ I1(ρ) (ρ K1(ρ) - K0(ρ))
//!      = 4πρ² I1(ρ)K1(ρ) + 4πρ I0(ρ)K1(ρ) - 4π
//!      = V1(ρ) + V2(ρ) - V3(ρ) - 2π
//! ```
//!
//! with components
//!
//! ```text
//! V1 = 2πρ² (I0 K0 + I1 K1)     V2 = 4πρ I0 K1 - 2π     V3 = 2πρ² (I0 K0 - I1 K1)
//! ```
//!
//! `V` is negative on `(0, 1/2)`, grows like `2πρ`, and has a unique zero
//! `λ*` (the critical radius) characterized by `ρ K1(ρ) = K0(ρ)` and pinned
//! to the interval `(1/2, (1+√17)/8)`, with `V'(λ*) > 0`. Mode `k` of the
//! nonlinear problem bifurcates from the cylinder of radius `λ*/k`.
//!
//! [`v_quadrature`] evaluates `V` directly from its defining kernel
//! integrals without any Bessel evaluation and serves as the independent
//! oracle for the closed form.

use std::f64::consts::PI;

use crate::bessel::{i0, i1, k0_k1};
use crate::error::{Error, Result};
use crate::kernels::{
    axial_table, axial_table_control, f_asymptotic, g_asymptotic, tail_big_g, AxialTable,
    KernelEvalConfig,
};
use crate::quad::{GaussLegendre, TanhSinh};

/// Upper end of the bracket containing the critical radius: `(1+√17)/8`.
pub fn bracket_hi() -> f64 {
    (1.0 + 17.0f64.sqrt()) / 8.0
}

/// Lower end of the bracket: `V < 0` on `(0, 1/2]`.
pub const BRACKET_LO: f64 = 0.5;

/// One point of the dispersion curve with its component breakdown.
#[derive(Debug, Clone, Copy)]
pub struct DispersionPoint {
    pub rho: f64,
    pub v: f64,
    pub v_prime: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

/// The unique positive zero of `V`.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct CriticalRadius {
    pub lambda_star: f64,
    /// `|V(λ*)|` at the returned root.
    pub residual: f64,
    pub v_prime_at_root: f64,
}

fn check_rho(rho: f64, context: &'static str) -> Result<()> {
    if !(rho > 0.0) {
        return Err(Error::domain(context, format!("rho = {rho} must be > 0")));
    }
    Ok(())
}

/// `V(ρ) = 4πρ I1(ρ)(ρ K1(ρ) - K0(ρ))`.
pub fn v(rho: f64) -> Result<f64> {
    check_rho(rho, "dispersion::v")?;
    let (b0, b1) = k0_k1(rho);
    Ok(4.0 * PI * rho * i1(rho) * (rho * b1 - b0))
}

/// `V'(ρ) = 4πρ²(I0K1 - I1K0) - 4πρ(I0K0 - I1K1)`.
pub fn v_prime(rho: f64) -> Result<f64> {
    check_rho(rho, "dispersion::v_prime")?;
    let (b0, b1) = k0_k1(rho);
    let (a0, a1) = (i0(rho), i1(rho));
    Ok(4.0 * PI * rho * rho * (a0 * b1 - a1 * b0) - 4.0 * PI * rho * (a0 * b0 - a1 * b1))
}

/// The components `(V1, V2, V3)` in closed form.
pub fn components(rho: f64) -> Result<(f64, f64, f64)> {
    check_rho(rho, "dispersion::components")?;
    let (b0, b1) = k0_k1(rho);
    let (a0, a1) = (i0(rho), i1(rho));
    let v1 = 2.0 * PI * rho * rho * (a0 * b0 + a1 * b1);
    let v2 = 4.0 * PI * rho * a0 * b1 - 2.0 * PI;
    let v3 = 2.0 * PI * rho * rho * (a0 * b0 - a1 * b1);
    Ok((v1, v2, v3))
}

/// Full dispersion point at `ρ`.
pub fn point(rho: f64) -> Result<DispersionPoint> {
    let (v1, v2, v3) = components(rho)?;
    Ok(DispersionPoint { rho, v: v(rho)?, v_prime: v_prime(rho)?, v1, v2, v3 })
}

/// Eigenvalue `V(λk)` of the linearization at radius `λ` on mode `k`.
pub fn eigenvalue(lambda: f64, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("dispersion::eigenvalue", "k must be >= 1"));
    }
    check_rho(lambda, "dispersion::eigenvalue")?;
    v(lambda * k as f64)
}

// --- θ-quadrature oracles for the components -------------------------------

/// `8ρ² ∫_0^{π/2} cos²θ K0(2ρ sinθ) dθ`; equals `V1(ρ)`.
pub fn v1_theta_quadrature(rho: f64) -> Result<f64> {
    check_rho(rho, "dispersion::v1_theta_quadrature")?;
    let de = TanhSinh::cached(161);
    Ok(8.0 * rho * rho
        * de.integrate(0.0, 0.5 * PI, |th| {
            let c = th.cos();
            c * c * crate::bessel::k0(2.0 * rho * th.sin())
        }))
}

/// `8ρ ∫_0^{π/2} sinθ K1(2ρ sinθ) dθ`; equals `V2(ρ) = 4πρ I0 K1 - 2π`
/// (and tends to `2π` as `ρ -> 0+`).
pub fn v2_theta_quadrature(rho: f64) -> Result<f64> {
    check_rho(rho, "dispersion::v2_theta_quadrature")?;
    let de = TanhSinh::cached(161);
    Ok(8.0 * rho
        * de.integrate(0.0, 0.5 * PI, |th| {
            let s = th.sin();
            s * crate::bessel::k1(2.0 * rho * s)
        }))
}

/// `8ρ² ∫_0^{π/2} sin²θ K0(2ρ sinθ) dθ`; equals `V3(ρ)`.
pub fn v3_theta_quadrature(rho: f64) -> Result<f64> {
    check_rho(rho, "dispersion::v3_theta_quadrature")?;
    let de = TanhSinh::cached(161);
    Ok(8.0 * rho * rho
        * de.integrate(0.0, 0.5 * PI, |th| {
            let s = th.sin();
            s * s * crate::bessel::k0(2.0 * rho * s)
        }))
}

// --- defining-integral oracle ----------------------------------------------

/// `V(ρ) = ∫_ℝ (1 - cos ρt) G(t) dt + ∫_ℝ cos(ρt) F(t) dt - 2π`, evaluated
/// from the kernel quadratures only (no Bessel functions anywhere on this
/// path). The first integrand is written as `2ρ² g(t) sinc²(ρt/2)`, finite
/// at `t = 0`.
///
/// Two independently discretized passes must agree to the configured
/// tolerance, otherwise a non-convergence error is returned.
pub fn v_quadrature(rho: f64, cfg: &KernelEvalConfig) -> Result<f64> {
    check_rho(rho, "dispersion::v_quadrature")?;
    cfg.validate()?;
    let main = v_quadrature_pass(rho, axial_table(), 1.0);
    let control = v_quadrature_pass(rho, axial_table_control(), 0.7);
    let delta = (main - control).abs();
    let tol = 100.0 * cfg.target_rel_error * (1.0 + main.abs());
    if delta > tol {
        return Err(Error::QuadratureNonConvergence { context: "dispersion v_quadrature", delta, tol });
    }
    Ok(main)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn v_quadrature_pass(rho: f64, table: &AxialTable, panel_scale: f64) -> f64 {
    // Part A: cached table on [0, t_max].
    let mut ig = 0.0; // ∫ (1 - cos ρt) G
    let mut if_ = 0.0; // ∫ cos(ρt) F
    let q = 0.5 * rho;
    for i in 0..table.t.len() {
        let t = table.t[i];
        let s = sinc(q * t);
        ig += table.w[i] * 2.0 * rho * rho * table.g[i] * s * s;
        if_ += table.w[i] * (rho * t).cos() * table.f[i];
    }

    // Part B: oscillation-resolving extension on [t_max, T] with asymptotic
    // kernels. T is chosen so the neglected oscillatory tails stay below
    // ~3e-8 in absolute terms.
    let t_end = (1.7e9 / rho).powf(1.0 / 3.0).max(table.t_max * 1.5);
    let h = (0.5f64).min(PI / (4.0 * rho)) * panel_scale;
    let gl = GaussLegendre::cached(8);
    let panels = ((t_end - table.t_max) / h).ceil() as usize;
    let step = (t_end - table.t_max) / panels as f64;
    let mut ext = 0.0;
    for kp in 0..panels {
        let a = table.t_max + kp as f64 * step;
        ext += gl.integrate(a, a + step, |t| {
            let c = (rho * t).cos();
            (1.0 - c) * 4.0 * g_asymptotic(t) / (t * t) + c * f_asymptotic(t)
        });
    }

    // The non-oscillatory remainder of ∫ (1 - cos) G beyond T.
    let tail = tail_big_g(t_end);

    2.0 * (ig + if_ + ext + tail) - 2.0 * PI
}

// --- critical radius --------------------------------------------------------

/// Bisection on a sign-changing bracket.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Secant iteration started from two points (no bracketing requirement).
pub fn secant<F: FnMut(f64) -> f64>(mut f: F, mut x0: f64, mut x1: f64, tol: f64) -> Result<f64> {
    let mut f0 = f(x0);
    let mut f1 = f(x1);
    for _ in 0..100 {
        if (x1 - x0).abs() <= tol {
            return Ok(x1);
        }
        let denom = f1 - f0;
        if denom == 0.0 {
            return Ok(x1);
        }
        let x2 = x1 - f1 * (x1 - x0) / denom;
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f(x1);
        if f1 == 0.0 {
            return Ok(x1);
        }
    }
    Err(Error::Internal("secant iteration did not settle".into()))
}

/// Locate the critical radius `λ*`.
///
/// Roots are searched on `ρ ↦ ρK1(ρ) - K0(ρ)` (the `4πρI1` prefactor of `V`
/// is strictly positive and only adds conditioning noise), bracketed in
/// `[1/2, (1+√17)/8]`. Bisection and secant refinement must agree to 1e-12.
pub fn find_lambda_star(tol: f64) -> Result<CriticalRadius> {
    if !(tol > 0.0) {
        return Err(Error::domain("find_lambda_star", "tol must be > 0"));
    }
    find_lambda_star_of(tol, |rho| {
        let (b0, b1) = k0_k1(rho);
        rho * b1 - b0
    })
}

/// Same search, with the zero condition supplied by the caller. Used by the
/// negative-control tests to show that a corrupted special-function build is
/// rejected through a bracket failure.
pub fn find_lambda_star_of<F: FnMut(f64) -> f64 + Copy>(tol: f64, f: F) -> Result<CriticalRadius> {
    let lo = BRACKET_LO;
    let hi = bracket_hi();
    let from_bisect = bisect(f, lo, hi, 1e-15)?;
    let from_secant = secant(f, lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo), 1e-15)?;
    if (from_bisect - from_secant).abs() > 1e-12 {
        return Err(Error::Internal(format!(
            "root finders disagree: bisection {from_bisect}, secant {from_secant}"
        )));
    }
    let lambda_star = from_secant;
    if !(lo < lambda_star && lambda_star < hi) {
        return Err(Error::Internal(format!("root {lambda_star} escaped the bracket ({lo}, {hi})")));
    }
    let residual = v(lambda_star)?.abs();
    if residual > tol {
        return Err(Error::Internal(format!("|V(λ*)| = {residual:e} exceeds tol {tol:e}")));
    }
    let v_prime_at_root = v_prime(lambda_star)?;
    if v_prime_at_root <= 0.0 {
        return Err(Error::Internal(format!("V'(λ*) = {v_prime_at_root} is not positive")));
    }
    Ok(CriticalRadius { lambda_star, residual, v_prime_at_root })
}

/// Number of sign changes of `V` sampled at `n` uniform points of `[lo, hi]`.
pub fn sign_changes(lo: f64, hi: f64, n: usize) -> Result<usize> {
    let mut count = 0;
    let mut prev: Option<f64> = None;
    for i in 0..n {
        let rho = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let val = v(rho)?;
        if let Some(p) = prev {
            if p.signum() != val.signum() {
                count += 1;
            }
        }
        prev = Some(val);
    }
    Ok(count)
}

/// Convenience: `V` evaluated through `kernels::big_g`-free closed form but
/// cross-checked against the alternative algebraic form
/// `4πρ²I1K1 + 4πρI0K1 - 4π`; returns the pair for consistency tests.
pub fn v_both_forms(rho: f64) -> Result<(f64, f64)> {
    check_rho(rho, "dispersion::v_both_forms")?;
    let (b0, b1) = k0_k1(rho);
    let (a0, a1) = (i0(rho), i1(rho));
    let first = 4.0 * PI * rho * a1 * (rho * b1 - b0);
    let second = 4.0 * PI * rho * rho * a1 * b1 + 4.0 * PI * rho * a0 * b1 - 4.0 * PI;
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebraic_forms_agree() {
        for &rho in &[0.1, 0.5, 1.0, 3.0, 10.0, 50.0] {
            let (a, b) = v_both_forms(rho).unwrap();
            assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "rho = {rho}: {a} vs {b}");
        }
    }

    #[test]
    fn component_identity() {
        for &rho in &[0.2, 0.7, 2.0, 9.0] {
            let p = point(rho).unwrap();
            let recomposed = p.v1 + p.v2 - p.v3 - 2.0 * PI;
            assert!((p.v - recomposed).abs() <= 1e-10 * (1.0 + p.v.abs()));
        }
    }

    #[test]
    fn negative_below_half() {
        for &rho in &[0.05, 0.25, 0.4, 0.499] {
            assert!(v(rho).unwrap() < 0.0, "rho = {rho}");
        }
    }

    #[test]
    fn limits() {
        assert!(v(1e-4).unwrap().abs() < 1e-3);
        let big = v(200.0).unwrap() / 200.0;
        assert!((big - 2.0 * PI).abs() < 0.05, "V/ρ at 200 = {big}");
    }

    #[test]
    fn slope_approach_is_monotone() {
        // |V(ρ)/ρ - 2π| shrinks along 50, 100, 200.
        let defect = |rho: f64| (v(rho).unwrap() / rho - 2.0 * PI).abs();
        let (d1, d2, d3) = (defect(50.0), defect(100.0), defect(200.0));
        assert!(d1 > d2 && d2 > d3, "{d1} > {d2} > {d3} violated");
    }

    #[test]
    fn derivative_matches_fd() {
        for &rho in &[0.6, 1.0] {
            let h = 1e-6;
            let fd = (v(rho + h).unwrap() - v(rho - h).unwrap()) / (2.0 * h);
            assert!((fd - v_prime(rho).unwrap()).abs() < 1e-5, "rho = {rho}");
        }
    }

    #[test]
    fn component_quadratures() {
        for &rho in &[0.5, 1.0, 3.0] {
            let (v1, v2, v3) = components(rho).unwrap();
            let q1 = v1_theta_quadrature(rho).unwrap();
            let q2 = v2_theta_quadrature(rho).unwrap();
            let q3 = v3_theta_quadrature(rho).unwrap();
            assert!((q1 - v1).abs() <= 1e-8 * (1.0 + v1.abs()), "V1 at {rho}: {q1} vs {v1}");
            assert!((q2 - v2).abs() <= 1e-8 * (1.0 + v2.abs()), "V2 at {rho}: {q2} vs {v2}");
            assert!((q3 - v3).abs() <= 1e-8 * (1.0 + v3.abs()), "V3 at {rho}: {q3} vs {v3}");
        }
    }

    #[test]
    fn v2_small_rho_limit() {
        // Both the closed form and the defining θ-integral of V2 tend to 2π.
        let rho = 1e-5;
        let (_, v2, _) = components(rho).unwrap();
        assert!((v2 - 2.0 * PI).abs() < 1e-3, "V2(1e-5) = {v2}");
        let q2 = v2_theta_quadrature(rho).unwrap();
        assert!((q2 - 2.0 * PI).abs() < 1e-3, "integral(1e-5) = {q2}");
    }

    #[test]
    fn v2_prime_relation() {
        // V2'(ρ) = -(2/ρ) V3(ρ).
        let rho = 0.8f64;
        let h = 1e-6;
        let (_, v2p, _) = components(rho + h).unwrap();
        let (_, v2m, _) = components(rho - h).unwrap();
        let fd = (v2p - v2m) / (2.0 * h);
        let (_, _, v3) = components(rho).unwrap();
        assert!((fd + 2.0 / rho * v3).abs() < 1e-5, "fd {fd} vs {}", -2.0 / rho * v3);
    }

    #[test]
    fn critical_radius() {
        let cr = find_lambda_star(1e-12).unwrap();
        assert!(cr.lambda_star > 0.5 && cr.lambda_star < bracket_hi());
        assert!(cr.residual <= 1e-12);
        assert!(cr.v_prime_at_root > 0.0);
        // Sign of the reduced function at the left bracket end is negative.
        let (b0, b1) = k0_k1(0.5);
        assert!(0.5 * b1 - b0 < 0.0);
    }

    #[test]
    fn bracket_guard_rejects_flipped_build() {
        let flipped = |rho: f64| {
            let (b0, b1) = k0_k1(rho);
            -(rho * b1 - b0).abs()
        };
        assert!(matches!(find_lambda_star_of(1e-12, flipped), Err(Error::Bracket { .. })));
    }

    #[test]
    fn eigenvalue_product_invariance() {
        let a = eigenvalue(1.0, 2).unwrap();
        let b = eigenvalue(0.5, 4).unwrap();
        assert_eq!(a, b);
        let cr = find_lambda_star(1e-12).unwrap();
        for k in 1..=3u32 {
            assert!(eigenvalue(cr.lambda_star / k as f64, k).unwrap().abs() <= 1e-12);
        }
        assert!(eigenvalue(cr.lambda_star, 2).unwrap() > 0.0);
    }

    #[test]
    fn quadrature_oracle_spot_checks() {
        let cfg = KernelEvalConfig::default();
        for &rho in &[0.25, 1.0, 5.0, 20.0] {
            let q = v_quadrature(rho, &cfg).unwrap();
            let c = v(rho).unwrap();
            assert!((q - c).abs() <= 1e-6 * (1.0 + c.abs()), "rho {rho}: {q} vs {c}");
        }
        assert!(v_quadrature(0.25, &cfg).unwrap() < 0.0);
        let cr = find_lambda_star(1e-12).unwrap();
        assert!(v_quadrature(cr.lambda_star, &cfg).unwrap().abs() < 1e-6);
    }

    #[test]
    fn one_sign_change() {
        assert_eq!(sign_changes(1e-3, 5.0, 5001).unwrap(), 1);
    }

    #[test]
    fn transversality_quartic_positive_on_bracket() {
        // 2ρ + 12ρ² - ρ³ - 4ρ⁴ - 2 > 0 on the bracket, sampled at step 1e-4.
        let mut rho = BRACKET_LO;
        while rho <= bracket_hi() {
            let q = 2.0 * rho + 12.0 * rho * rho - rho.powi(3) - 4.0 * rho.powi(4) - 2.0;
            assert!(q > 0.0, "quartic at {rho} = {q}");
            rho += 1e-4;
        }
    }

    #[test]
    fn domain_errors() {
        assert!(v(0.0).is_err());
        assert!(v(-1.0).is_err());
        assert!(v_prime(0.0).is_err());
        assert!(eigenvalue(1.0, 0).is_err());
        assert!(find_lambda_star(0.0).is_err());
    }
}
