//! Convolution kernels of the linearized boundary operator.
//!
//! With `p(θ) = 2 sin θ` and `∫_{S¹} h(p_σ) dσ = 4 ∫_0^{π/2} h(2 sin θ) dθ`:
//!
//! * `G(t) = ∫_{S¹} (t² + p²)^{-3/2} dσ = 4 t^{-2} g(t)` where
//!   `g(t) = (4 + t²)^{-1/2} ∫_0^{π/2} sqrt(1 - r²(t) sin²θ) dθ`,
//!   `r(t) = 2/sqrt(4 + t²)`. `g` is C¹ on `[0, ∞)` with `g(0) = 1/2`,
//!   `g'(0) = 0` and `g(t) >= (4 + t²)^{-1/2} > 0`.
//! * `G0(t) = ∫_{S¹} p² (t² + p²)^{-3/2} dσ`,
//!   `G1(t) = ∫_{S¹} p⁴ (t² + p²)^{-5/2} dσ`, `F = G0 - (3/4) G1`.
//!   `G0` and `G1` have an integrable logarithmic singularity at `t = 0`
//!   (`≈ -2 ln|t|`); they are in `L¹(ℝ)` with `∫ G0 = 4π`, `∫ G1 = 8π/3`.
//!
//! `G` is exposed through the `g`-representation for `|t| <= 20` (which keeps
//! the `1/t²` singularity in an explicit factor) and through θ-quadrature
//! beyond; the two paths cross-check each other in the tests.

use crate::error::{Error, Result};
use crate::quad::{GaussLegendre, TanhSinh};

/// Quadrature settings for kernel evaluations and the half-line mass
/// integrals.
#[derive(Debug, Clone, Copy)]
pub struct KernelEvalConfig {
    /// Gauss–Legendre nodes for the smooth part of θ-integrals.
    pub theta_nodes: usize,
    /// Half-line truncation for `t`-integrals, as the extent of the
    /// `t = sinh(u)` map (so the integrals run to `t = sinh(tail_truncation)`).
    pub tail_truncation: f64,
    pub target_rel_error: f64,
}

impl Default for KernelEvalConfig {
    fn default() -> Self {
        Self { theta_nodes: 64, tail_truncation: 13.0, target_rel_error: 1e-10 }
    }
}

impl KernelEvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.theta_nodes < 8 {
            return Err(Error::domain("KernelEvalConfig", "theta_nodes must be >= 8"));
        }
        if self.tail_truncation <= 0.0 {
            return Err(Error::domain("KernelEvalConfig", "tail_truncation must be > 0"));
        }
        Ok(())
    }
}

/// θ-integral `∫_0^{π/2} f(θ) dθ` for integrands with a layer of width
/// `scale` at `θ = 0` (resolved by a `θ = scale·sinh(v)` map) and a smooth
/// remainder.
fn layered_theta<F: Fn(f64) -> f64>(scale: f64, f: F) -> f64 {
    const SPLIT: f64 = 0.5;
    let gl_smooth = GaussLegendre::cached(24);
    let mut total = gl_smooth.integrate(SPLIT, std::f64::consts::FRAC_PI_2, &f);

    if scale <= 0.0 {
        total += gl_smooth.integrate(0.0, SPLIT, &f);
        return total;
    }
    let v_max = (SPLIT / scale).asinh();
    let panels = (v_max / 1.5).ceil().max(1.0) as usize;
    let gl_layer = GaussLegendre::cached(12);
    let h = v_max / panels as f64;
    for k in 0..panels {
        total += gl_layer.integrate(k as f64 * h, (k + 1) as f64 * h, |v| {
            let theta = scale * v.sinh();
            f(theta) * scale * v.cosh()
        });
    }
    total
}

/// The regular factor `g(t)` of `G(t) = 4 t^{-2} g(t)`; strictly positive.
pub fn g(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain("kernels::g", format!("t = {t} must be >= 0")));
    }
    // g(t) = (4+t²)^{-1/2} ∫_0^{π/2} sqrt(eps² + r² sin²ψ) dψ
    // after ψ = π/2 - θ, with eps² = t²/(4+t²); the integrand has a kink
    // layer of width eps/r = t/2 at ψ = 0.
    let root = (4.0 + t * t).sqrt();
    let eps2 = t * t / (4.0 + t * t);
    let r2 = 4.0 / (4.0 + t * t);
    let integral = layered_theta(0.5 * t, |psi| {
        let s = psi.sin();
        (eps2 + r2 * s * s).sqrt()
    });
    Ok(integral / root)
}

/// `G(t)` for `t != 0`: `4 t^{-2} g(|t|)` for `|t| <= 20`, direct
/// θ-quadrature beyond. Even and positive, `G(t) = O(|t|^{-3})`.
pub fn big_g(t: f64) -> Result<f64> {
    if t == 0.0 {
        return Err(Error::domain("kernels::big_g", "t = 0 is a nonintegrable point"));
    }
    let a = t.abs();
    if a <= 20.0 {
        Ok(4.0 * g(a)? / (t * t))
    } else {
        Ok(big_g_theta(a))
    }
}

/// θ-quadrature path for `G`: `4 ∫_0^{π/2} (t² + 4 sin²θ)^{-3/2} dθ`.
/// Serves as the independent oracle for the `g`-based path.
pub fn big_g_theta(t: f64) -> f64 {
    debug_assert!(t != 0.0);
    let a = t.abs();
    let t2 = t * t;
    4.0 * layered_theta(0.5 * a, |theta| {
        let s = 2.0 * theta.sin();
        let d = t2 + s * s;
        1.0 / (d * d.sqrt())
    })
}

/// `G0(t)`; diverges like `-2 ln|t|` as `t -> 0` (returns `+inf` at 0).
pub fn g0(t: f64) -> f64 {
    if t == 0.0 {
        return f64::INFINITY;
    }
    let t2 = t * t;
    4.0 * layered_theta(0.5 * t.abs(), |theta| {
        let s = 2.0 * theta.sin();
        let p2 = s * s;
        let d = t2 + p2;
        p2 / (d * d.sqrt())
    })
}

/// `G1(t)`; same logarithmic divergence at `t = 0`.
pub fn g1(t: f64) -> f64 {
    if t == 0.0 {
        return f64::INFINITY;
    }
    let t2 = t * t;
    4.0 * layered_theta(0.5 * t.abs(), |theta| {
        let s = 2.0 * theta.sin();
        let p2 = s * s;
        let d = t2 + p2;
        p2 * p2 / (d * d * d.sqrt())
    })
}

/// `F(t) = G0(t) - (3/4) G1(t)`.
pub fn f_kernel(t: f64) -> f64 {
    g0(t) - 0.75 * g1(t)
}

/// `∫_ℝ G0(t) dt` by sinh-mapped panels with a tanh-sinh panel at the
/// logarithmic origin; refines once and reports non-convergence if the two
/// passes disagree. Exact value is `4π`.
pub fn mass_g0(cfg: &KernelEvalConfig) -> Result<f64> {
    half_line_mass(cfg, g0)
}

/// `∫_ℝ G1(t) dt`; exact value is `8π/3`.
pub fn mass_g1(cfg: &KernelEvalConfig) -> Result<f64> {
    half_line_mass(cfg, g1)
}

fn half_line_mass(cfg: &KernelEvalConfig, f: fn(f64) -> f64) -> Result<f64> {
    cfg.validate()?;
    let coarse = half_line_mass_pass(cfg, 0.5, f);
    let fine = half_line_mass_pass(cfg, 0.25, f);
    let delta = (coarse - fine).abs();
    let tol = cfg.target_rel_error * (1.0 + fine.abs()) * 10.0;
    if delta > tol {
        return Err(Error::QuadratureNonConvergence { context: "kernel mass integral", delta, tol });
    }
    Ok(fine)
}

fn half_line_mass_pass(cfg: &KernelEvalConfig, panel: f64, f: fn(f64) -> f64) -> f64 {
    // 2 ∫_0^∞ = 2 [ ∫_0^h (tanh-sinh, log endpoint) + ∫_h^T (u = asinh t) ].
    let h = 0.5f64;
    let de = TanhSinh::cached(121);
    let near = de.integrate(0.0, h, f);

    let gl = GaussLegendre::cached(12);
    let u0 = h.asinh();
    let u1 = cfg.tail_truncation;
    let panels = ((u1 - u0) / panel).ceil() as usize;
    let step = (u1 - u0) / panels as f64;
    let mut far = 0.0;
    for k in 0..panels {
        far += gl.integrate(u0 + k as f64 * step, u0 + (k + 1) as f64 * step, |u| {
            let t = u.sinh();
            f(t) * u.cosh()
        });
    }
    2.0 * (near + far)
}

/// Large-argument expansion of `g` via the elliptic-integral series
/// `E(k) = (π/2)(1 - k²/4 - 3k⁴/64 - 5k⁶/256 - 175k⁸/16384 - …)`,
/// `k² = 4/(4+t²)`. Relative error below 1e-12 for `t >= 35`.
pub(crate) fn g_asymptotic(t: f64) -> f64 {
    debug_assert!(t >= 35.0);
    let k2 = 4.0 / (4.0 + t * t);
    let e = std::f64::consts::FRAC_PI_2
        * (1.0
            - k2 * (0.25
                + k2 * (3.0 / 64.0 + k2 * (5.0 / 256.0 + k2 * (175.0 / 16384.0 + k2 * 441.0 / 65536.0)))));
    e / (4.0 + t * t).sqrt()
}

// Moments M_{2k} = ∫_{S¹} p^{2k} dσ = 2π · binom(2k, k).
const M2: f64 = 2.0 * std::f64::consts::PI * 2.0;
const M4: f64 = 2.0 * std::f64::consts::PI * 6.0;
const M6: f64 = 2.0 * std::f64::consts::PI * 20.0;
const M8: f64 = 2.0 * std::f64::consts::PI * 70.0;
const M10: f64 = 2.0 * std::f64::consts::PI * 252.0;
const M12: f64 = 2.0 * std::f64::consts::PI * 924.0;

/// `G0(t) = t^{-3}[M2 - (3/2)M4/t² + (15/8)M6/t⁴ - …]` for large `t`.
pub(crate) fn g0_asymptotic(t: f64) -> f64 {
    debug_assert!(t >= 35.0);
    let s = 1.0 / (t * t);
    (M2 + s * (-1.5 * M4 + s * (1.875 * M6 + s * (-2.1875 * M8 + s * 2.460_937_5 * M10))))
        / (t * t * t)
}

/// `G1(t) = t^{-5}[M4 - (5/2)M6/t² + (35/8)M8/t⁴ - …]` for large `t`.
pub(crate) fn g1_asymptotic(t: f64) -> f64 {
    debug_assert!(t >= 35.0);
    let s = 1.0 / (t * t);
    (M4 + s * (-2.5 * M6 + s * (4.375 * M8 + s * (-6.5625 * M10 + s * 9.023_437_5 * M12))))
        / t.powi(5)
}

pub(crate) fn f_asymptotic(t: f64) -> f64 {
    g0_asymptotic(t) - 0.75 * g1_asymptotic(t)
}

/// `∫_T^∞ G(t) dt` for `T >= 35`, by a log-mapped quadrature of the
/// asymptotic `g`.
pub(crate) fn tail_big_g(t0: f64) -> f64 {
    debug_assert!(t0 >= 35.0);
    let gl = GaussLegendre::cached(12);
    // t = t0 e^y; integrand 4 g(t)/t decays like e^{-y}.
    let y_max = (3e6f64 / t0).max(2.0).ln();
    let panels = (y_max / 1.0).ceil() as usize;
    let h = y_max / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        sum += gl.integrate(k as f64 * h, (k + 1) as f64 * h, |y| {
            let t = t0 * y.exp();
            4.0 * g_asymptotic(t) / t
        });
    }
    sum
}

/// Cached axial table of `(t, weight, g(t), F(t))` on `[0, t_max]`, dense
/// enough to resolve `cos(ρ t)` factors up to `ρ ≈ 60`. The first panel uses
/// a tanh-sinh rule because `F` is logarithmically singular at `t = 0`.
pub(crate) struct AxialTable {
    pub t: Vec<f64>,
    pub w: Vec<f64>,
    pub g: Vec<f64>,
    pub f: Vec<f64>,
    pub t_max: f64,
}

impl AxialTable {
    fn build(t_max: f64, panel: f64, gl_order: usize, de_nodes: usize) -> Self {
        let de = TanhSinh::new(de_nodes);
        let gl = GaussLegendre::new(gl_order);
        let mut t = Vec::new();
        let mut w = Vec::new();
        for (x, wx) in de.points(0.0, panel) {
            t.push(x);
            w.push(wx);
        }
        let panels = ((t_max - panel) / panel).round() as usize;
        for k in 0..panels {
            let a = panel + k as f64 * panel;
            for (x, wx) in gl.points(a, a + panel) {
                t.push(x);
                w.push(wx);
            }
        }
        let g_vals: Vec<f64> = t.iter().map(|&x| g(x).expect("t >= 0")).collect();
        let f_vals: Vec<f64> = t.iter().map(|&x| f_kernel(x)).collect();
        Self { t, w, g: g_vals, f: f_vals, t_max }
    }
}

/// Primary axial table and an independently discretized control table for
/// refinement checks.
pub(crate) fn axial_table() -> &'static AxialTable {
    use std::sync::OnceLock;
    static TABLE: OnceLock<AxialTable> = OnceLock::new();
    TABLE.get_or_init(|| AxialTable::build(40.0, 0.02, 6, 61))
}

pub(crate) fn axial_table_control() -> &'static AxialTable {
    use std::sync::OnceLock;
    static TABLE: OnceLock<AxialTable> = OnceLock::new();
    TABLE.get_or_init(|| AxialTable::build(40.0, 0.032, 7, 81))
}
