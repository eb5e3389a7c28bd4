//! Production evaluator: symmetrized cell integrand with exact-trig second
//! differences, tanh-sinh θ rule, Euler–Maclaurin lattice tails.

use std::f64::consts::PI;

use super::lattice::lattice_sums;
use super::{HEvaluator, PointContext, QuadratureSpec};
use crate::error::{Error, Result};
use crate::profile::PeriodicProfile;
use crate::quad::{log_edges, GaussLegendre, TanhSinh};

pub struct RegularizedEvaluator;

/// Per-ξ-node data, independent of θ. The θ dependence enters only through
/// `p²` inside `w(±ξ, p) = c1 + p² c2` and the lattice sums.
struct XiNode {
    xi: f64,
    weight: f64,
    /// `L_e(ξ) = 2φ(s) - φ(s-ξ) - φ(s+ξ)`, by the identity
    /// `Σ 4 a_l cos(ls) sin²(lξ/2)` (no cancellation).
    le: f64,
    /// `L_d(ξ) = φ(s+ξ) - φ(s-ξ) = -2 Σ a_l sin(ls) sin(lξ)`.
    ld: f64,
    /// `φ(s∓ξ)·sqrt(1 + φ'(s∓ξ)²)`.
    gm: f64,
    gp: f64,
    /// `φ²(s∓ξ)·sqrt(1 + φ'(s∓ξ)²)` for the `p²` term.
    mm: f64,
    pp: f64,
    c1m: f64,
    c2m: f64,
    c1p: f64,
    c2p: f64,
}

fn build_xi_nodes(
    profile: &PeriodicProfile,
    s: f64,
    ctx: &PointContext,
    spec: &QuadratureSpec,
) -> Result<(Vec<XiNode>, f64)> {
    // Geometric grading resolves the θ-dependent layer at ξ ~ p·φ; above
    // ξ ≈ 0.7 the integrand varies on unit scale, so switch to uniform
    // panels there (a single ratio-4 panel up to π is too coarse).
    let xi_min = PI * 10f64.powf(-spec.xi_min_exp);
    let mut edges = log_edges(xi_min, 0.7, 4.0);
    let top_panels = 5;
    for k in 1..=top_panels {
        edges.push(0.7 + (PI - 0.7) * k as f64 / top_panels as f64);
    }
    let gl = GaussLegendre::cached(spec.xi_nodes_per_panel);

    let coeffs = profile.coeffs();
    let n_modes = profile.order();
    // cos(l s), sin(l s) hoisted out of the ξ loop.
    let mut cos_ls = Vec::with_capacity(n_modes + 1);
    let mut sin_ls = Vec::with_capacity(n_modes + 1);
    for l in 0..=n_modes {
        cos_ls.push((l as f64 * s).cos());
        sin_ls.push((l as f64 * s).sin());
    }

    let mut nodes = Vec::with_capacity((edges.len() - 1) * spec.xi_nodes_per_panel);
    for pair in edges.windows(2) {
        for (xi, weight) in gl.points(pair[0], pair[1]) {
            // One angle-addition recurrence at the half angle ξ/2 yields
            // sin(lξ/2), and with it sin(lξ), cos(lξ), φ(s∓ξ), φ'(s∓ξ),
            // L_e and L_d in a single pass, trig-free per mode.
            let (sh, ch) = (0.5 * xi).sin_cos();
            let mut sl = 0.0; // sin(l ξ/2)
            let mut cl = 1.0; // cos(l ξ/2)
            let mut phi_m = coeffs[0];
            let mut phi_p = coeffs[0];
            let mut d_m = 0.0;
            let mut d_p = 0.0;
            let mut le = 0.0;
            let mut ld = 0.0;
            for l in 1..=n_modes {
                let s_new = sl * ch + cl * sh;
                cl = cl * ch - sl * sh;
                sl = s_new;
                let sin_lxi = 2.0 * sl * cl;
                let cos_lxi = 1.0 - 2.0 * sl * sl;
                let a = coeffs[l];
                let even = a * cos_ls[l] * cos_lxi;
                let odd = a * sin_ls[l] * sin_lxi;
                phi_m += even + odd;
                phi_p += even - odd;
                let lf = l as f64;
                // φ'(s∓ξ) = -Σ l a_l (sin(ls)cos(lξ) ∓ cos(ls)sin(lξ))
                let de = lf * a * sin_ls[l] * cos_lxi;
                let do_ = lf * a * cos_ls[l] * sin_lxi;
                d_m += -(de - do_);
                d_p += -(de + do_);
                le += 4.0 * a * cos_ls[l] * sl * sl;
                ld += -2.0 * a * sin_ls[l] * sin_lxi;
            }
            if phi_m <= 0.0 || phi_p <= 0.0 {
                return Err(Error::NonPositiveProfile { min: phi_m.min(phi_p) });
            }
            let bm = (1.0 + d_m * d_m).sqrt();
            let bp = (1.0 + d_p * d_p).sqrt();

            let dm = ctx.phi_s - phi_m;
            let dp = ctx.phi_s - phi_p;
            nodes.push(XiNode {
                xi,
                weight,
                le,
                ld,
                gm: phi_m * bm,
                gp: phi_p * bp,
                mm: phi_m * phi_m * bm,
                pp: phi_p * phi_p * bp,
                c1m: dm * dm,
                c2m: ctx.phi_s * phi_m,
                c1p: dp * dp,
                c2p: ctx.phi_s * phi_p,
            });
        }
    }
    Ok((nodes, xi_min))
}

impl HEvaluator for RegularizedEvaluator {
    fn name(&self) -> &'static str {
        "regularized"
    }

    fn evaluate(&self, profile: &PeriodicProfile, s: f64, spec: &QuadratureSpec) -> Result<f64> {
        spec.validate()?;
        profile.ensure_positive()?;
        let ctx = PointContext::new(profile, s);
        let (nodes, xi_min) = build_xi_nodes(profile, s, &ctx, spec)?;
        let de = TanhSinh::cached(spec.theta_nodes);
        let n_lat = spec.lattice_terms;

        let b_s = ctx.slope_norm;
        let phi_s2 = ctx.phi_s * ctx.phi_s;

        let mut total = 0.0;
        for (theta, wt) in de.points(0.0, 0.5 * PI) {
            let p = 2.0 * theta.sin();
            let p2 = p * p;

            // Sub-grid stub [0, xi_min]: there φ(s∓ξ) = φ(s) ∓ ξφ'(s) to
            // machine precision, the n = 0 lattice denominator is
            // ξ²(1+φ'²) + p²φ², and the n ≠ 0 terms are ξ-independent,
            // so the stub integrates in closed form:
            //   ∫_0^X (c²ξ² + w)^{-3/2} dξ = X / (w sqrt(c²X² + w)).
            let w0 = p2 * phi_s2;
            let c2 = b_s * b_s;
            let near = xi_min / (w0 * (c2 * xi_min * xi_min + w0).sqrt());
            let rest = lattice_sums(0.0, w0, n_lat).0 - 1.0 / (w0 * w0.sqrt());
            let mut cell = p2 * phi_s2 * b_s * (near + xi_min * rest);

            for node in &nodes {
                let (s0m, s1m) = lattice_sums(node.xi, node.c1m + p2 * node.c2m, n_lat);
                let (s0p, s1p) = lattice_sums(-node.xi, node.c1p + p2 * node.c2p, n_lat);
                let even = node.gm * s0m + node.gp * s0p;
                let odd = node.gm * s0m - node.gp * s0p;
                let val = 0.5 * (node.le * even + node.ld * odd)
                    - ctx.dphi_s * (node.gm * s1m + node.gp * s1p)
                    + 0.5 * p2 * (node.mm * s0m + node.pp * s0p);
                cell += node.weight * val;
            }
            total += wt * cell;
        }

        // ∫_{S¹} dσ = 4 ∫_0^{π/2} dθ with p = 2 sin θ.
        let h_script = 4.0 * total;
        Ok(-h_script / ctx.slope_norm)
    }
}
