//! Slow cross-validation oracle: literal numerators, graded Gauss–Legendre
//! in a `[0, π]` circle parametrization, unsymmetrized axial cell, brute
//! lattice partial sums. Shares no discretization decisions with the
//! regularized path.

use std::f64::consts::PI;

use super::lattice::lattice_sums_plain_tail;
use super::{HEvaluator, PointContext, QuadratureSpec};
use crate::error::{Error, Result};
use crate::profile::PeriodicProfile;
use crate::quad::{graded_edges, GaussLegendre};

pub struct DirectEvaluator;

/// Direct lattice terms per side before the plain integral remainder.
const LATTICE_TERMS: usize = 300;
const THETA_PANELS: usize = 8;
const THETA_NODES: usize = 20;
const XI_PANELS: usize = 14;
const XI_NODES: usize = 12;

struct XiNode {
    weight: f64,
    /// `φ(s) - φ(s-ξ)` taken literally.
    diff: f64,
    /// `φ(s-ξ)·sqrt(1 + φ'(s-ξ)²)`.
    g: f64,
    /// `φ²(s-ξ)·sqrt(1 + φ'(s-ξ)²)`.
    m: f64,
    c1: f64,
    c2: f64,
    xi: f64,
}

impl HEvaluator for DirectEvaluator {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn evaluate(&self, profile: &PeriodicProfile, s: f64, spec: &QuadratureSpec) -> Result<f64> {
        spec.validate()?;
        profile.ensure_positive()?;
        let ctx = PointContext::new(profile, s);

        // Signed axial nodes over the full cell [-π, π], graded toward 0.
        // Panels are capped at 0.35 so that Gauss-Legendre resolves the
        // oscillation of high-order profile modes in the numerators.
        let gl_xi = GaussLegendre::cached(XI_NODES);
        let mut pos_edges = Vec::new();
        for pair in graded_edges(PI, XI_PANELS, 0.25).windows(2) {
            let split = ((pair[1] - pair[0]) / 0.35).ceil().max(1.0) as usize;
            for j in 0..split {
                pos_edges.push(pair[0] + (pair[1] - pair[0]) * j as f64 / split as f64);
            }
        }
        pos_edges.push(PI);
        let mut nodes = Vec::with_capacity(2 * pos_edges.len() * XI_NODES);
        for pair in pos_edges.windows(2) {
            for sign in [1.0, -1.0] {
                for (xi_abs, weight) in gl_xi.points(pair[0], pair[1]) {
                    let xi = sign * xi_abs;
                    let phi_m = profile.eval(s - xi);
                    if phi_m <= 0.0 {
                        return Err(Error::NonPositiveProfile { min: phi_m });
                    }
                    let b = (1.0 + profile.deriv(s - xi).powi(2)).sqrt();
                    let diff = ctx.phi_s - phi_m;
                    nodes.push(XiNode {
                        weight,
                        diff,
                        g: phi_m * b,
                        m: phi_m * phi_m * b,
                        c1: diff * diff,
                        c2: ctx.phi_s * phi_m,
                        xi,
                    });
                }
            }
        }

        // θ over [0, π] with p = 2 sin(θ/2) and ∫_{S¹} = 2 ∫_0^π dθ.
        let gl_theta = GaussLegendre::cached(THETA_NODES);
        let theta_edges = graded_edges(PI, THETA_PANELS, 0.25);
        let mut total = 0.0;
        for pair in theta_edges.windows(2) {
            for (theta, wt) in gl_theta.points(pair[0], pair[1]) {
                let p = 2.0 * (0.5 * theta).sin();
                let p2 = p * p;
                let mut cell = 0.0;
                for node in &nodes {
                    let (s0, s1) =
                        lattice_sums_plain_tail(node.xi, node.c1 + p2 * node.c2, LATTICE_TERMS);
                    cell += node.weight
                        * ((node.diff * node.g + 0.5 * p2 * node.m) * s0 - ctx.dphi_s * node.g * s1);
                }
                total += wt * cell;
            }
        }

        Ok(-2.0 * total / ctx.slope_norm)
    }
}
