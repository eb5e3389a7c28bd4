//! Modified Bessel functions `I0, I1, K0, K1, K2` on the positive real axis.
//!
//! Evaluation strategy, validated against the series/integral oracles in the
//! test suite:
//!
//! * `I0, I1`: ascending power series for `x <= 25` (all terms positive, no
//!   cancellation), large-argument asymptotic expansion beyond. At the switch
//!   point the asymptotic remainder is below `e^{-2x} ~ 2e-22`.
//! * `K0, K1`: the classical small-argument series with logarithmic terms for
//!   `x <= 2`, and the Steed/Thompson–Barnett continued fraction beyond.
//!   A plain large-argument asymptotic expansion cannot reach 1e-12 until
//!   `x ≳ 16`, so the continued fraction covers the whole middle range.
//! * `K2` from the recurrence `x²K2 = x²K0 + 2xK1`, inheriting the accuracy
//!   of `K0, K1`.
//!
//! All functions are pure and reentrant.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Accuracy policy for the Bessel evaluations and their test oracles.
#[derive(Debug, Clone, Copy)]
pub struct BesselAccuracy {
    /// Target relative error of the returned values.
    pub target_rel_error: f64,
    /// Argument threshold separating series from large-argument evaluation.
    pub series_cutoff: f64,
}

impl BesselAccuracy {
    pub fn new(target_rel_error: f64, series_cutoff: f64) -> Result<Self> {
        if target_rel_error <= 0.0 {
            return Err(Error::domain("BesselAccuracy", "target_rel_error must be > 0"));
        }
        if series_cutoff <= 0.0 {
            return Err(Error::domain("BesselAccuracy", "series_cutoff must be > 0"));
        }
        Ok(Self { target_rel_error, series_cutoff })
    }
}

impl Default for BesselAccuracy {
    fn default() -> Self {
        Self { target_rel_error: 1e-12, series_cutoff: 8.0 }
    }
}

/// Switch point between the `I` power series and the asymptotic expansion.
const I_SERIES_CUTOFF: f64 = 25.0;
/// Switch point between the `K` log-series and the continued fraction.
const K_SERIES_CUTOFF: f64 = 2.0;

/// `I_nu(x)` for `nu in {0, 1}`, `x >= 0`.
pub fn bessel_i(nu: u32, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain("bessel_i", format!("x = {x} must be >= 0")));
    }
    match nu {
        0 => Ok(i0(x)),
        1 => Ok(i1(x)),
        _ => Err(Error::domain("bessel_i", format!("order {nu} not in {{0, 1}}"))),
    }
}

/// `K_nu(x)` for `nu in {0, 1, 2}`, `x > 0`.
pub fn bessel_k(nu: u32, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("bessel_k", format!("x = {x} must be > 0")));
    }
    match nu {
        0 => Ok(k0(x)),
        1 => Ok(k1(x)),
        2 => Ok(k2(x)),
        _ => Err(Error::domain("bessel_k", format!("order {nu} not in {{0, 1, 2}}"))),
    }
}

/// Modified Bessel function `I_0(x)`, `x >= 0`.
pub fn i0(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x <= I_SERIES_CUTOFF {
        i_series(0, x)
    } else {
        i_asymptotic(0, x)
    }
}

/// Modified Bessel function `I_1(x)`, `x >= 0`.
pub fn i1(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x <= I_SERIES_CUTOFF {
        i_series(1, x)
    } else {
        i_asymptotic(1, x)
    }
}

/// Modified Bessel function `K_0(x)`, `x > 0`.
pub fn k0(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= K_SERIES_CUTOFF {
        k0_series(x)
    } else {
        k0_k1_cf(x).0
    }
}

/// Modified Bessel function `K_1(x)`, `x > 0`.
pub fn k1(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= K_SERIES_CUTOFF {
        k1_series(x)
    } else {
        k0_k1_cf(x).1
    }
}

/// `K_0(x)` and `K_1(x)` together (single continued-fraction pass for x > 2).
pub fn k0_k1(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    if x <= K_SERIES_CUTOFF {
        (k0_series(x), k1_series(x))
    } else {
        k0_k1_cf(x)
    }
}

/// Modified Bessel function `K_2(x)` via `x²K2(x) = x²K0(x) + 2xK1(x)`.
pub fn k2(x: f64) -> f64 {
    let (v0, v1) = k0_k1(x);
    v0 + 2.0 * v1 / x
}

/// Ascending series `sum_m (x/2)^{nu+2m} / (m! (nu+m)!)`, `nu in {0,1}`.
fn i_series(nu: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = if nu == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    for m in 1..400 {
        let mf = m as f64;
        term *= q / (mf * (mf + nu as f64));
        sum += term;
        if term < sum * f64::EPSILON {
            break;
        }
    }
    sum
}

/// Large-argument expansion `I_nu(x) ~ e^x/sqrt(2πx) · sum_k (-1)^k a_k(nu)/x^k`.
fn i_asymptotic(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..60 {
        let kf = k as f64;
        let factor = (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * x * kf);
        term *= -factor;
        if term.abs() < f64::EPSILON * sum.abs() {
            break;
        }
        sum += term;
    }
    sum * x.exp() / (2.0 * std::f64::consts::PI * x).sqrt()
}

/// `K_0` by the small-argument series with logarithmic term.
fn k0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0f64;
    let mut harmonic = 0.0f64;
    let mut sum = 0.0f64;
    for m in 1..60 {
        let mf = m as f64;
        term *= q / (mf * mf);
        harmonic += 1.0 / mf;
        let contrib = term * harmonic;
        sum += contrib;
        if contrib < sum * f64::EPSILON {
            break;
        }
    }
    -( (0.5 * x).ln() + EULER_GAMMA) * i0(x) + sum
}

/// `K_1` by the small-argument series with logarithmic term.
fn k1_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    // sum_m (H_m + H_{m+1} - 2γ) q^m / (m! (m+1)!)
    let mut term = 1.0f64; // q^m / (m! (m+1)!)
    let mut h_m = 0.0f64;
    let mut h_m1 = 1.0f64;
    let mut sum = term * (h_m + h_m1 - 2.0 * EULER_GAMMA);
    for m in 1..60 {
        let mf = m as f64;
        term *= q / (mf * (mf + 1.0));
        h_m += 1.0 / mf;
        h_m1 += 1.0 / (mf + 1.0);
        let contrib = term * (h_m + h_m1 - 2.0 * EULER_GAMMA);
        sum += contrib;
        if contrib.abs() < sum.abs() * f64::EPSILON {
            break;
        }
    }
    1.0 / x + (0.5 * x).ln() * i1(x) - 0.25 * x * sum
}

/// `(K_0, K_1)` by Steed's continued fraction (Thompson–Barnett), `x > 1`.
///
/// Evaluates `z1/z0 = U(nu+3/2, 2nu+1, 2x)/U(nu+1/2, 2nu+1, 2x)` at `nu = 0`.
fn k0_k1_cf(x: f64) -> (f64, f64) {
    debug_assert!(x > 1.0);
    let mut a = -0.25f64;
    let mut b = 2.0 * (x + 1.0);
    let mut d = 1.0 / b;
    let mut delta = d;
    let mut f = d;
    let mut prev = 0.0f64;
    let mut cur = 1.0f64;
    let mut q = -a;
    let mut c = -a;
    let mut s = 1.0 + q * delta;

    for k in 2u32..500 {
        let kf = f64::from(k);
        a -= 2.0 * (kf - 1.0);
        b += 2.0;
        d = 1.0 / (a * d + b);
        delta *= b * d - 1.0;
        f += delta;

        let t = (prev - (b - 2.0) * cur) / a;
        prev = cur;
        cur = t;
        c *= -a / kf;
        q += c * t;
        s += q * delta;

        if (q * delta).abs() < s.abs() * (0.5 * f64::EPSILON) {
            break;
        }
    }

    let v0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let v1 = v0 * (0.5 + x - 0.25 * f) / x;
    (v0, v1)
}
