//! Even `2π`-periodic boundary profiles stored as finite cosine series
//! `φ(t) = a_0 + Σ_{ℓ=1..N} a_ℓ cos(ℓt)`.
//!
//! Evenness and periodicity are structural. Strict positivity (profiles
//! parametrize a surface of revolution `{(φ(s)σ, s)}`) is enforced by dense
//! sampling before any operator evaluation.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicProfile {
    coeffs: Vec<f64>,
}

impl PeriodicProfile {
    /// Profile from coefficients `a_0..a_N`.
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "profile needs at least a_0");
        Self { coeffs }
    }

    /// The constant profile `φ ≡ λ`.
    pub fn constant(lambda: f64) -> Self {
        Self { coeffs: vec![lambda] }
    }

    /// Zero profile with truncation order `n`.
    pub fn zeros(n: usize) -> Self {
        Self { coeffs: vec![0.0; n + 1] }
    }

    /// Truncation order `N`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, l: usize) -> f64 {
        self.coeffs.get(l).copied().unwrap_or(0.0)
    }

    pub fn set_coeff(&mut self, l: usize, value: f64) {
        if l >= self.coeffs.len() {
            self.coeffs.resize(l + 1, 0.0);
        }
        self.coeffs[l] = value;
    }

    /// `φ(t)` by Clenshaw summation.
    pub fn eval(&self, t: f64) -> f64 {
        cos_series(&self.coeffs, t)
    }

    /// `φ'(t)`; odd by construction.
    pub fn deriv(&self, t: f64) -> f64 {
        sin_series_mapped(&self.coeffs, t, |l, a| -l * a)
    }

    /// `φ''(t)`.
    pub fn deriv2(&self, t: f64) -> f64 {
        cos_series_mapped(&self.coeffs, t, |l, a| -l * l * a)
    }

    /// `φ'''(t)`.
    pub fn deriv3(&self, t: f64) -> f64 {
        sin_series_mapped(&self.coeffs, t, |l, a| l * l * l * a)
    }

    /// Difference quotient `Λ0(φ, s, t) = (φ(s) - φ(s - t))/t`, switching to
    /// a Taylor form for `|t| < 1e-5` where the quotient loses accuracy.
    pub fn lambda0(&self, s: f64, t: f64) -> f64 {
        if t.abs() < 1e-5 {
            self.deriv(s) - 0.5 * t * self.deriv2(s) + t * t / 6.0 * self.deriv3(s)
        } else {
            (self.eval(s) - self.eval(s - t)) / t
        }
    }

    /// `Λ1(φ, s, t) = Λ0(φ, s, t) - φ'(s)`; tends to 0 as `t -> 0`.
    pub fn lambda1(&self, s: f64, t: f64) -> f64 {
        if t.abs() < 1e-5 {
            -0.5 * t * self.deriv2(s) + t * t / 6.0 * self.deriv3(s)
        } else {
            (self.eval(s) - self.eval(s - t)) / t - self.deriv(s)
        }
    }

    /// Samples at `m` uniform points of `[0, π]`, endpoints included.
    pub fn to_samples(&self, m: usize) -> Vec<f64> {
        assert!(m >= 2);
        (0..m).map(|j| self.eval(j as f64 * std::f64::consts::PI / (m - 1) as f64)).collect()
    }

    /// Recover coefficients `a_0..a_n` from uniform samples of `[0, π]`
    /// (endpoints included). Exact for trigonometric polynomials of degree
    /// `<= n`; requires at least `2n + 1` samples.
    pub fn from_samples(values: &[f64], n: usize) -> Result<Self> {
        if values.len() < 2 * n + 1 {
            return Err(Error::InsufficientSamples { got: values.len(), need: 2 * n + 1, order: n });
        }
        Ok(Self { coeffs: dct_coefficients(values, n) })
    }

    /// Minimum of `φ` over a dense uniform grid of `[0, π]` with
    /// `16N + 64` points.
    pub fn min_on_dense_grid(&self) -> f64 {
        let m = 16 * self.order() + 64;
        (0..=m)
            .map(|j| self.eval(j as f64 * std::f64::consts::PI / m as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// Reject profiles that are not strictly positive.
    pub fn ensure_positive(&self) -> Result<()> {
        let min = self.min_on_dense_grid();
        if min <= 0.0 {
            return Err(Error::NonPositiveProfile { min });
        }
        Ok(())
    }

    /// `self + factor * other`, padded to the larger order.
    pub fn axpy(&self, factor: f64, other: &PeriodicProfile) -> PeriodicProfile {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (l, slot) in out.iter_mut().enumerate() {
            *slot = self.coeff(l) + factor * other.coeff(l);
        }
        PeriodicProfile::new(out)
    }
}

/// Clenshaw evaluation of `c_0 + Σ_{l>=1} c_l cos(l t)`.
fn cos_series(c: &[f64], t: f64) -> f64 {
    cos_series_mapped(c, t, |_, a| a)
}

/// Clenshaw for `m(0, c_0) + Σ_{l>=1} m(l, c_l) cos(l t)` without building
/// the mapped coefficient array.
fn cos_series_mapped(c: &[f64], t: f64, m: impl Fn(f64, f64) -> f64) -> f64 {
    let x = t.cos();
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for (l, &cl) in c.iter().enumerate().skip(1).rev() {
        let b0 = m(l as f64, cl) + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    m(0.0, c[0]) + b1 * x - b2
}

/// Clenshaw for `Σ_{l>=1} m(l, c_l) sin(l t)`.
fn sin_series_mapped(c: &[f64], t: f64, m: impl Fn(f64, f64) -> f64) -> f64 {
    let x = t.cos();
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for (l, &cl) in c.iter().enumerate().skip(1).rev() {
        let b0 = m(l as f64, cl) + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    b1 * t.sin()
}

/// Cosine coefficients of an even `2π`-periodic function sampled at uniform
/// points of `[0, π]` (endpoints included): trapezoid projections
/// `a_0 = (1/π)∫_0^π f`, `a_l = (2/π)∫_0^π f cos(l·)`.
pub fn dct_coefficients(values: &[f64], n_max: usize) -> Vec<f64> {
    let m = values.len() - 1;
    let mut out = Vec::with_capacity(n_max + 1);
    for l in 0..=n_max {
        let mut sum = 0.5 * values[0];
        for (j, &vj) in values.iter().enumerate().take(m).skip(1) {
            sum += vj * (l as f64 * j as f64 * std::f64::consts::PI / m as f64).cos();
        }
        sum += 0.5 * values[m] * if l % 2 == 0 { 1.0 } else { -1.0 };
        let norm = if l == 0 { 1.0 } else { 2.0 };
        out.push(norm * sum / m as f64);
    }
    out
}

#[derive(Serialize, Deserialize)]
struct ProfileRepr {
    #[serde(rename = "N")]
    n: usize,
    a: Vec<f64>,
}

impl Serialize for PeriodicProfile {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ProfileRepr { n: self.order(), a: self.coeffs.clone() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PeriodicProfile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = ProfileRepr::deserialize(deserializer)?;
        if repr.a.len() != repr.n + 1 {
            return Err(serde::de::Error::custom(format!(
                "coefficient array has {} entries, expected N + 1 = {}",
                repr.a.len(),
                repr.n + 1
            )));
        }
        Ok(PeriodicProfile::new(repr.a))
    }
}
