//! Quadrature building blocks: Gauss–Legendre rules (with a global node
//! cache), composite panels, and a tanh-sinh rule for integrands with
//! endpoint singularities (logarithmic or algebraic).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_deriv(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared, cached rule. The hot paths reuse a handful of fixed orders.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap();
        map.entry(n).or_insert_with(|| Arc::new(GaussLegendre::new(n))).clone()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_a^b f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }

    /// `∫ f` over consecutive panels given by `edges` (ascending).
    pub fn integrate_panels<F: FnMut(f64) -> f64>(&self, edges: &[f64], mut f: F) -> f64 {
        let mut sum = 0.0;
        for pair in edges.windows(2) {
            sum += self.integrate(pair[0], pair[1], &mut f);
        }
        sum
    }

    /// Mapped nodes and weights on `[a, b]`.
    pub fn points(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, w * half))
    }
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Geometrically graded panel edges `[b·r^count, …, b·r², b·r, b]` with an
/// initial 0, for integrands with an endpoint layer or log singularity at 0.
pub fn graded_edges(b: f64, count: usize, ratio: f64) -> Vec<f64> {
    assert!(b > 0.0 && ratio > 0.0 && ratio < 1.0);
    let mut edges = Vec::with_capacity(count + 2);
    edges.push(0.0);
    for k in (0..=count).rev() {
        edges.push(b * ratio.powi(k as i32));
    }
    edges
}

/// Logarithmically spaced panel edges from `a` to `b` with the given ratio.
pub fn log_edges(a: f64, b: f64, ratio: f64) -> Vec<f64> {
    assert!(a > 0.0 && b > a && ratio > 1.0);
    let mut edges = vec![a];
    let mut x = a;
    loop {
        x *= ratio;
        if x >= b / ratio.sqrt() {
            edges.push(b);
            return edges;
        }
        edges.push(x);
    }
}

/// Tanh-sinh (double-exponential) rule. Nodes cluster double-exponentially
/// at both endpoints, so endpoint log singularities and algebraic layers are
/// integrated with near-spectral accuracy.
#[derive(Debug, Clone)]
pub struct TanhSinh {
    /// Node positions as fractions of the interval, in (0, 1).
    frac: Vec<f64>,
    /// Weights for a unit-length interval.
    weight: Vec<f64>,
}

impl TanhSinh {
    pub fn new(n: usize) -> Self {
        assert!(n >= 5);
        const V_MAX: f64 = 4.0;
        let h = 2.0 * V_MAX / (n - 1) as f64;
        let mut frac = Vec::with_capacity(n);
        let mut weight = Vec::with_capacity(n);
        for j in 0..n {
            let u = -V_MAX + h * j as f64;
            let s = std::f64::consts::FRAC_PI_2 * u.sinh();
            // Stable distance-from-endpoint form of (1 + tanh s)/2.
            let fr = if s >= 0.0 {
                1.0 / (1.0 + (-2.0 * s).exp())
            } else {
                let e = (2.0 * s).exp();
                e / (1.0 + e)
            };
            let c = s.cosh();
            // dx/dv for the unit interval (half of the (-1,1) map).
            let w = 0.5 * h * std::f64::consts::FRAC_PI_2 * u.cosh() / (c * c);
            if w > 0.0 && fr > 0.0 && fr < 1.0 {
                frac.push(fr);
                weight.push(w);
            }
        }
        Self { frac, weight }
    }

    pub fn cached(n: usize) -> Arc<TanhSinh> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<TanhSinh>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap();
        map.entry(n).or_insert_with(|| Arc::new(TanhSinh::new(n))).clone()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let len = b - a;
        let mut sum = 0.0;
        for (&fr, &w) in self.frac.iter().zip(&self.weight) {
            sum += w * f(a + len * fr);
        }
        sum * len
    }

    /// Mapped nodes and weights on `[a, b]`.
    pub fn points(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let len = b - a;
        self.frac
            .iter()
            .zip(&self.weight)
            .map(move |(&fr, &w)| (a + len * fr, w * len))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_polynomial_exactness() {
        let rule = GaussLegendre::new(6);
        // Degree 11 is integrated exactly by a 6-point rule.
        let val = rule.integrate(0.0, 1.0, |x| x.powi(11));
        assert!((val - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn gl_known_integral() {
        let rule = GaussLegendre::new(32);
        let val = rule.integrate(0.0, std::f64::consts::PI, f64::sin);
        assert!((val - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gl_panels() {
        let rule = GaussLegendre::new(8);
        let edges = [0.0, 0.3, 1.0, 2.0];
        let val = rule.integrate_panels(&edges, |x| x * x);
        assert!((val - 8.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn tanh_sinh_log_singularity() {
        let rule = TanhSinh::new(101);
        let val = rule.integrate(0.0, 1.0, |x| x.ln());
        assert!((val + 1.0).abs() < 1e-12, "got {val}");
    }

    #[test]
    fn tanh_sinh_sqrt_singularity() {
        // An x^{-1/2} endpoint loses half the decay rate under the map, so
        // the truncated v-range leaves a ~1e-10 tail.
        let rule = TanhSinh::new(101);
        let val = rule.integrate(0.0, 1.0, |x| 1.0 / x.sqrt());
        assert!((val - 2.0).abs() < 5e-9, "got {val}");
    }

    #[test]
    fn tanh_sinh_smooth() {
        let rule = TanhSinh::new(101);
        let val = rule.integrate(0.0, std::f64::consts::FRAC_PI_2, f64::cos);
        assert!((val - 1.0).abs() < 1e-13);
    }

    #[test]
    fn half_line_beta_identity() {
        // ∫_0^∞ (1+t²)^{-3/2} dt = 1; under t = sinh(u) the integrand is
        // exactly sech²(u), so sinh-mapped panels must nail it.
        let gl = GaussLegendre::new(12);
        let u_max = 20.0f64;
        let panels = 20;
        let mut total = 0.0;
        for k in 0..panels {
            let a = u_max * k as f64 / panels as f64;
            let b = u_max * (k + 1) as f64 / panels as f64;
            total += gl.integrate(a, b, |u| {
                let t = u.sinh();
                (1.0 + t * t).powf(-1.5) * u.cosh()
            });
        }
        assert!((total - 1.0).abs() < 1e-14, "got {total}");
    }

    #[test]
    fn graded_and_log_edges() {
        let e = graded_edges(1.0, 3, 0.25);
        assert_eq!(e.len(), 5);
        assert_eq!(e[0], 0.0);
        assert!((e[1] - 0.25f64.powi(3)).abs() < 1e-16);
        assert_eq!(*e.last().unwrap(), 1.0);

        let l = log_edges(1e-3, 1.0, 4.0);
        assert!(l.windows(2).all(|p| p[1] > p[0]));
        assert_eq!(*l.last().unwrap(), 1.0);
    }
}
