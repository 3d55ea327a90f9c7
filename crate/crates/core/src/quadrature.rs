//! Gauss–Legendre rules, the rational map to semi-infinite ranges, and
//! interpolation helpers for tabulated functions.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // float methods are inherent in core only on recent toolchains
use num_traits::Float;

use crate::{Error, Result};

/// A quadrature rule: nodes with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (f64, f64)> + ExactSizeIterator + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let pn = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * pn - p0) / (x * x - 1.0);
    (pn, dp)
}

/// Gauss–Legendre on `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Rule {
    let base = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    Rule {
        nodes: base.nodes.iter().map(|t| c + h * t).collect(),
        weights: base.weights.iter().map(|w| w * h).collect(),
    }
}

/// Rule on `(0, ∞)` from `x = s(1 - t)/t`, `t ∈ (0, 1)`, Gauss–Legendre in `t`.
///
/// Nodes are returned in increasing `x`.
pub fn semi_infinite(n: usize, scale: f64) -> Rule {
    assert!(scale > 0.0);
    let base = gauss_legendre_on(n, 0.0, 1.0);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (t, w) in base.iter().rev() {
        nodes.push(scale * (1.0 - t) / t);
        weights.push(w * scale / (t * t));
    }
    Rule { nodes, weights }
}

/// Rule on `[-l, l]` (or `[0, l]` when `half`) clustered toward zero by
/// `k = l sinh(βu)/sinh(β)`, Gauss–Legendre in `u`. `β = 0` is plain
/// Gauss–Legendre.
pub fn clustered(n: usize, l: f64, beta: f64, half: bool) -> Rule {
    let base = if half { gauss_legendre_on(n, 0.0, 1.0) } else { gauss_legendre(n) };
    if beta < 1e-8 {
        return Rule {
            nodes: base.nodes.iter().map(|u| u * l).collect(),
            weights: base.weights.iter().map(|w| w * l).collect(),
        };
    }
    let sb = beta.sinh();
    let (nodes, weights) = base
        .iter()
        .map(|(u, w)| (l * (beta * u).sinh() / sb, w * l * beta * (beta * u).cosh() / sb))
        .unzip();
    Rule { nodes, weights }
}

/// Imaginary-frequency grid in units of `c/a`.
///
/// Nodes are strictly increasing and weights positive.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    rule: Rule,
}

impl FrequencyGrid {
    /// Rational-map Gauss–Legendre grid with characteristic frequency `xi0`.
    pub fn rational(n: usize, xi0: f64) -> Self {
        FrequencyGrid { rule: semi_infinite(n, xi0) }
    }

    pub fn from_rule(rule: Rule) -> Result<Self> {
        if rule.nodes.windows(2).any(|w| w[1] <= w[0]) || rule.nodes.first().is_some_and(|&x| x <= 0.0) {
            return Err(Error::InvalidParameter("frequency nodes must be positive and strictly increasing".into()));
        }
        if rule.weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::InvalidParameter("frequency weights must be positive".into()));
        }
        Ok(FrequencyGrid { rule })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.rule.nodes
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }
}

/// Natural cubic spline through `(x_i, y_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>, // second derivatives
}

impl CubicSpline {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::InvalidParameter("spline needs at least two matching samples".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("spline abscissae must increase".into()));
        }
        let mut m = alloc::vec![0.0; n];
        if n > 2 {
            // Tridiagonal solve for interior second derivatives.
            let mut c = alloc::vec![0.0; n];
            let mut d = alloc::vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let a = h0;
                let b = 2.0 * (h0 + h1);
                let cc = h1;
                let r = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
                let denom = b - a * c[i - 1];
                c[i] = cc / denom;
                d[i] = (r - a * d[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - c[i] * m[i + 1];
            }
        }
        Ok(CubicSpline { x: x.to_vec(), y: y.to_vec(), m })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    /// Exact integral of the spline over `[lo, hi]` within the domain.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        if hi < lo {
            return -self.integral(hi, lo);
        }
        let antideriv = |i: usize, t: f64| -> f64 {
            let h = self.x[i + 1] - self.x[i];
            let a = (self.x[i + 1] - t) / h;
            let b = (t - self.x[i]) / h;
            // ∫ from x_i to t
            let f = |a: f64, b: f64| {
                -h * (0.5 * a * a * self.y[i]) + h * 0.5 * b * b * self.y[i + 1]
                    + h * h * h / 6.0 * (-(0.25 * a.powi(4) - 0.5 * a * a) * self.m[i] + (0.25 * b.powi(4) - 0.5 * b * b) * self.m[i + 1])
            };
            f(a, b) - f(1.0, 0.0)
        };
        let i0 = self.segment(lo);
        let i1 = self.segment(hi);
        if i0 == i1 {
            return antideriv(i0, hi) - antideriv(i0, lo);
        }
        let mut s = antideriv(i0, self.x[i0 + 1]) - antideriv(i0, lo);
        for i in i0 + 1..i1 {
            s += antideriv(i, self.x[i + 1]);
        }
        s + antideriv(i1, hi)
    }
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson).
///
/// Reproduces the samples exactly and never overshoots between them.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::InvalidParameter("interpolant needs at least two matching samples".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("interpolant abscissae must increase".into()));
        }
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut d = alloc::vec![0.0; n];
        d[0] = delta[0];
        d[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            d[i] = if delta[i - 1] * delta[i] <= 0.0 {
                0.0
            } else {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i])
            };
        }
        for i in 0..n - 1 {
            if delta[i] == 0.0 {
                d[i] = 0.0;
                d[i + 1] = 0.0;
            }
        }
        Ok(MonotoneCubic { x: x.to_vec(), y: y.to_vec(), d })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => return self.y[i],
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 2..12 {
            let r = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let got = r.integrate(|x| x.powi(deg as i32));
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn semi_infinite_rule_integrates_exponential() {
        let r = semi_infinite(40, 1.0);
        assert!(r.nodes.windows(2).all(|w| w[1] > w[0]));
        let got = r.integrate(|x| (-2.0 * x).exp());
        assert!((got - 0.5).abs() < 1e-10);
        let got = r.integrate(|x| 1.0 / (1.0 + x * x));
        assert!((got - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn frequency_grid_rejects_bad_nodes() {
        let bad = Rule { nodes: alloc::vec![1.0, 0.5], weights: alloc::vec![1.0, 1.0] };
        assert!(FrequencyGrid::from_rule(bad).is_err());
        let g = FrequencyGrid::rational(8, 2.0);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn clustered_rule_integrates_peaked_functions() {
        // ∫_{-π}^{π} e^{-6|k|} dk = (1 - e^{-6π})/3
        let want = (1.0 - (-6.0 * PI).exp()) / 3.0;
        let r = clustered(32, PI, 3.0, true);
        let got = 2.0 * r.integrate(|k| (-6.0 * k).exp());
        assert!((got - want).abs() < 1e-8 * want, "{got} {want}");
        let r = clustered(9, 2.0, 0.0, false);
        assert!((r.integrate(|k| k * k) - 16.0 / 3.0).abs() < 1e-13);
        let r = clustered(12, 2.0, 1.5, false);
        assert!((r.integrate(|k| k.cos()) - 2.0 * 2f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn spline_integral_matches_quadrature() {
        let x: Vec<f64> = (0..20).map(|i| 0.1 + 0.2 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| (-v).exp() * v.sin()).collect();
        let s = CubicSpline::new(&x, &y).unwrap();
        // Piecewise cubic: 3-point Gauss is exact on each knot interval.
        let mut cuts = alloc::vec![0.35];
        cuts.extend(x.iter().copied().filter(|&v| v > 0.35 && v < 3.3));
        cuts.push(3.3);
        let q: f64 = cuts.windows(2).map(|w| gauss_legendre_on(3, w[0], w[1]).integrate(|t| s.eval(t))).sum();
        assert!((s.integral(0.35, 3.3) - q).abs() < 1e-12);
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.eval(*xi) - yi).abs() < 1e-14);
        }
    }

    #[test]
    fn monotone_cubic_does_not_overshoot() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [10.0, 9.9, 2.0, 1.9, 1.0];
        let m = MonotoneCubic::new(&x, &y).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=400 {
            let v = m.eval(i as f64 * 0.01);
            assert!(v <= prev + 1e-14);
            prev = v;
        }
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(m.eval(*xi), *yi);
        }
    }
}
