//! Quadrature rules shared by the volume and quasimode integrals.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes from Newton iteration on `P_n` started at the Chebyshev-like
    /// guesses `cos(π(i − 1/4)/(n + 1/2))`.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
    }

    /// Mapped nodes and weights for `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, w * half))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    if n == 1 {
        (x, 1.0)
    } else {
        (p1, d)
    }
}

/// A 1-D rule as an explicit list of `(node, weight)` pairs.
#[derive(Debug, Clone, Default)]
pub struct Rule {
    pub points: Vec<(f64, f64)>,
}

impl Rule {
    /// Composite Gauss–Legendre over the given panel breakpoints.
    pub fn composite(gl: &GaussLegendre, breaks: &[f64]) -> Self {
        let mut points = Vec::with_capacity(breaks.len().saturating_sub(1) * gl.nodes.len());
        for w in breaks.windows(2) {
            if w[1] > w[0] {
                points.extend(gl.mapped(w[0], w[1]));
            }
        }
        Self { points }
    }

    /// Periodic trapezoid rule on `[0, 2π)` with `m` nodes; spectrally
    /// accurate for smooth periodic integrands.
    pub fn periodic(m: usize) -> Self {
        let h = 2.0 * PI / m as f64;
        Self { points: (0..m).map(|i| (i as f64 * h, h)).collect() }
    }

    /// Trapezoid rule on `[a, b]` with `m ≥ 2` nodes.
    pub fn trapezoid(a: f64, b: f64, m: usize) -> Self {
        assert!(m >= 2);
        let h = (b - a) / (m - 1) as f64;
        let points = (0..m)
            .map(|i| {
                let w = if i == 0 || i == m - 1 { 0.5 * h } else { h };
                (a + i as f64 * h, w)
            })
            .collect();
        Self { points }
    }

    pub fn apply<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.points.iter().map(|&(x, w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Composite Simpson rule with `2m` subintervals on `[a, b]`.
pub fn simpson<F: FnMut(f64) -> f64>(a: f64, b: f64, m: usize, mut f: F) -> f64 {
    let m = m.max(1);
    let n = 2 * m;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let c = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += c * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Pairwise summation; deterministic for a given input order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for order in [1, 2, 5, 16, 24] {
            let gl = GaussLegendre::new(order);
            let total: f64 = gl.weights.iter().sum();
            assert_relative_eq!(total, 2.0, max_relative = 1e-14);
            let deg = 2 * order - 1;
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            let got = gl.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
            assert!((got - exact).abs() < 1e-13, "order {order}");
            let even = 2 * order - 2;
            let got = gl.integrate(0.0, 1.0, |x| x.powi(even as i32));
            assert_relative_eq!(got, 1.0 / (even as f64 + 1.0), max_relative = 1e-13);
        }
    }

    #[test]
    fn composite_and_periodic_rules() {
        let gl = GaussLegendre::new(8);
        let rule = Rule::composite(&gl, &[0.0, 1.0, 3.0, 3.0, 5.0]);
        assert_eq!(rule.len(), 24);
        assert_relative_eq!(rule.apply(|x| x.exp()), 5f64.exp() - 1.0, max_relative = 1e-14);

        let per = Rule::periodic(32);
        assert_relative_eq!(per.apply(|y| y.cos().exp()), 2.0 * PI * 1.266_065_877_752_008_4, max_relative = 1e-14);
    }

    #[test]
    fn simpson_fourth_order() {
        let exact = 1f64.exp() - 1.0;
        let e1 = (simpson(0.0, 1.0, 4, f64::exp) - exact).abs();
        let e2 = (simpson(0.0, 1.0, 8, f64::exp) - exact).abs();
        assert!(e1 / e2 > 14.0);
    }

    #[test]
    fn pairwise_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        assert_relative_eq!(pairwise_sum(&v), v.iter().sum::<f64>(), max_relative = 1e-12);
    }
}
