use std::f64::consts::LN_2;

use crate::geometry::{CutoffSample, RadialCutoff};

use super::QuasimodeError;

/// Polynomial smoothstep `S_k` of degree `2k + 1`: `S(0) = 0`, `S(1) = 1`, and
/// the first `k` derivatives vanish at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Smoothstep {
    /// Coefficients of `t^j`, `j = 0..=2k+1`.
    coeffs: Vec<f64>,
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl Smoothstep {
    pub fn new(k: usize) -> Self {
        let mut coeffs = vec![0.0; 2 * k + 2];
        let k64 = k as u64;
        for j in 0..=k64 {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[(k64 + 1 + j) as usize] = sign * binomial(k64 + j, j) * binomial(2 * k64 + 1, k64 - j);
        }
        Self { coeffs }
    }

    /// `(S, S', S'')` at `t`, clamped to `[0, 1]`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        if t <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        if t >= 1.0 {
            return (1.0, 0.0, 0.0);
        }
        let (mut s, mut d1, mut d2) = (0.0, 0.0, 0.0);
        let mut pow = [0.0, 0.0, 1.0];
        for (j, c) in self.coeffs.iter().enumerate() {
            let jf = j as f64;
            s += c * pow[2];
            d1 += jf * c * pow[1];
            d2 += jf * (jf - 1.0) * c * pow[0];
            pow = [pow[1], pow[2], pow[2] * t];
        }
        (s, d1, d2)
    }
}

/// Radial cutoff `φ` with `φ = 0` on `(0, δ]`, `φ = 1` on `[2δ, x₁/2]` and
/// `φ(x₁) = 0`, parametrized by `L = log(x₁/δ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffPhi {
    depth: f64,
    order: usize,
    step: Smoothstep,
}

impl CutoffPhi {
    pub fn new(depth: f64, order: usize) -> Result<Self, QuasimodeError> {
        if !(depth > 2.0 * LN_2 && depth.is_finite()) {
            return Err(QuasimodeError::Depth(depth));
        }
        if order < 2 {
            return Err(QuasimodeError::SmoothnessOrder(order));
        }
        Ok(Self { depth, order, step: Smoothstep::new(order) })
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `(u_min, u_max)` of the open support in `u = log(x₁/x)`.
    pub fn support(&self) -> (f64, f64) {
        (0.0, self.depth)
    }

    /// Breakpoints where `φ` changes formula.
    pub fn knots(&self) -> [f64; 4] {
        [0.0, LN_2, self.depth - LN_2, self.depth]
    }
}

impl RadialCutoff for CutoffPhi {
    fn sample_u(&self, u: f64) -> CutoffSample {
        let l = self.depth;
        if u <= 0.0 || u >= l {
            return CutoffSample::default();
        }
        if u < LN_2 {
            // t = (x₁ − x)/(x₁/2), so x dt/dx = −2 x/x₁.
            let e = (-u).exp();
            let (s, d1, d2) = self.step.eval(2.0 * (1.0 - e));
            return CutoffSample { phi: s, x_dphi: -2.0 * e * d1, x2_d2phi: 4.0 * e * e * d2 };
        }
        if u > l - LN_2 {
            // w = x/δ ∈ [1, 2].
            let w = (l - u).exp();
            let (s, d1, d2) = self.step.eval(w - 1.0);
            return CutoffSample { phi: s, x_dphi: w * d1, x2_d2phi: w * w * d2 };
        }
        CutoffSample { phi: 1.0, x_dphi: 0.0, x2_d2phi: 0.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_endpoints() {
        for k in 2..6 {
            let s = Smoothstep::new(k);
            let (a, da, dda) = s.eval(1e-9);
            assert!(a.abs() < 1e-9 && da.abs() < 1e-6 && dda.abs() < 1e-3, "k={k}");
            let (b, db, ddb) = s.eval(1.0 - 1e-9);
            assert!((b - 1.0).abs() < 1e-9 && db.abs() < 1e-6 && ddb.abs() < 1e-3, "k={k}");
            let (m, _, _) = s.eval(0.5);
            assert!((m - 0.5).abs() < 1e-14);
        }
        assert_eq!(Smoothstep::new(1).coeffs, vec![0.0, 0.0, 3.0, -2.0]);
    }

    #[test]
    fn smoothstep_derivatives_match_finite_differences() {
        let s = Smoothstep::new(3);
        let h = 1e-5;
        for t in [0.1, 0.37, 0.8] {
            let (_, d1, d2) = s.eval(t);
            let fd1 = (s.eval(t + h).0 - s.eval(t - h).0) / (2.0 * h);
            let fd2 = (s.eval(t + h).1 - s.eval(t - h).1) / (2.0 * h);
            assert!((d1 - fd1).abs() < 1e-8);
            assert!((d2 - fd2).abs() < 1e-6);
        }
    }

    #[test]
    fn cutoff_zones() {
        let phi = CutoffPhi::new(10.0, 2).unwrap();
        assert_eq!(phi.sample_u(0.0).phi, 0.0);
        assert_eq!(phi.sample_u(5.0).phi, 1.0);
        assert_eq!(phi.sample_u(10.0).phi, 0.0);
        assert_eq!(phi.sample_u(12.0).phi, 0.0);
        for u in [0.05, 0.4, 0.69, 9.4, 9.9] {
            let s = phi.sample_u(u);
            assert!((0.0..=1.0).contains(&s.phi));
        }
        assert!(CutoffPhi::new(1.0, 2).is_err());
        assert!(CutoffPhi::new(10.0, 1).is_err());
    }

    #[test]
    fn scaled_derivatives_match_x_derivatives() {
        // Compare x φ' against a centred difference in x at an inner-zone point.
        let x1: f64 = 1.0;
        let phi = CutoffPhi::new(8.0, 2).unwrap();
        let at_x = |x: f64| phi.sample_u((x1 / x).ln());
        for x in [0.7, 0.9, 1.5 * (-8f64).exp()] {
            let h = x * 1e-4;
            let d = (at_x(x + h).phi - at_x(x - h).phi) / (2.0 * h);
            let dd = (at_x(x + h).phi - 2.0 * at_x(x).phi + at_x(x - h).phi) / (h * h);
            let s = at_x(x);
            assert!((s.x_dphi - x * d).abs() < 1e-6, "{x}");
            assert!((s.x2_d2phi - x * x * dd).abs() < 1e-3, "{x}");
        }
    }
}
