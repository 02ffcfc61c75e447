use std::f64::consts::PI;

use serde::Serialize;

use crate::geometry::{AlphaSpec, BoundaryProfile, TorusFunction};

use super::QuasimodeError;

/// Nodes per unit length of the 1-D grid used to certify bump balls.
const CERTIFY_DENSITY: f64 = 4000.0;

/// Smooth bump on the torus.
///
/// `Ball` is `amplitude · exp(1 − 1/(1 − ρ²))` with `ρ = |y − center|/radius`,
/// measured in wrapped coordinates. `Uniform` is the constant `amplitude` and
/// is used when the whole torus already maps into `(A − ε, A + ε)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BumpB {
    pub center: Vec<f64>,
    pub radius: f64,
    pub amplitude: f64,
    pub uniform: bool,
    /// Exponent `N` in `‖Δ_h b‖_p ≲ r^{−N} ‖b‖_p`; 2 for a rescaled fixed profile.
    pub order: u32,
}

impl BumpB {
    pub fn uniform(n: u32) -> Self {
        Self { center: vec![0.0; n as usize], radius: PI, amplitude: 1.0, uniform: true, order: 2 }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        Self { center, radius, amplitude: 1.0, uniform: false, order: 2 }
    }

    pub fn scaled(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn translated(mut self, shift: &[f64]) -> Self {
        for (c, s) in self.center.iter_mut().zip(shift) {
            *c = (*c + s).rem_euclid(2.0 * PI);
        }
        self
    }

    /// Axis-aligned box `[cᵢ − r, cᵢ + r]` containing the support.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        self.center.iter().map(|&c| (c - self.radius, c + self.radius)).collect()
    }
}

fn wrap(d: f64) -> f64 {
    (d + PI).rem_euclid(2.0 * PI) - PI
}

impl TorusFunction for BumpB {
    fn sample(&self, y: &[f64], grad: &mut [f64]) -> (f64, f64) {
        if self.uniform {
            grad.iter_mut().for_each(|g| *g = 0.0);
            return (self.amplitude, 0.0);
        }
        let r2 = self.radius * self.radius;
        let mut z2 = 0.0;
        for ((g, &yi), &ci) in grad.iter_mut().zip(y).zip(&self.center) {
            let z = wrap(yi - ci);
            *g = z;
            z2 += z * z;
        }
        let rho2 = z2 / r2;
        if rho2 >= 1.0 {
            grad.iter_mut().for_each(|g| *g = 0.0);
            return (0.0, 0.0);
        }
        let q = 1.0 - rho2;
        let b = self.amplitude * (1.0 - 1.0 / q).exp();
        let k = -2.0 * b / (r2 * q * q);
        grad.iter_mut().for_each(|g| *g *= k);
        let n = y.len() as f64;
        let lap = k * (n - 2.0 * rho2 / (q * q) + 4.0 * rho2 / q);
        (b, lap)
    }
}

/// Extremes of `g(t) = α(t, …) − a₀ per coordinate` over `[lo, hi]`, as a
/// certified enclosure using a dense grid and the Lipschitz constant of `g`.
fn enclose_1d(profile: &BoundaryProfile, lo: f64, hi: f64) -> (f64, f64) {
    let g = |t: f64| profile.alpha(&[t]);
    let m = (((hi - lo) * CERTIFY_DENSITY).ceil() as usize).max(16);
    let h = (hi - lo) / m as f64;
    let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=m {
        let v = g(lo + i as f64 * h);
        mn = mn.min(v);
        mx = mx.max(v);
    }
    let margin = profile_lipschitz_1d(profile) * h / 2.0;
    (mn - margin, mx + margin)
}

fn profile_lipschitz_1d(profile: &BoundaryProfile) -> f64 {
    profile.lipschitz() / f64::from(profile.n()).sqrt()
}

/// Certified range of `α²` over the box `[c − r, c + r]ⁿ` for a diagonal centre.
fn alpha_sq_range_on_box(profile: &BoundaryProfile, spec_a0: f64, c: f64, r: f64) -> (f64, f64) {
    let n = f64::from(profile.n());
    // With α(y) = a₀ + Σ g(yᵢ) the box extremes separate by coordinate.
    let (gmin, gmax) = enclose_1d(profile, c - r, c + r);
    let lo = spec_a0 + n * (gmin - spec_a0);
    let hi = spec_a0 + n * (gmax - spec_a0);
    (lo.max(0.0).powi(2), hi.powi(2))
}

/// Bump ball for the quasimode at curvature value `A`.
///
/// The centre is a diagonal point `(t, …, t)` with `α²` closest to `A`; the
/// radius is the largest for which the certified range of `α²` on the
/// enclosing box stays inside `(A − ε, A + ε)`.
pub fn find_bump_ball(profile: &BoundaryProfile, a: f64, epsilon: f64) -> Result<BumpB, QuasimodeError> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(QuasimodeError::Epsilon(epsilon));
    }
    let (a0sq, a1sq) = (profile.alpha0().powi(2), profile.alpha1().powi(2));
    let tol = 1e-9 * a.abs().max(1.0);
    if !(a >= a0sq - tol && a <= a1sq + tol) {
        return Err(QuasimodeError::EmptyPreimage { a, lo: a0sq, hi: a1sq });
    }
    if (a1sq - a).abs().max((a - a0sq).abs()) < epsilon {
        return Ok(BumpB::uniform(profile.n()));
    }
    let spec_a0 = match profile.spec() {
        AlphaSpec::Trig { a0, .. } => *a0,
        AlphaSpec::Constant { value } => *value,
    };
    let center = diagonal_preimage(profile, a);
    let fits = |r: f64| {
        let (lo, hi) = alpha_sq_range_on_box(profile, spec_a0, center, r);
        lo > a - epsilon && hi < a + epsilon
    };
    if !fits(0.0) {
        return Err(QuasimodeError::EmptyPreimage { a, lo: a0sq, hi: a1sq });
    }
    let (mut lo, mut hi) = (0.0, PI);
    if fits(hi) {
        lo = hi;
    }
    for _ in 0..60 {
        if hi - lo < 1e-10 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo <= 0.0 {
        return Err(QuasimodeError::EmptyPreimage { a, lo: a0sq, hi: a1sq });
    }
    Ok(BumpB::ball(vec![center; profile.n() as usize], lo))
}

/// A `t` with `α(t, …, t)² = A`, bracketed between the diagonal argmin and argmax.
fn diagonal_preimage(profile: &BoundaryProfile, a: f64) -> f64 {
    let n = profile.n() as usize;
    let f = |t: f64| profile.alpha(&vec![t; n]).powi(2) - a;
    let (t_lo, t_hi) = (profile.argmin()[0], profile.argmax()[0]);
    let (flo, fhi) = (f(t_lo), f(t_hi));
    if flo >= 0.0 {
        return t_lo;
    }
    if fhi <= 0.0 {
        return t_hi;
    }
    let (mut x0, mut x1) = (t_lo, t_hi);
    for _ in 0..200 {
        let mid = 0.5 * (x0 + x1);
        if f(mid) < 0.0 {
            x0 = mid;
        } else {
            x1 = mid;
        }
        if (x1 - x0).abs() < 1e-15 {
            break;
        }
    }
    (0.5 * (x0 + x1)).rem_euclid(2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_matches_finite_differences() {
        let b = BumpB::ball(vec![1.0, 6.0], 0.8);
        let y = [1.3, 6.2];
        let mut g = [0.0; 2];
        let (v, lap) = b.sample(&y, &mut g);
        assert!(v > 0.0);
        let h = 1e-4;
        let mut fd_lap = 0.0;
        let mut tmp = [0.0; 2];
        for i in 0..2 {
            let mut yp = y;
            let mut ym = y;
            yp[i] += h;
            ym[i] -= h;
            let (fp, _) = b.sample(&yp, &mut tmp);
            let (fm, _) = b.sample(&ym, &mut tmp);
            assert!((g[i] - (fp - fm) / (2.0 * h)).abs() < 1e-7);
            fd_lap += (fp - 2.0 * v + fm) / (h * h);
        }
        assert!((lap - fd_lap).abs() < 1e-5, "{lap} vs {fd_lap}");
    }

    #[test]
    fn bump_wraps_across_the_seam() {
        let b = BumpB::ball(vec![0.1], 0.5);
        let mut g = [0.0];
        assert!(b.sample(&[2.0 * PI - 0.2], &mut g).0 > 0.0);
        assert_eq!(b.sample(&[PI], &mut g).0, 0.0);
    }

    #[test]
    fn constant_profile_gives_uniform_bump() {
        let p = BoundaryProfile::constant(2, 1.5).unwrap();
        let b = find_bump_ball(&p, 2.25, 0.1).unwrap();
        assert!(b.uniform);
        assert!(find_bump_ball(&p, 3.0, 0.1).is_err());
    }

    #[test]
    fn cosine_profile_radius_matches_root() {
        let p = BoundaryProfile::new(1, "trig:1.5,0.5".parse().unwrap()).unwrap();
        let b = find_bump_ball(&p, 4.0, 0.1).unwrap();
        assert!(b.center[0].min(2.0 * PI - b.center[0]) < 1e-6);
        // α(r)² = 3.9 with α = 1.5 + 0.5 cos r.
        let exact = ((3.9f64.sqrt() - 1.5) / 0.5).acos();
        assert!((b.radius - exact).abs() < 2e-3 * exact, "{} vs {exact}", b.radius);
        let smaller = find_bump_ball(&p, 4.0, 0.05).unwrap();
        assert!(smaller.radius < b.radius);
    }
}
