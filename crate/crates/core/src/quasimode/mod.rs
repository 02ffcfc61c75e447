//! Approximate eigenfunctions `F = φ(x) b(y) x^λ` on a collar.
//!
//! All radial integrals run in `u = log(x₁/x)`. With `Re λ = n/p` the weight
//! `|x^λ|^p · x^{−n−1} dx` becomes `du`, so every integrand is bounded in `u`
//! and the cutoff depth `L = log(x₁/δ)` can be astronomically large.

mod bump;
mod cutoff;

pub use bump::{find_bump_ball, BumpB};
pub use cutoff::{CutoffPhi, Smoothstep};

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{GeometryError, ModelMetric, RadialCutoff, ReducedTerms};
use crate::quadrature::{pairwise_sum, GaussLegendre, Rule};
use crate::region::{ComplexPoint, RegionError};

/// Slack `C_pass` in `ratio ≤ C_pass · ε`.
pub const DEFAULT_PASS_SLACK: f64 = 3.0;
/// Constant `C_L` in the depth coupling `L ≥ (C_L r^{−N} / ε)^p`.
pub const DEFAULT_COUPLING: f64 = 8.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuasimodeError {
    #[error("cutoff depth L = {0} must exceed log 4")]
    Depth(f64),
    #[error("smoothstep order {0} must be at least 2")]
    SmoothnessOrder(usize),
    #[error("epsilon = {0} must be positive")]
    Epsilon(f64),
    #[error("p must lie in [1,2]; use conjugateExponent for p>2 (got {0})")]
    Exponent(f64),
    #[error("A = {a} is not in the range of alpha^2, [{lo}, {hi}]")]
    EmptyPreimage { a: f64, lo: f64, hi: f64 },
    #[error("Re(lambda) = {got} but the quasimode requires Re(lambda) = n/p = {expected}")]
    RealPart { expected: f64, got: f64 },
    #[error("depth L = {depth} violates the coupling L >= {required} for the requested epsilon")]
    Coupling { depth: f64, required: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Region(#[from] RegionError),
}

/// How the torus factor `b` is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum BumpChoice {
    /// Ball from [`find_bump_ball`] at tolerance `ε / max(1, |λ(n − λ)|)`, so
    /// that term I is pointwise at most `ε |F|`.
    Auto,
    Given(BumpB),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasimodeSpec {
    pub p: f64,
    pub a: f64,
    pub epsilon: f64,
    pub lambda: Complex64,
    /// `L = log(x₁/δ)`.
    pub depth: f64,
    pub smoothness: usize,
    pub bump: BumpChoice,
}

impl QuasimodeSpec {
    /// Spec with `λ = n/p + i s`, smoothstep order 2 and an automatic bump.
    pub fn new(n: u32, p: f64, a: f64, epsilon: f64, s: f64, depth: f64) -> Self {
        Self {
            p,
            a,
            epsilon,
            lambda: Complex64::new(f64::from(n) / p, s),
            depth,
            smoothness: 2,
            bump: BumpChoice::Auto,
        }
    }

    pub fn with_bump(mut self, bump: BumpB) -> Self {
        self.bump = BumpChoice::Given(bump);
        self
    }

    pub fn with_smoothness(mut self, k: usize) -> Self {
        self.smoothness = k;
        self
    }

    pub fn with_depth(mut self, depth: f64) -> Self {
        self.depth = depth;
        self
    }
}

/// Smallest admissible depth `(C_L r^{−N} / ε)^p`, with `r` capped at 1 so
/// that wide bumps do not relax the condition, and at least `log 4 + 1`.
pub fn coupled_depth(p: f64, epsilon: f64, radius: f64, order: u32, coupling: f64) -> f64 {
    let r = radius.min(1.0);
    (coupling * r.powi(-(order as i32)) / epsilon).powf(p).max(2.0 * LN_2 + 1.0)
}

/// Quadrature resolution for norms and residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasimodeQuadrature {
    pub gl_order: usize,
    /// Panels in each cutoff transition zone.
    pub zone_panels: usize,
    /// Largest panel width on the plateau below `plateau_cap`.
    pub plateau_width: f64,
    /// Beyond this `u` the plateau integrand is constant to rounding and one
    /// panel suffices.
    pub plateau_cap: f64,
    /// Trapezoid nodes per torus direction.
    pub torus_points: usize,
}

impl Default for QuasimodeQuadrature {
    fn default() -> Self {
        Self { gl_order: 16, zone_panels: 8, plateau_width: 1.0, plateau_cap: 40.0, torus_points: 24 }
    }
}

impl QuasimodeQuadrature {
    fn u_rule(&self, depth: f64) -> Rule {
        let gl = GaussLegendre::new(self.gl_order);
        let zone = |a: f64, b: f64, k: usize| (0..=k).map(move |i| a + (b - a) * i as f64 / k as f64);
        let mut breaks: Vec<f64> = zone(0.0, LN_2, self.zone_panels).collect();
        let inner = depth - LN_2;
        let top = inner.min(self.plateau_cap.max(LN_2));
        if top > LN_2 {
            let k = ((top - LN_2) / self.plateau_width).ceil().max(1.0) as usize;
            breaks.extend(zone(LN_2, top, k).skip(1));
        }
        if inner > top {
            breaks.push(inner);
        }
        breaks.extend(zone(inner, depth, self.zone_panels).skip(1));
        Rule::composite(&gl, &breaks)
    }
}

/// Per-node sums of `|·|^p · √h/α · du dy`, in the order
/// `[F, I, II, III, IV, V, VI, VII, ΔF − ΛF]`.
type Sums = [f64; 9];

/// An evaluable quasimode `F = φ(x) b(y) x^λ` on a fixed metric.
#[derive(Debug, Clone)]
pub struct Quasimode<'m> {
    metric: &'m ModelMetric,
    spec: QuasimodeSpec,
    phi: CutoffPhi,
    bump: BumpB,
    eigenvalue: Complex64,
}

impl<'m> Quasimode<'m> {
    pub fn new(spec: QuasimodeSpec, metric: &'m ModelMetric) -> Result<Self, QuasimodeError> {
        let n = f64::from(metric.n());
        if !(1.0..=2.0).contains(&spec.p) {
            return Err(QuasimodeError::Exponent(spec.p));
        }
        if !(spec.epsilon > 0.0 && spec.epsilon.is_finite()) {
            return Err(QuasimodeError::Epsilon(spec.epsilon));
        }
        let expected = n / spec.p;
        if (spec.lambda.re - expected).abs() > 1e-12 * expected.max(1.0) {
            return Err(QuasimodeError::RealPart { expected, got: spec.lambda.re });
        }
        let phi = CutoffPhi::new(spec.depth, spec.smoothness)?;
        let spectral = spec.lambda * (n - spec.lambda);
        let bump = match &spec.bump {
            BumpChoice::Given(b) => b.clone(),
            BumpChoice::Auto => find_bump_ball(&metric.profile, spec.a, spec.epsilon / spectral.norm().max(1.0))?,
        };
        let eigenvalue = spec.a * spectral;
        Ok(Self { metric, spec, phi, bump, eigenvalue })
    }

    pub fn spec(&self) -> &QuasimodeSpec {
        &self.spec
    }

    pub fn cutoff(&self) -> &CutoffPhi {
        &self.phi
    }

    pub fn bump(&self) -> &BumpB {
        &self.bump
    }

    /// `Λ = A λ (n − λ)`.
    pub fn eigenvalue(&self) -> Complex64 {
        self.eigenvalue
    }

    /// Support of `φ` as `(δ, x₁)` in log form: `(u_min, u_max)`.
    pub fn support_u(&self) -> (f64, f64) {
        self.phi.support()
    }

    /// Depth required by the coupling rule for this bump.
    pub fn required_depth(&self, coupling: f64) -> f64 {
        coupled_depth(self.spec.p, self.spec.epsilon, self.bump.radius, self.bump.order, coupling)
    }

    /// `F` at collar coordinates `(u, y)`.
    pub fn value_u(&self, u: f64, y: &[f64]) -> Complex64 {
        use crate::geometry::TorusFunction;
        let mut grad = vec![0.0; y.len()];
        let (b, _) = self.bump.sample(y, &mut grad);
        let x = self.metric.x_from_u(u);
        self.phi.sample_u(u).phi * b * Complex64::from(x).powc(self.spec.lambda)
    }

    /// Analytic `ΔF` at `(u, y)`.
    pub fn laplacian_u(&self, u: f64, y: &[f64]) -> Complex64 {
        let x = self.metric.x_from_u(u);
        let mut scratch = vec![0.0; 2 * y.len()];
        let (terms, _) =
            self.metric.reduced_terms(self.spec.lambda, x, self.phi.sample_u(u), &self.bump, y, &mut scratch);
        terms.total() * Complex64::from(x).powc(self.spec.lambda)
    }

    fn torus_nodes(&self, quad: &QuasimodeQuadrature) -> Vec<(Vec<f64>, f64)> {
        let n = self.metric.n() as usize;
        if self.bump.uniform && self.metric.profile.is_constant() {
            return vec![(vec![0.0; n], self.metric.torus_volume())];
        }
        let rule = if self.bump.uniform {
            Rule::periodic(quad.torus_points.max(4))
        } else {
            let (lo, hi) = self.bump.bounding_box()[0];
            Rule::trapezoid(0.0, hi - lo, quad.torus_points.max(4))
        };
        let m = rule.len();
        let offsets: Vec<f64> =
            if self.bump.uniform { vec![0.0; n] } else { self.bump.bounding_box().iter().map(|b| b.0).collect() };
        (0..m.pow(n as u32))
            .map(|mut idx| {
                let mut y = Vec::with_capacity(n);
                let mut w = 1.0;
                for off in &offsets {
                    let (t, wt) = rule.points[idx % m];
                    y.push((off + t).rem_euclid(2.0 * PI));
                    w *= wt;
                    idx /= m;
                }
                (y, w)
            })
            .collect()
    }

    fn integrate(&self, quad: &QuasimodeQuadrature) -> Sums {
        let p = self.spec.p;
        let lambda = self.spec.lambda;
        let n = f64::from(self.metric.n());
        let spectral_a = self.spec.a * lambda * (n - lambda);
        let u_rule = self.phi_rule(quad);
        let torus = self.torus_nodes(quad);
        let dim = self.metric.n() as usize;
        let per_u: Vec<Sums> = u_rule
            .points
            .par_iter()
            .map(|&(u, wu)| {
                let mut acc = [0.0; 9];
                let cutoff = self.phi.sample_u(u);
                if cutoff.phi == 0.0 && cutoff.x_dphi == 0.0 && cutoff.x2_d2phi == 0.0 {
                    return acc;
                }
                let x = self.metric.x_from_u(u);
                let sqrt_h = self.metric.sqrt_h(x);
                let mut scratch = vec![0.0; 2 * dim];
                for (y, wy) in &torus {
                    let (t, alpha): (ReducedTerms, f64) =
                        self.metric.reduced_terms(lambda, x, cutoff, &self.bump, y, &mut scratch);
                    let w = wu * wy * sqrt_h / alpha;
                    let term_i = t.eigen - spectral_a * t.f;
                    let vals = [
                        t.f,
                        term_i,
                        t.cutoff_first,
                        t.volume_first,
                        t.cutoff_second,
                        t.volume_second,
                        t.boundary_laplacian,
                        t.log_alpha_gradient,
                        term_i + t.remainder(),
                    ];
                    for (a, v) in acc.iter_mut().zip(vals) {
                        *a += w * v.norm().powf(p);
                    }
                }
                acc
            })
            .collect();
        let mut out = [0.0; 9];
        for (k, o) in out.iter_mut().enumerate() {
            let column: Vec<f64> = per_u.iter().map(|s| s[k]).collect();
            *o = pairwise_sum(&column);
        }
        out
    }

    fn phi_rule(&self, quad: &QuasimodeQuadrature) -> Rule {
        quad.u_rule(self.phi.depth())
    }

    /// `‖F‖_p`.
    pub fn lp_norm(&self, quad: &QuasimodeQuadrature) -> f64 {
        self.integrate(quad)[0].powf(1.0 / self.spec.p)
    }

    /// Bounds `m·(∫∫|φb|^p du dy)^{1/p} ≤ ‖F‖_p ≤ M·(…)^{1/p}` with `m`, `M` the
    /// extremes of `(√h/α)^{1/p}` over the support.
    pub fn norm_bounds(&self, quad: &QuasimodeQuadrature) -> (f64, f64) {
        use crate::geometry::TorusFunction;
        let p = self.spec.p;
        let u_rule = self.phi_rule(quad);
        let torus = self.torus_nodes(quad);
        let mut grad = vec![0.0; self.metric.n() as usize];
        let torus_int: f64 = torus.iter().map(|(y, w)| w * self.bump.sample(y, &mut grad).0.abs().powf(p)).sum();
        let radial: f64 = u_rule.apply(|u| self.phi.sample_u(u).phi.abs().powf(p));
        let base = (torus_int * radial).powf(1.0 / p);
        let lo = 1.0 / self.metric.profile.alpha1();
        let hi = self.metric.sqrt_h(self.metric.x1) / self.metric.profile.alpha0();
        (base * lo.powf(1.0 / p), base * hi.powf(1.0 / p))
    }

    /// `‖ΔF − ΛF‖_p`, the seven term norms and the pass flag at slack `c_pass`.
    pub fn residual(&self, quad: &QuasimodeQuadrature, c_pass: f64) -> ResidualReport {
        let sums = self.integrate(quad);
        let inv = 1.0 / self.spec.p;
        let f_norm = sums[0].powf(inv);
        let mut terms = [0.0; 7];
        for (t, s) in terms.iter_mut().zip(&sums[1..8]) {
            *t = s.powf(inv);
        }
        let total = sums[8].powf(inv);
        let ratio = total / f_norm;
        ResidualReport {
            p: self.spec.p,
            a: self.spec.a,
            epsilon: self.spec.epsilon,
            depth: self.spec.depth,
            lambda: self.spec.lambda.into(),
            eigenvalue: self.eigenvalue.into(),
            norms: ResidualNorms { f: f_norm, terms, total },
            ratio,
            pass: ratio <= c_pass * self.spec.epsilon,
        }
    }
}

/// A complex number serialized as `{re, im}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReIm {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ReIm {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualNorms {
    #[serde(rename = "F")]
    pub f: f64,
    /// Norms of terms I–VII.
    pub terms: [f64; 7],
    pub total: f64,
}

/// JSON form `{p, A, epsilon, L, lambda, Lambda, norms, ratio, pass}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub p: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub epsilon: f64,
    #[serde(rename = "L")]
    pub depth: f64,
    pub lambda: ReIm,
    #[serde(rename = "Lambda")]
    pub eigenvalue: ReIm,
    pub norms: ResidualNorms,
    pub ratio: f64,
    pub pass: bool,
}

/// Outcome of [`verify_quasimode`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Verification {
    pub report: ResidualReport,
    pub bump_radius: f64,
    pub required_depth: f64,
}

/// Checks the depth coupling, then evaluates the residual ratio against
/// `c_pass · ε`.
pub fn verify_quasimode(
    spec: QuasimodeSpec,
    metric: &ModelMetric,
    quad: &QuasimodeQuadrature,
    c_pass: f64,
    coupling: f64,
) -> Result<Verification, QuasimodeError> {
    let q = Quasimode::new(spec, metric)?;
    let required = q.required_depth(coupling);
    if q.spec.depth < required {
        return Err(QuasimodeError::Coupling { depth: q.spec.depth, required });
    }
    Ok(Verification { report: q.residual(quad, c_pass), bump_radius: q.bump.radius, required_depth: required })
}

/// A spectral value witnessed by a quasimode, with its parameters `(A, q, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralSample {
    #[serde(rename = "Lambda")]
    pub value: ComplexPoint,
    #[serde(rename = "A")]
    pub a: f64,
    pub q: f64,
    pub s: f64,
}

/// `Λ` values of the given quasimodes, with `q = p` and `s = Im λ`.
pub fn spectral_sample(modes: &[Quasimode<'_>]) -> Vec<SpectralSample> {
    modes
        .iter()
        .map(|m| SpectralSample { value: m.eigenvalue.into(), a: m.spec.a, q: m.spec.p, s: m.spec.lambda.im })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryProfile;

    fn metric(n: u32, alpha: f64, c: f64) -> ModelMetric {
        ModelMetric::new(BoundaryProfile::constant(n, alpha).unwrap(), 1.0, c, 0.0).unwrap()
    }

    #[test]
    fn rejects_wrong_real_part() {
        let m = metric(2, 1.0, 0.0);
        let mut spec = QuasimodeSpec::new(2, 1.5, 1.0, 0.1, 0.0, 100.0);
        spec.lambda.re = 1.0;
        assert!(matches!(Quasimode::new(spec, &m), Err(QuasimodeError::RealPart { .. })));
        let spec = QuasimodeSpec::new(2, 3.0, 1.0, 0.1, 0.0, 100.0);
        assert!(matches!(Quasimode::new(spec, &m), Err(QuasimodeError::Exponent(_))));
    }

    #[test]
    fn constant_alpha_norm_matches_one_dimensional_integral() {
        let alpha = 1.3;
        let m = metric(1, alpha, 0.0);
        let spec = QuasimodeSpec::new(1, 1.5, alpha * alpha, 0.1, 0.7, 50.0);
        let q = Quasimode::new(spec, &m).unwrap();
        assert!(q.bump().uniform);
        let quad = QuasimodeQuadrature::default();
        let gl = GaussLegendre::new(40);
        let phi = q.cutoff();
        // Independent radial integral over the three zones.
        let radial = gl.integrate(0.0, LN_2, |u| phi.sample_u(u).phi.powf(1.5))
            + (50.0 - 2.0 * LN_2)
            + gl.integrate(50.0 - LN_2, 50.0, |u| phi.sample_u(u).phi.powf(1.5));
        let want = (2.0 * PI / alpha * radial).powf(1.0 / 1.5);
        let got = q.lp_norm(&quad);
        assert!(((got - want) / want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn coupling_is_enforced() {
        let m = metric(1, 1.0, 0.0);
        let quad = QuasimodeQuadrature::default();
        let spec = QuasimodeSpec::new(1, 1.0, 1.0, 0.1, 0.0, 10.0);
        assert!(matches!(
            verify_quasimode(spec, &m, &quad, DEFAULT_PASS_SLACK, DEFAULT_COUPLING),
            Err(QuasimodeError::Coupling { .. })
        ));
    }
}
