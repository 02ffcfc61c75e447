//! Closed-form parabolic regions of the complex plane.
//!
//! Every region here is described by parabolas of the form
//! `{x + iy : x ≥ y²/w + v}` where `w` is the *width* and `v` the *vertex*.
//! The L^p spectrum on a conformally compact manifold contains the union of
//! such parabolas over `A ∈ α²(Y)` and is itself contained in a single wider
//! parabola determined by `α₀`, `α₁`, `n` and `p`.
//!
//! Exponents `p > 2` are accepted by the region constructors: every width and
//! vertex formula is invariant under `p ↦ p/(p−1)`, so they evaluate to the
//! dual region directly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative slack used by every closed-region membership test.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("dimension n must be at least 1")]
    Dimension,
    #[error("invalid curvature bounds: need 0 < alpha0 ({alpha0}) <= alpha1 ({alpha1})")]
    AlphaBounds { alpha0: f64, alpha1: f64 },
    #[error("exponent p = {0} outside the supported range")]
    Exponent(f64),
    #[error("alpha^2 range is invalid: {0}")]
    AlphaSqRange(String),
    #[error("p = {0} is a degenerate exponent for this operation")]
    Degenerate(f64),
    #[error("point ({x}, {y}) is not in the slice region")]
    NotInRegion { x: f64, y: f64 },
    #[error("parameter {name} = {value} must be positive")]
    NonPositive { name: &'static str, value: f64 },
}

/// A point `x + iy` of the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub x: f64,
    pub y: f64,
}

impl ComplexPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn conj(self) -> Self {
        Self::new(self.x, -self.y)
    }
}

impl From<Complex64> for ComplexPoint {
    fn from(z: Complex64) -> Self {
        Self::new(z.re, z.im)
    }
}

impl From<ComplexPoint> for Complex64 {
    fn from(p: ComplexPoint) -> Self {
        p.to_complex()
    }
}

/// Which of the four structural shapes `α²(Y)` takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RangeKind {
    /// `|dρ|` constant on the whole boundary.
    SingleValue,
    /// Finitely many boundary components, each with constant `|dρ|`.
    FiniteSet,
    /// One component with non-constant `|dρ|`.
    Interval,
    /// Several components with non-constant `|dρ|`.
    UnionOfIntervals,
}

/// The image `α²(Y)`: a finite union of closed intervals, points being
/// zero-length intervals. Intervals are kept sorted and disjoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct AlphaSqRange {
    intervals: Vec<[f64; 2]>,
}

impl AlphaSqRange {
    pub fn new(mut intervals: Vec<[f64; 2]>) -> Result<Self, RegionError> {
        if intervals.is_empty() {
            return Err(RegionError::AlphaSqRange("empty set".into()));
        }
        for iv in &intervals {
            if !(iv[0].is_finite() && iv[1].is_finite()) || iv[0] <= 0.0 || iv[1] < iv[0] {
                return Err(RegionError::AlphaSqRange(format!(
                    "interval [{}, {}] must satisfy 0 < lo <= hi",
                    iv[0], iv[1]
                )));
            }
        }
        intervals.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let mut merged: Vec<[f64; 2]> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match merged.last_mut() {
                Some(last) if iv[0] <= last[1] => last[1] = last[1].max(iv[1]),
                _ => merged.push(iv),
            }
        }
        Ok(Self { intervals: merged })
    }

    pub fn point(value: f64) -> Result<Self, RegionError> {
        Self::new(vec![[value, value]])
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self, RegionError> {
        Self::new(vec![[lo, hi]])
    }

    pub fn intervals(&self) -> &[[f64; 2]] {
        &self.intervals
    }

    pub fn min(&self) -> f64 {
        self.intervals[0][0]
    }

    pub fn max(&self) -> f64 {
        self.intervals[self.intervals.len() - 1][1]
    }

    pub fn contains(&self, a: f64) -> bool {
        self.intervals.iter().any(|iv| a >= iv[0] && a <= iv[1])
    }

    pub fn kind(&self) -> RangeKind {
        let all_points = self.intervals.iter().all(|iv| iv[0] == iv[1]);
        match (self.intervals.len(), all_points) {
            (1, true) => RangeKind::SingleValue,
            (_, true) => RangeKind::FiniteSet,
            (1, false) => RangeKind::Interval,
            _ => RangeKind::UnionOfIntervals,
        }
    }

    /// Representative values: both endpoints of every interval plus
    /// `per_interval` evenly spaced interior points.
    pub fn sample(&self, per_interval: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for iv in &self.intervals {
            if iv[0] == iv[1] {
                out.push(iv[0]);
                continue;
            }
            let k = per_interval + 1;
            for j in 0..=k {
                out.push(iv[0] + (iv[1] - iv[0]) * j as f64 / k as f64);
            }
        }
        out
    }
}

impl TryFrom<Vec<[f64; 2]>> for AlphaSqRange {
    type Error = RegionError;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<AlphaSqRange> for Vec<[f64; 2]> {
    fn from(r: AlphaSqRange) -> Self {
        r.intervals
    }
}

/// Inputs to every region formula: boundary dimension `n` (manifold
/// dimension `n+1`), curvature bounds `α₀ ≤ α₁` and the image `α²(Y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    pub n: u32,
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha_sq: AlphaSqRange,
}

impl SpectralParams {
    pub fn new(n: u32, alpha0: f64, alpha1: f64, alpha_sq: AlphaSqRange) -> Result<Self, RegionError> {
        if n == 0 {
            return Err(RegionError::Dimension);
        }
        if !(alpha0 > 0.0 && alpha1 >= alpha0 && alpha1.is_finite()) {
            return Err(RegionError::AlphaBounds { alpha0, alpha1 });
        }
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        if !close(alpha_sq.min(), alpha0 * alpha0) || !close(alpha_sq.max(), alpha1 * alpha1) {
            return Err(RegionError::AlphaSqRange(format!(
                "extremes [{}, {}] do not match alpha0^2 = {}, alpha1^2 = {}",
                alpha_sq.min(),
                alpha_sq.max(),
                alpha0 * alpha0,
                alpha1 * alpha1
            )));
        }
        Ok(Self { n, alpha0, alpha1, alpha_sq })
    }

    /// Connected boundary: `α²(Y) = [α₀², α₁²]` (a single value when equal).
    pub fn connected(n: u32, alpha0: f64, alpha1: f64) -> Result<Self, RegionError> {
        let range = AlphaSqRange::interval(alpha0 * alpha0, alpha1 * alpha1)
            .map_err(|_| RegionError::AlphaBounds { alpha0, alpha1 })?;
        Self::new(n, alpha0, alpha1, range)
    }

    pub fn nf(&self) -> f64 {
        f64::from(self.n)
    }
}

/// Closed region `x ≥ y²/width + vertex`; when `degenerate` it is the real
/// ray `[vertex, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parabola {
    pub width: f64,
    pub vertex: f64,
    pub degenerate: bool,
}

impl Parabola {
    pub fn new(width: f64, vertex: f64) -> Self {
        Self { width, vertex, degenerate: false }
    }

    pub fn ray(vertex: f64) -> Self {
        Self { width: 0.0, vertex, degenerate: true }
    }

    /// Real part of the boundary point at imaginary part `y`
    /// (`+∞` off the axis for a ray).
    pub fn boundary_x(&self, y: f64) -> f64 {
        if self.degenerate {
            if y == 0.0 {
                self.vertex
            } else {
                f64::INFINITY
            }
        } else {
            y * y / self.width + self.vertex
        }
    }

    pub fn contains(&self, pt: ComplexPoint) -> bool {
        within(pt.x, self.boundary_x(pt.y))
    }
}

fn within(x: f64, threshold: f64) -> bool {
    x >= threshold - BOUNDARY_TOLERANCE * (1.0 + x.abs())
}

fn check_exponent(p: f64) -> Result<f64, RegionError> {
    if p.is_nan() || p < 1.0 {
        return Err(RegionError::Exponent(p));
    }
    Ok(1.0 / p)
}

/// Union over `A ∈ α²(Y)` of the slice parabolas
/// `x ≥ y²/(A n²(1−2/p)²) + A (n²/p)(1−1/p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionUnion {
    pub params: SpectralParams,
    pub p: f64,
    width_per_a: f64,
    vertex_per_a: f64,
}

impl RegionUnion {
    /// Slice parabola for a fixed curvature value `A`.
    pub fn slice(&self, a: f64) -> Parabola {
        if self.is_degenerate() {
            Parabola::ray(a * self.vertex_per_a)
        } else {
            Parabola::new(a * self.width_per_a, a * self.vertex_per_a)
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.width_per_a == 0.0
    }

    /// `F(A, y)`, the boundary abscissa of the slice at `A`.
    pub fn boundary_x(&self, a: f64, y: f64) -> f64 {
        self.slice(a).boundary_x(y)
    }

    /// Minimiser and minimum of `A ↦ F(A, y)` over `α²(Y)`.
    ///
    /// `F(·, y)` is convex on `A > 0` with critical point
    /// `A(y) = |y| / sqrt(w v)`, so the minimum on each interval is attained at
    /// the critical point clamped into it.
    pub fn min_boundary(&self, y: f64) -> (f64, f64) {
        let (w, v) = (self.width_per_a, self.vertex_per_a);
        let critical = if y == 0.0 {
            0.0
        } else if v == 0.0 {
            f64::INFINITY
        } else {
            y.abs() / (w * v).sqrt()
        };
        let mut best = (f64::NAN, f64::INFINITY);
        for iv in self.params.alpha_sq.intervals() {
            let a = critical.clamp(iv[0], iv[1]);
            let f = self.boundary_x(a, y);
            if f < best.1 {
                best = (a, f);
            }
        }
        best
    }

    /// Membership including the `p = 2` ray case.
    pub fn contains(&self, pt: ComplexPoint) -> bool {
        if self.is_degenerate() {
            return pt.y == 0.0 && within(pt.x, self.params.alpha_sq.min() * self.vertex_per_a);
        }
        within(pt.x, self.min_boundary(pt.y).1)
    }
}

/// Parabola contained in the L¹ spectrum: `x ≥ y²/(n²α₁²)`.
pub fn l1_contained_parabola(params: &SpectralParams) -> Parabola {
    let n = params.nf();
    Parabola::new(n * n * params.alpha1 * params.alpha1, 0.0)
}

/// Parabola containing the L¹ spectrum:
/// `x ≥ y²/(n²α₁²) − n²(α₁² − α₀²)/4`.
pub fn l1_containing_parabola(params: &SpectralParams) -> Parabola {
    let n = params.nf();
    let (a0, a1) = (params.alpha0, params.alpha1);
    Parabola::new(n * n * a1 * a1, -n * n * (a1 * a1 - a0 * a0) / 4.0)
}

/// The family of parabolas contained in the L^p spectrum.
pub fn lp_contained_region(params: &SpectralParams, p: f64) -> Result<RegionUnion, RegionError> {
    let inv = check_exponent(p)?;
    let n = params.nf();
    let t = 1.0 - 2.0 * inv;
    Ok(RegionUnion { params: params.clone(), p, width_per_a: n * n * t * t, vertex_per_a: n * n * inv * (1.0 - inv) })
}

/// Parabola containing the L^p spectrum (a ray at `p = 2`).
pub fn lp_containing_parabola(params: &SpectralParams, p: f64) -> Result<Parabola, RegionError> {
    let kappa = params.nf() * params.alpha1;
    resolvent_region(kappa, params.alpha0, params.n, p)
}

/// Closed-form membership in the union of slice parabolas.
///
/// Returns [`RegionError::Degenerate`] for `p = 2`, where the slices are rays;
/// use [`RegionUnion::contains`] for that case.
pub fn membership(pt: ComplexPoint, region: &RegionUnion) -> Result<bool, RegionError> {
    if region.is_degenerate() {
        return Err(RegionError::Degenerate(region.p));
    }
    Ok(region.contains(pt))
}

/// `Λ = A λ (n − λ)`.
pub fn eigenvalue_from_lambda(a: f64, n: u32, lambda: ComplexPoint) -> ComplexPoint {
    let l = lambda.to_complex();
    (a * l * (f64::from(n) - l)).into()
}

/// `A(s² + (n²/q)(1 − 1/q)) + i A s n (1 − 2/q)`, the image of
/// `λ = n/q + is` under `λ ↦ Aλ(n−λ)`.
pub fn parametrize_spectrum_set(q: f64, s: f64, a: f64, n: u32) -> ComplexPoint {
    let n = f64::from(n);
    let inv = 1.0 / q;
    ComplexPoint::new(a * (s * s + n * n * inv * (1.0 - inv)), a * s * n * (1.0 - 2.0 * inv))
}

/// Parameters `(q, s)` recovered from a point of a slice region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumParameter {
    pub q: f64,
    pub s: f64,
    /// Set when `y = 0` and `x ≥ A n²/4`: only the limit `q = 2` reaches the
    /// point, with `s = +sqrt(x/A − n²/4)` (the conjugate `−s` works too).
    pub at_ray_limit: bool,
}

/// Inverse of [`parametrize_spectrum_set`] on the slice region for `A`.
///
/// Writing `τ = 1 − 2/q`, the boundary abscissa through the point satisfies
/// `x = c/τ² + B(1 − τ²)` with `B = An²/4`, `c = y²/(An²)`, a quadratic in
/// `τ²` whose positive root is unique because the abscissa increases in `q`.
pub fn invert_parametrization(pt: ComplexPoint, a: f64, n: u32, p: f64) -> Result<SpectrumParameter, RegionError> {
    if !(1.0..2.0).contains(&p) {
        return Err(RegionError::Exponent(p));
    }
    if a <= 0.0 {
        return Err(RegionError::NonPositive { name: "A", value: a });
    }
    let nf = f64::from(n);
    let tau_p = 1.0 - 2.0 / p;
    let slice = Parabola::new(a * nf * nf * tau_p * tau_p, a * nf * nf / p * (1.0 - 1.0 / p));
    if !slice.contains(pt) {
        return Err(RegionError::NotInRegion { x: pt.x, y: pt.y });
    }
    let b = a * nf * nf / 4.0;
    let c = pt.y * pt.y / (a * nf * nf);
    let d = pt.x - b;
    let sigma = if c == 0.0 {
        (-d).max(0.0) / b
    } else {
        let root = (d * d + 4.0 * b * c).sqrt();
        if d >= 0.0 {
            2.0 * c / (d + root)
        } else {
            (root - d) / (2.0 * b)
        }
    };
    let sigma = sigma.min(tau_p * tau_p);
    if sigma == 0.0 {
        return Ok(SpectrumParameter { q: 2.0, s: (pt.x / a - nf * nf / 4.0).max(0.0).sqrt(), at_ray_limit: true });
    }
    let tau = -sigma.sqrt();
    Ok(SpectrumParameter { q: 2.0 / (1.0 - tau), s: pt.y / (a * nf * tau), at_ray_limit: false })
}

/// Hölder conjugate `p/(p−1)`, with `1 ↦ ∞` and `∞ ↦ 1`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Slope `2 sqrt(p−1)/|p−2|` of the two envelope lines `x = ±m y`; the cone
/// `x ≥ m|y|` contains every slice parabola.
pub fn envelope_slope(p: f64) -> Result<f64, RegionError> {
    check_exponent(p)?;
    if p == 1.0 || p == 2.0 || p.is_infinite() {
        return Err(RegionError::Degenerate(p));
    }
    Ok(2.0 * (p - 1.0).sqrt() / (p - 2.0).abs())
}

/// Parabola whose exterior lies in the resolvent set, given a volume growth
/// rate `κ`: width `κ²(2/p−1)²`, vertex `n²α₀²/4 − κ²(2/p−1)²/4`.
pub fn resolvent_region(kappa: f64, alpha0: f64, n: u32, p: f64) -> Result<Parabola, RegionError> {
    if kappa <= 0.0 {
        return Err(RegionError::NonPositive { name: "kappa", value: kappa });
    }
    let inv = check_exponent(p)?;
    let nf = f64::from(n);
    let bottom = nf * nf * alpha0 * alpha0 / 4.0;
    let t = 2.0 * inv - 1.0;
    if t == 0.0 {
        return Ok(Parabola::ray(bottom));
    }
    let w = kappa * kappa * t * t;
    Ok(Parabola::new(w, bottom - w / 4.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceDescription {
    #[serde(rename = "A")]
    pub a: f64,
    pub width: f64,
    pub vertex: f64,
}

/// Serializable summary of a contained region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RegionDescription {
    pub n: u32,
    pub p: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha_sq_intervals: Vec<[f64; 2]>,
    pub slices: Vec<SliceDescription>,
    pub envelope_slope: Option<f64>,
}

impl RegionUnion {
    pub fn describe(&self, per_interval: usize) -> RegionDescription {
        let slices = self
            .params
            .alpha_sq
            .sample(per_interval)
            .into_iter()
            .map(|a| {
                let s = self.slice(a);
                SliceDescription { a, width: s.width, vertex: s.vertex }
            })
            .collect();
        RegionDescription {
            n: self.params.n,
            p: self.p,
            alpha0: self.params.alpha0,
            alpha1: self.params.alpha1,
            alpha_sq_intervals: self.params.alpha_sq.intervals().to_vec(),
            slices,
            envelope_slope: envelope_slope(self.p).ok(),
        }
    }
}
