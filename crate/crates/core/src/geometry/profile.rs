use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GeometryError;

const EXTREMUM_GRID: usize = 4096;

/// Boundary function `α` on the flat torus `[0, 2π)ⁿ`.
///
/// The trigonometric form is `α(y) = a₀ + Σᵢ g(yᵢ)` with
/// `g(t) = Σₖ aₖ cos(k t) + bₖ sin(k t)`, i.e. the same 1-D polynomial applied
/// along every torus direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AlphaSpec {
    Constant { value: f64 },
    Trig { a0: f64, cos: Vec<f64>, sin: Vec<f64> },
}

impl FromStr for AlphaSpec {
    type Err = GeometryError;

    /// `constant:2` or `trig:a0,a1,b1,a2,b2,...`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| GeometryError::AlphaSpec(format!("{m} in {s:?}"));
        let (kind, rest) = s.trim().split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let nums = rest
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad("unparseable number"))?;
        if nums.iter().any(|v| !v.is_finite()) {
            return Err(bad("non-finite coefficient"));
        }
        match kind.trim() {
            "constant" => match nums.as_slice() {
                [v] => Ok(AlphaSpec::Constant { value: *v }),
                _ => Err(bad("constant takes exactly one value")),
            },
            "trig" => {
                let (a0, coeffs) = nums.split_first().ok_or_else(|| bad("missing a0"))?;
                let mut cos = Vec::new();
                let mut sin = Vec::new();
                for pair in coeffs.chunks(2) {
                    cos.push(pair[0]);
                    sin.push(pair.get(1).copied().unwrap_or(0.0));
                }
                Ok(AlphaSpec::Trig { a0: *a0, cos, sin })
            }
            other => Err(bad(&format!("unknown kind {other:?}"))),
        }
    }
}

impl fmt::Display for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSpec::Constant { value } => write!(f, "constant:{value}"),
            AlphaSpec::Trig { a0, cos, sin } => {
                write!(f, "trig:{a0}")?;
                for (a, b) in cos.iter().zip(sin) {
                    write!(f, ",{a},{b}")?;
                }
                Ok(())
            }
        }
    }
}

/// A validated positive boundary profile together with its extremes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProfile {
    n: u32,
    spec: AlphaSpec,
    alpha0: f64,
    alpha1: f64,
    /// Points of the 1-D polynomial `g` where its min / max are attained.
    t_min: f64,
    t_max: f64,
}

impl BoundaryProfile {
    pub fn new(n: u32, spec: AlphaSpec) -> Result<Self, GeometryError> {
        if n == 0 {
            return Err(GeometryError::Dimension);
        }
        let nf = f64::from(n);
        match &spec {
            AlphaSpec::Constant { value } => {
                if !(*value > 0.0 && value.is_finite()) {
                    return Err(GeometryError::NonPositiveAlpha(*value));
                }
                Ok(Self { n, alpha0: *value, alpha1: *value, t_min: 0.0, t_max: 0.0, spec })
            }
            AlphaSpec::Trig { a0, cos, sin } => {
                if cos.len() != sin.len() {
                    return Err(GeometryError::AlphaSpec("cos/sin length mismatch".into()));
                }
                let g = Trig1d { cos, sin };
                let h = 2.0 * PI / EXTREMUM_GRID as f64;
                let mut i_min = 0;
                let mut i_max = 0;
                let mut vals = Vec::with_capacity(EXTREMUM_GRID);
                for i in 0..EXTREMUM_GRID {
                    let v = g.value(i as f64 * h);
                    if v < vals.get(i_min).copied().unwrap_or(f64::INFINITY) {
                        i_min = i;
                    }
                    if v > vals.get(i_max).copied().unwrap_or(f64::NEG_INFINITY) {
                        i_max = i;
                    }
                    vals.push(v);
                }
                // Grid minimum minus a Lipschitz margin is a certified lower bound.
                let certified = a0 + nf * (vals[i_min] - g.lipschitz() * h / 2.0);
                if certified <= 0.0 {
                    return Err(GeometryError::NonPositiveAlpha(certified));
                }
                let t_min = g.refine(i_min as f64 * h, h, false);
                let t_max = g.refine(i_max as f64 * h, h, true);
                let alpha0 = a0 + nf * g.value(t_min).min(vals[i_min]);
                let alpha1 = a0 + nf * g.value(t_max).max(vals[i_max]);
                Ok(Self { n, alpha0, alpha1, t_min, t_max, spec })
            }
        }
    }

    pub fn constant(n: u32, value: f64) -> Result<Self, GeometryError> {
        Self::new(n, AlphaSpec::Constant { value })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn spec(&self) -> &AlphaSpec {
        &self.spec
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn is_constant(&self) -> bool {
        match &self.spec {
            AlphaSpec::Constant { .. } => true,
            AlphaSpec::Trig { cos, sin, .. } => cos.iter().chain(sin).all(|c| *c == 0.0),
        }
    }

    /// A torus point where `α = α₁`.
    pub fn argmax(&self) -> Vec<f64> {
        vec![self.t_max; self.n as usize]
    }

    /// A torus point where `α = α₀`.
    pub fn argmin(&self) -> Vec<f64> {
        vec![self.t_min; self.n as usize]
    }

    pub fn alpha(&self, y: &[f64]) -> f64 {
        match &self.spec {
            AlphaSpec::Constant { value } => *value,
            AlphaSpec::Trig { a0, cos, sin } => {
                let g = Trig1d { cos, sin };
                a0 + y.iter().map(|&t| g.value(t)).sum::<f64>()
            }
        }
    }

    /// Writes `∂ᵢ log α` into `out`.
    pub fn grad_log_alpha(&self, y: &[f64], out: &mut [f64]) {
        match &self.spec {
            AlphaSpec::Constant { .. } => out.iter_mut().for_each(|v| *v = 0.0),
            AlphaSpec::Trig { cos, sin, .. } => {
                let g = Trig1d { cos, sin };
                let a = self.alpha(y);
                for (o, &t) in out.iter_mut().zip(y) {
                    *o = g.derivative(t) / a;
                }
            }
        }
    }

    /// Lipschitz constant of `α` with respect to the Euclidean torus distance.
    pub fn lipschitz(&self) -> f64 {
        match &self.spec {
            AlphaSpec::Constant { .. } => 0.0,
            AlphaSpec::Trig { cos, sin, .. } => Trig1d { cos, sin }.lipschitz() * f64::from(self.n).sqrt(),
        }
    }
}

struct Trig1d<'a> {
    cos: &'a [f64],
    sin: &'a [f64],
}

impl Trig1d<'_> {
    fn value(&self, t: f64) -> f64 {
        self.cos
            .iter()
            .zip(self.sin)
            .enumerate()
            .map(|(k, (a, b))| {
                let kt = (k + 1) as f64 * t;
                a * kt.cos() + b * kt.sin()
            })
            .sum()
    }

    fn derivative(&self, t: f64) -> f64 {
        self.cos
            .iter()
            .zip(self.sin)
            .enumerate()
            .map(|(k, (a, b))| {
                let kf = (k + 1) as f64;
                kf * (b * (kf * t).cos() - a * (kf * t).sin())
            })
            .sum()
    }

    fn lipschitz(&self) -> f64 {
        self.cos.iter().zip(self.sin).enumerate().map(|(k, (a, b))| (k + 1) as f64 * (a.abs() + b.abs())).sum()
    }

    /// Golden-section refinement of a grid extremum within one cell.
    fn refine(&self, t0: f64, h: f64, maximize: bool) -> f64 {
        let sign = if maximize { -1.0 } else { 1.0 };
        let f = |t: f64| sign * self.value(t);
        let gr = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (t0 - h, t0 + h);
        let mut c = b - gr * (b - a);
        let mut d = a + gr * (b - a);
        for _ in 0..80 {
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - gr * (b - a);
            d = a + gr * (b - a);
        }
        let t = 0.5 * (a + b);
        if f(t) <= f(t0) {
            t.rem_euclid(2.0 * PI)
        } else {
            t0
        }
    }
}
