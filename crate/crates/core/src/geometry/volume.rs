use rayon::prelude::*;
use serde::Serialize;

use super::sturm::least_squares_slope;
use super::{GeometryError, ModelMetric};
use crate::quadrature::{pairwise_sum, simpson, Rule};

/// Quadrature settings for radial-slice ball volumes.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeQuadrature {
    /// Target Simpson step in `u`, scaled by `1/n` at use.
    pub u_step: f64,
    /// Periodic trapezoid nodes per torus direction (ignored for constant α).
    pub torus_points: usize,
    /// Largest `u` the grid may reach.
    pub u_limit: f64,
}

impl Default for VolumeQuadrature {
    fn default() -> Self {
        Self { u_step: 0.05, torus_points: 64, u_limit: 400.0 }
    }
}

/// Result of fitting `log Vol(B(R))` against `R`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GrowthFit {
    pub kappa_hat: f64,
    pub radii: Vec<f64>,
    pub log_volumes: Vec<f64>,
    /// Number of trailing radii used in the fit.
    pub fitted_points: usize,
    pub intercept: f64,
    pub residual_rms: f64,
}

impl VolumeQuadrature {
    fn torus_rule(&self, metric: &ModelMetric) -> Vec<(Vec<f64>, f64)> {
        let n = metric.n() as usize;
        if metric.profile.is_constant() {
            return vec![(vec![0.0; n], metric.torus_volume())];
        }
        let rule = Rule::periodic(self.torus_points.max(4));
        let m = rule.len();
        let total = m.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                let mut y = Vec::with_capacity(n);
                let mut w = 1.0;
                for _ in 0..n {
                    let (yi, wi) = rule.points[idx % m];
                    y.push(yi);
                    w *= wi;
                    idx /= m;
                }
                (y, w)
            })
            .collect()
    }

    /// `log Vol(B(R))` for the ball `{collar distance ≤ R}` plus the compact part.
    ///
    /// The collar integrand is `x₁⁻ⁿ e^{nu} (1 + c x₁ e^{−u})ⁿ / α(y)` on
    /// `u ∈ [0, α(y) R]`; it is integrated against `e^{−n α₁ R}` to stay finite.
    pub fn log_ball_volume(&self, metric: &ModelMetric, radius: f64) -> Result<f64, GeometryError> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(GeometryError::RadiusList(format!("radius {radius} must be finite and non-negative")));
        }
        let needed = metric.profile.alpha1() * radius;
        if needed > self.u_limit {
            return Err(GeometryError::QuadratureRange { radius, needed, limit: self.u_limit });
        }
        let nf = f64::from(metric.n());
        let shift = nf * needed;
        let step = self.u_step / nf;
        let nodes = self.torus_rule(metric);
        let per_node: Vec<f64> = nodes
            .par_iter()
            .map(|(y, w)| {
                let a = metric.profile.alpha(y);
                let top = a * radius;
                if top <= 0.0 {
                    return 0.0;
                }
                let m = ((top / (2.0 * step)).ceil() as usize).max(2);
                let f = |u: f64| (nf * u - shift).exp() * (1.0 + metric.c * metric.x1 * (-u).exp()).powf(nf);
                w * simpson(0.0, top, m, f) / a
            })
            .collect();
        let scaled = pairwise_sum(&per_node);
        let log_collar = scaled.ln() + shift - nf * metric.x1.ln();
        Ok(match (metric.compact_volume > 0.0, scaled > 0.0) {
            (false, _) => log_collar,
            (true, false) => metric.compact_volume.ln(),
            (true, true) => {
                let (a, b) = (metric.compact_volume.ln(), log_collar);
                let m = a.max(b);
                m + ((a - m).exp() + (b - m).exp()).ln()
            }
        })
    }

    pub fn ball_volume(&self, metric: &ModelMetric, radius: f64) -> Result<f64, GeometryError> {
        if radius == 0.0 {
            return Ok(metric.compact_volume);
        }
        Ok(self.log_ball_volume(metric, radius)?.exp())
    }

    /// Least-squares slope of `log Vol(B(R))` over the largest half of `radii`.
    pub fn volume_growth_rate(&self, metric: &ModelMetric, radii: &[f64]) -> Result<GrowthFit, GeometryError> {
        if radii.len() < 3 {
            return Err(GeometryError::RadiusList(format!("need at least 3 radii, got {}", radii.len())));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
            return Err(GeometryError::RadiusList("radii must be positive and strictly increasing".into()));
        }
        let log_volumes = radii.iter().map(|&r| self.log_ball_volume(metric, r)).collect::<Result<Vec<_>, _>>()?;
        let fitted_points = radii.len().div_ceil(2).max(2);
        let start = radii.len() - fitted_points;
        let pts: Vec<(f64, f64)> = radii[start..].iter().copied().zip(log_volumes[start..].iter().copied()).collect();
        let kappa_hat = least_squares_slope(&pts);
        let mr = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let mv = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let intercept = mv - kappa_hat * mr;
        let residual_rms =
            (pts.iter().map(|(r, v)| (v - intercept - kappa_hat * r).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
        Ok(GrowthFit { kappa_hat, radii: radii.to_vec(), log_volumes, fitted_points, intercept, residual_rms })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryProfile;
    use std::f64::consts::PI;

    fn closed_form(n: u32, alpha: f64, x1: f64, vk: f64, r: f64) -> f64 {
        let nf = f64::from(n);
        vk + (2.0 * PI).powi(n as i32) * x1.powf(-nf) * ((nf * alpha * r).exp() - 1.0) / (nf * alpha)
    }

    #[test]
    fn constant_alpha_matches_closed_form() {
        let q = VolumeQuadrature::default();
        for (n, a) in [(1, 1.0), (2, 1.5), (4, 2.0)] {
            let m = ModelMetric::new(BoundaryProfile::constant(n, a).unwrap(), 0.7, 0.0, 2.0).unwrap();
            for r in [1.0, 3.0, 10.0] {
                let got = q.ball_volume(&m, r).unwrap();
                let want = closed_form(n, a, 0.7, 2.0, r);
                assert!(((got - want) / want).abs() < 1e-6, "n={n} r={r}: {got} vs {want}");
            }
            assert_eq!(q.ball_volume(&m, 0.0).unwrap(), 2.0);
        }
    }

    #[test]
    fn range_limit_is_reported() {
        let q = VolumeQuadrature { u_limit: 10.0, ..Default::default() };
        let m = ModelMetric::new(BoundaryProfile::constant(1, 2.0).unwrap(), 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(q.ball_volume(&m, 6.0), Err(GeometryError::QuadratureRange { .. })));
    }

    #[test]
    fn short_radius_list_rejected() {
        let q = VolumeQuadrature::default();
        let m = ModelMetric::new(BoundaryProfile::constant(1, 2.0).unwrap(), 1.0, 0.0, 0.0).unwrap();
        assert!(q.volume_growth_rate(&m, &[1.0, 2.0]).is_err());
        assert!(q.volume_growth_rate(&m, &[1.0, 3.0, 2.0]).is_err());
    }
}
