use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BoundaryProfile, GeometryError};

/// A point `(x, y)` of the collar `(0, x₁) × Tⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollarPoint {
    pub x: f64,
    pub y: Vec<f64>,
}

impl CollarPoint {
    pub fn new(x: f64, y: Vec<f64>) -> Self {
        let y = y.into_iter().map(|t| t.rem_euclid(2.0 * PI)).collect();
        Self { x, y }
    }
}

/// `φ`, `xφ'` and `x²φ''` at one radial position. The scaled derivatives stay
/// bounded even where `φ'` is of order `1/δ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CutoffSample {
    pub phi: f64,
    pub x_dphi: f64,
    pub x2_d2phi: f64,
}

/// A radial cutoff evaluated in the log coordinate `u = log(x₁/x)`.
pub trait RadialCutoff {
    fn sample_u(&self, u: f64) -> CutoffSample;
}

/// A function on the torus with its gradient and flat Laplacian `Σ ∂ᵢ²`.
pub trait TorusFunction {
    /// Returns `(value, Σᵢ ∂ᵢ² f)` and writes the gradient into `grad`.
    fn sample(&self, y: &[f64], grad: &mut [f64]) -> (f64, f64);
}

/// Terms of `ΔF` for `F = φ(x) b(y) x^λ`, each with the common factor `x^λ`
/// removed. Signs are those with which they enter `ΔF`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReducedTerms {
    /// `φ b`.
    pub f: Complex64,
    /// `α² λ (n − λ) φ b`.
    pub eigen: Complex64,
    /// `α² (n − 2λ − 1) xφ' b`.
    pub cutoff_first: Complex64,
    /// `−α² λ φ b · x ∂ₓ log √h`.
    pub volume_first: Complex64,
    /// `−α² x²φ'' b`.
    pub cutoff_second: Complex64,
    /// `−α² xφ' b · x ∂ₓ log √h`.
    pub volume_second: Complex64,
    /// `x² φ Δ_h b`.
    pub boundary_laplacian: Complex64,
    /// `x² φ hⁱʲ ∂ᵢ log α ∂ⱼ b`.
    pub log_alpha_gradient: Complex64,
}

impl ReducedTerms {
    /// Everything except the eigen term.
    pub fn remainder(&self) -> Complex64 {
        self.cutoff_first
            + self.volume_first
            + self.cutoff_second
            + self.volume_second
            + self.boundary_laplacian
            + self.log_alpha_gradient
    }

    pub fn total(&self) -> Complex64 {
        self.eigen + self.remainder()
    }
}

/// `ΔF` at a point, split into the terms of the product expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacianTerms {
    /// `x^λ` at the point.
    pub power: Complex64,
    pub reduced: ReducedTerms,
}

impl LaplacianTerms {
    pub fn f(&self) -> Complex64 {
        self.power * self.reduced.f
    }

    pub fn eigen(&self) -> Complex64 {
        self.power * self.reduced.eigen
    }

    /// Second line: `x^{λ+1} α² (φ' b (n−2λ−1) − λ φ b ∂ₓ log √h)`.
    pub fn first_order(&self) -> Complex64 {
        self.power * (self.reduced.cutoff_first + self.reduced.volume_first)
    }

    /// Third line: `x^{λ+2} (−α² φ'' b − α² φ' b ∂ₓ log √h)`.
    pub fn second_order(&self) -> Complex64 {
        self.power * (self.reduced.cutoff_second + self.reduced.volume_second)
    }

    /// Fourth line: `x^{λ+2} (φ Δ_h b + φ hⁱʲ ∂ᵢ log α ∂ⱼ b)`.
    pub fn boundary(&self) -> Complex64 {
        self.power * (self.reduced.boundary_laplacian + self.reduced.log_alpha_gradient)
    }

    pub fn total(&self) -> Complex64 {
        self.power * self.reduced.total()
    }
}

/// Collar metric `dx²/(α²x²) + (1 + c x)² |dy|²/x²` on `(0, x₁) × Tⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetric {
    pub profile: BoundaryProfile,
    pub x1: f64,
    pub c: f64,
    /// Volume assigned to the compact part `K`.
    pub compact_volume: f64,
}

impl ModelMetric {
    pub fn new(profile: BoundaryProfile, x1: f64, c: f64, compact_volume: f64) -> Result<Self, GeometryError> {
        if !(x1 > 0.0 && x1.is_finite()) {
            return Err(GeometryError::Parameter { name: "x1", value: x1 });
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(GeometryError::Parameter { name: "c", value: c });
        }
        if !(compact_volume >= 0.0 && compact_volume.is_finite()) {
            return Err(GeometryError::Parameter { name: "compact_volume", value: compact_volume });
        }
        Ok(Self { profile, x1, c, compact_volume })
    }

    pub fn n(&self) -> u32 {
        self.profile.n()
    }

    fn nf(&self) -> f64 {
        f64::from(self.profile.n())
    }

    /// `√det h = (1 + c x)ⁿ`.
    pub fn sqrt_h(&self, x: f64) -> f64 {
        (1.0 + self.c * x).powi(self.n() as i32)
    }

    /// `∂ₓ log √h = n c / (1 + c x)`.
    pub fn dlog_sqrt_h(&self, x: f64) -> f64 {
        self.nf() * self.c / (1.0 + self.c * x)
    }

    /// Conformal factor of `hⁱʲ = (1 + c x)⁻² δⁱʲ`.
    pub fn h_inverse(&self, x: f64) -> f64 {
        (1.0 + self.c * x).powi(-2)
    }

    /// Flat volume of the boundary torus.
    pub fn torus_volume(&self) -> f64 {
        (2.0 * PI).powi(self.n() as i32)
    }

    pub fn x_from_u(&self, u: f64) -> f64 {
        self.x1 * (-u).exp()
    }

    fn check(&self, x: f64) -> Result<(), GeometryError> {
        if x > 0.0 && x <= self.x1 {
            Ok(())
        } else {
            Err(GeometryError::OutsideCollar { x, x1: self.x1 })
        }
    }

    /// Riemannian density `x^{−n−1} √h α⁻¹` with respect to `dx dy`.
    pub fn volume_density(&self, pt: &CollarPoint) -> Result<f64, GeometryError> {
        self.check(pt.x)?;
        Ok(pt.x.powi(-(self.n() as i32) - 1) * self.sqrt_h(pt.x) / self.profile.alpha(&pt.y))
    }

    /// `Δ x^λ = α² λ(n−λ) x^λ − α² λ x^{λ+1} ∂ₓ log √h`.
    pub fn apply_laplacian_monomial(&self, lambda: Complex64, pt: &CollarPoint) -> Result<Complex64, GeometryError> {
        self.check(pt.x)?;
        let a2 = self.profile.alpha(&pt.y).powi(2);
        let power = Complex64::from(pt.x).powc(lambda);
        let n = self.nf();
        Ok(a2 * power * (lambda * (n - lambda) - lambda * pt.x * self.dlog_sqrt_h(pt.x)))
    }

    /// Terms of `Δ(φ b x^λ)` with the factor `x^λ` removed, at collar
    /// coordinates `(x, y)` where the cutoff has already been sampled.
    pub fn reduced_terms(
        &self,
        lambda: Complex64,
        x: f64,
        cutoff: CutoffSample,
        bump: &dyn TorusFunction,
        y: &[f64],
        scratch: &mut [f64],
    ) -> (ReducedTerms, f64) {
        let n = self.nf();
        let dim = y.len();
        let (grad_b, grad_log_alpha) = scratch.split_at_mut(dim);
        let (b, lap_b) = bump.sample(y, grad_b);
        let alpha = self.profile.alpha(y);
        let a2 = alpha * alpha;
        let phib = cutoff.phi * b;
        let x_ell = x * self.dlog_sqrt_h(x);
        let x2_hinv = x * x * self.h_inverse(x);

        let mut dot = 0.0;
        if x2_hinv != 0.0 && cutoff.phi != 0.0 {
            self.profile.grad_log_alpha(y, grad_log_alpha);
            dot = grad_log_alpha.iter().zip(grad_b.iter()).map(|(p, q)| p * q).sum();
        }
        let spectral = lambda * (n - lambda);
        let terms = ReducedTerms {
            f: phib.into(),
            eigen: a2 * spectral * phib,
            cutoff_first: a2 * (n - 2.0 * lambda - 1.0) * (cutoff.x_dphi * b),
            volume_first: -a2 * lambda * (phib * x_ell),
            cutoff_second: (-a2 * cutoff.x2_d2phi * b).into(),
            volume_second: (-a2 * cutoff.x_dphi * b * x_ell).into(),
            boundary_laplacian: (-x2_hinv * cutoff.phi * lap_b).into(),
            log_alpha_gradient: (x2_hinv * cutoff.phi * dot).into(),
        };
        (terms, alpha)
    }

    /// `ΔF` at a collar point for `F = φ(x) b(y) x^λ`.
    pub fn apply_laplacian_product(
        &self,
        lambda: Complex64,
        phi: &dyn RadialCutoff,
        b: &dyn TorusFunction,
        pt: &CollarPoint,
    ) -> Result<LaplacianTerms, GeometryError> {
        self.check(pt.x)?;
        let u = (self.x1 / pt.x).ln();
        let mut scratch = vec![0.0; 2 * pt.y.len()];
        let (reduced, _) = self.reduced_terms(lambda, pt.x, phi.sample_u(u), b, &pt.y, &mut scratch);
        Ok(LaplacianTerms { power: Complex64::from(pt.x).powc(lambda), reduced })
    }

    /// Radial distance `log(x₁/x)/α(y)` from the slice `{x = x₁}`.
    pub fn collar_distance(&self, x: f64, y: &[f64]) -> Result<f64, GeometryError> {
        self.check(x)?;
        Ok((self.x1 / x).ln() / self.profile.alpha(y))
    }
}
