//! L^p spectral regions of the Laplacian on conformally compact model manifolds.
//!
//! The crate is organised around four layers:
//!
//! - [`region`]: closed-form parabolic regions in ℂ that are contained in, or
//!   contain, the L^p spectrum, together with membership tests, the
//!   parametrised spectrum set and its inverse, and the envelope cone.
//! - [`geometry`]: exact collar metrics `dx²/(α(y)²x²) + h(x)/x²` over a flat
//!   n-torus, the collar Laplacian, ball volumes and volume-growth fits, and a
//!   Sturm–Liouville comparison integrator.
//! - [`quasimode`]: approximate eigenfunctions `F = φ(x) b(y) x^λ`, their L^p
//!   norms and the seven-term residual, evaluated by log-domain quadrature.
//! - [`discrete`]: a finite-difference discretisation of the collar Laplacian
//!   used as an independent oracle (spectral bottom, resolvent probes).
//!
//! All public operations are pure functions of their inputs.

pub mod discrete;
pub mod geometry;
pub mod quadrature;
pub mod quasimode;
pub mod region;

pub use geometry::{AlphaSpec, BoundaryProfile, CollarPoint, GeometryError, ModelMetric};
pub use quasimode::{BumpB, CutoffPhi, Quasimode, QuasimodeError, QuasimodeSpec, ResidualReport};
pub use region::{AlphaSqRange, ComplexPoint, Parabola, RegionError, RegionUnion, SpectralParams};
