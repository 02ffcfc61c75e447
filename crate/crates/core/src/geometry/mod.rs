//! Exact collar model metrics `g = dx²/(α(y)²x²) + h(x, y, dy)/x²` on
//! `(0, x₁) × Tⁿ`, with `h = (1 + c x)² · flat` and no remainder term.

mod metric;
mod profile;
mod spec_file;
mod sturm;
mod volume;

pub use metric::{CollarPoint, CutoffSample, LaplacianTerms, ModelMetric, RadialCutoff, ReducedTerms, TorusFunction};
pub use profile::{AlphaSpec, BoundaryProfile};
pub use spec_file::{parse_metric_spec, MetricKey};
pub use sturm::{sturm_liouville_compare, SturmLiouvilleSolution};
pub use volume::{GrowthFit, VolumeQuadrature};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension n must be at least 1")]
    Dimension,
    #[error("alpha profile is not strictly positive (lower bound {0})")]
    NonPositiveAlpha(f64),
    #[error("invalid alpha specification: {0}")]
    AlphaSpec(String),
    #[error("invalid metric parameter {name} = {value}")]
    Parameter { name: &'static str, value: f64 },
    #[error("point x = {x} lies outside the collar (0, {x1})")]
    OutsideCollar { x: f64, x1: f64 },
    #[error("radius {radius} needs u up to {needed}, beyond the configured grid limit {limit}")]
    QuadratureRange { radius: f64, needed: f64, limit: f64 },
    #[error("invalid radius list: {0}")]
    RadiusList(String),
    #[error("Sturm-Liouville integration failed: {0}")]
    Integration(String),
    #[error("metric spec line {line}: {message}")]
    SpecFile { line: usize, message: String },
}
