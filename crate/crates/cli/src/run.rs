//! Subcommand runners. Each returns a serializable report plus a status that
//! maps onto the process exit code.

use std::f64::consts::LN_2;

use lpspec::discrete::{
    assemble, resolvent_probe, smallest_eigenvalue, CollarGrid, DiscreteError, EigenSettings, ProbeResult,
    DEFAULT_BUDGET,
};
use lpspec::geometry::{sturm_liouville_compare, GrowthFit, VolumeQuadrature};
use lpspec::quasimode::{verify_quasimode, QuasimodeQuadrature, Verification};
use lpspec::region::{
    conjugate_exponent, l1_contained_parabola, l1_containing_parabola, lp_contained_region, lp_containing_parabola,
    Parabola, RegionDescription, RegionError,
};
use lpspec::{ModelMetric, QuasimodeSpec};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};
use crate::svg::{render, FigureKind, FigureSpec};

/// Outcome classes, ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Status {
    Ok,
    FailedRows,
    NumericalFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::FailedRows => 3,
            Status::NumericalFailure => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 4,
            RunError::Io(_) => 1,
        }
    }
}

impl From<RegionError> for RunError {
    fn from(e: RegionError) -> Self {
        RunError::Numerical(e.to_string())
    }
}

/// A named text artifact (figure or table) produced by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct L1Regions {
    pub contained: Parabola,
    pub containing: Parabola,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LpRegions {
    pub p: f64,
    pub conjugate: f64,
    pub contained: RegionDescription,
    pub containing: Parabola,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RegionReport {
    pub n: u32,
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha_sq_intervals: Vec<[f64; 2]>,
    pub l1: L1Regions,
    pub lp: Vec<LpRegions>,
    pub figures: Vec<String>,
}

fn p_label(p: f64) -> String {
    format!("{p}").replace('.', "_")
}

/// Region parameters for every configured `p`, plus figures when requested
/// (all five kinds when the config names none).
pub fn run_region(cfg: &ExperimentConfig, svg: bool) -> Result<(RegionReport, Vec<Artifact>), RunError> {
    let params = &cfg.params;
    let lp = cfg
        .p
        .iter()
        .map(|&p| {
            Ok(LpRegions {
                p,
                conjugate: conjugate_exponent(p),
                contained: lp_contained_region(params, p)?.describe(cfg.slices),
                containing: lp_containing_parabola(params, p)?,
            })
        })
        .collect::<Result<Vec<_>, RegionError>>()?;

    let kinds: Vec<FigureKind> = match (svg, cfg.figures.is_empty()) {
        (false, true) => Vec::new(),
        (true, true) => FigureKind::ALL.to_vec(),
        _ => cfg.figures.clone(),
    };
    let mut artifacts = Vec::new();
    for kind in kinds {
        let ps: Vec<f64> = if kind.uses_p() { cfg.p.clone() } else { vec![1.0] };
        for p in ps {
            let name = if kind.uses_p() {
                format!("{}-p{}.svg", kind.name(), p_label(p))
            } else {
                format!("{}.svg", kind.name())
            };
            let spec = FigureSpec {
                kind,
                p,
                x_range: cfg.x_range,
                y_range: cfg.y_range,
                resolution: cfg.resolution,
                slices: cfg.slices,
            };
            artifacts.push(Artifact { name, contents: render(params, &spec)? });
        }
    }
    let report = RegionReport {
        n: params.n,
        alpha0: params.alpha0,
        alpha1: params.alpha1,
        alpha_sq_intervals: params.alpha_sq.intervals().to_vec(),
        l1: L1Regions { contained: l1_contained_parabola(params), containing: l1_containing_parabola(params) },
        lp,
        figures: artifacts.iter().map(|a| a.name.clone()).collect(),
    };
    Ok((report, artifacts))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RowInput {
    pub p: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub epsilon: f64,
    pub s: f64,
    /// Configured depth; absent when the coupling rule chose it.
    #[serde(rename = "L")]
    pub depth: Option<f64>,
}

/// One sweep row: the residual report, or the reason it could not be built.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct QuasimodeRow {
    pub input: RowInput,
    #[serde(flatten)]
    pub verification: Option<Verification>,
    pub error: Option<String>,
}

impl QuasimodeRow {
    pub fn passed(&self) -> bool {
        self.verification.as_ref().is_some_and(|v| v.report.pass)
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct QuasimodeTable {
    pub c_pass: f64,
    pub coupling: f64,
    pub rows: Vec<QuasimodeRow>,
    pub all_pass: bool,
}

/// Coupled depth for `spec`: the bump is located once and reused.
pub fn coupled_spec(spec: QuasimodeSpec, metric: &ModelMetric, coupling: f64) -> Result<QuasimodeSpec, String> {
    let probe = lpspec::Quasimode::new(spec.clone().with_depth(2.0 * LN_2 + 1.0), metric).map_err(|e| e.to_string())?;
    let required = probe.required_depth(coupling);
    Ok(spec.with_bump(probe.bump().clone()).with_depth(required))
}

fn quasimode_row(cfg: &ExperimentConfig, metric: &ModelMetric, input: RowInput) -> QuasimodeRow {
    let quad = QuasimodeQuadrature { torus_points: cfg.torus_points, ..QuasimodeQuadrature::default() };
    let base = QuasimodeSpec::new(metric.n(), input.p, input.a, input.epsilon, input.s, input.depth.unwrap_or(0.0))
        .with_smoothness(cfg.smoothness);
    let spec = match input.depth {
        Some(_) => Ok(base),
        None => coupled_spec(base, metric, cfg.coupling),
    };
    let result =
        spec.and_then(|s| verify_quasimode(s, metric, &quad, cfg.c_pass, cfg.coupling).map_err(|e| e.to_string()));
    match result {
        Ok(v) => QuasimodeRow { input, verification: Some(v), error: None },
        Err(e) => QuasimodeRow { input, verification: None, error: Some(e) },
    }
}

/// Sweeps `p × A × ε × s × L`; rows fail independently.
pub fn run_quasimode(cfg: &ExperimentConfig) -> Result<(QuasimodeTable, Status), RunError> {
    let metric = cfg.require_metric()?;
    let depths: Vec<Option<f64>> =
        if cfg.depth.is_empty() { vec![None] } else { cfg.depth.iter().copied().map(Some).collect() };
    let mut inputs = Vec::new();
    for &p in &cfg.p {
        for &a in &cfg.a_values {
            for &epsilon in &cfg.epsilon {
                for &s in &cfg.s_values {
                    for &depth in &depths {
                        inputs.push(RowInput { p, a, epsilon, s, depth });
                    }
                }
            }
        }
    }
    let rows: Vec<QuasimodeRow> = inputs.into_par_iter().map(|input| quasimode_row(cfg, metric, input)).collect();
    let all_pass = rows.iter().all(QuasimodeRow::passed);
    let status = if all_pass { Status::Ok } else { Status::FailedRows };
    Ok((QuasimodeTable { c_pass: cfg.c_pass, coupling: cfg.coupling, rows, all_pass }, status))
}

/// The table as CSV with one line per row.
pub fn quasimode_csv(table: &QuasimodeTable) -> String {
    let mut out = String::from(
        "p,A,epsilon,s,L,Lambda_re,Lambda_im,F,I,II,III,IV,V,VI,VII,total,ratio,pass,bumpRadius,requiredDepth,error\n",
    );
    for row in &table.rows {
        let i = &row.input;
        match &row.verification {
            Some(v) => {
                let r = &v.report;
                let terms: Vec<String> = r.norms.terms.iter().map(f64::to_string).collect();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},\n",
                    i.p,
                    i.a,
                    i.epsilon,
                    i.s,
                    r.depth,
                    r.eigenvalue.re,
                    r.eigenvalue.im,
                    r.norms.f,
                    terms.join(","),
                    r.norms.total,
                    r.ratio,
                    r.pass,
                    v.bump_radius,
                    v.required_depth
                ));
            }
            None => {
                let msg = row.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
                let mut cols = vec![i.p.to_string(), i.a.to_string(), i.epsilon.to_string(), i.s.to_string()];
                cols.extend(std::iter::repeat_n(String::new(), 13));
                cols.extend(["false".to_string(), String::new(), String::new(), msg]);
                out.push_str(&cols.join(","));
                out.push('\n');
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SturmCurvePoint {
    pub r: f64,
    pub log_u: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SturmReport {
    pub s: f64,
    pub t: f64,
    pub gamma: f64,
    pub alpha1_plus_epsilon: f64,
    pub radius: f64,
    pub log_volume_bound: f64,
    /// Slope of the log volume bound over the outer half of `[0, R]`.
    pub slope: f64,
    pub slope_target: f64,
    pub curve: Vec<SturmCurvePoint>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VolumeReport {
    pub kappa_hat: f64,
    pub target: f64,
    pub rel_error: f64,
    pub fit: GrowthFit,
    pub sturm_liouville: SturmReport,
}

const CURVE_POINTS: usize = 200;

/// Growth rate fit against `κ = n α₁`, with the comparison bound curve.
pub fn run_volume(cfg: &ExperimentConfig) -> Result<VolumeReport, RunError> {
    let metric = cfg.require_metric()?;
    let quad = VolumeQuadrature { u_step: cfg.volume_step, ..VolumeQuadrature::default() };
    let fit = quad.volume_growth_rate(metric, &cfg.radii).map_err(|e| RunError::Numerical(e.to_string()))?;
    let n = metric.n();
    let target = f64::from(n) * metric.profile.alpha1();

    let st = &cfg.sturm;
    let radius = *cfg.radii.last().expect("validated non-empty");
    let a1e = metric.profile.alpha1() + st.epsilon;
    let (s, t) = (st.s.min(radius), st.t.min(radius));
    let sol = sturm_liouville_compare(s, t, a1e, st.gamma.max(a1e), radius, n, st.step)
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let stride = (sol.r.len() / CURVE_POINTS).max(1);
    let curve =
        (0..sol.r.len()).step_by(stride).map(|k| SturmCurvePoint { r: sol.r[k], log_u: sol.log_u(k) }).collect();
    let sturm = SturmReport {
        s,
        t,
        gamma: st.gamma.max(a1e),
        alpha1_plus_epsilon: a1e,
        radius,
        log_volume_bound: sol.log_volume_bound(),
        slope: sol.log_volume_slope(0.5 * radius),
        slope_target: f64::from(n) * a1e,
        curve,
    };
    Ok(VolumeReport {
        kappa_hat: fit.kappa_hat,
        target,
        rel_error: (fit.kappa_hat / target - 1.0).abs(),
        fit,
        sturm_liouville: sturm,
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BottomLevel {
    pub u_max: f64,
    pub nu: usize,
    pub ny: usize,
    pub dimension: usize,
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbeSeries {
    pub z: lpspec::ComplexPoint,
    pub p: f64,
    /// One probe per truncation, in `uMax` order.
    pub probes: Vec<ProbeResult>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BottomReport {
    pub lambda1_hat: f64,
    pub target: f64,
    pub rel_error: f64,
    /// Levels in configured `uMax` order; the estimate is the last one.
    pub refinement: Vec<BottomLevel>,
    /// Whether the estimate never increases as `uMax` grows.
    pub monotone: bool,
    pub resolvent_probes: Vec<ProbeSeries>,
}

fn nodes_for(u_max: f64, per_unit: f64) -> usize {
    ((u_max * per_unit).round() as usize).saturating_sub(1).max(8)
}

fn discrete_err(e: DiscreteError, u_max: f64) -> RunError {
    RunError::Numerical(format!("uMax = {u_max}: {e}"))
}

/// Smallest discrete eigenvalue at each truncation, plus resolvent probes at
/// the configured points on the same operators.
pub fn run_bottom(cfg: &ExperimentConfig) -> Result<BottomReport, RunError> {
    let metric = cfg.require_metric()?;
    let b = &cfg.bottom;
    let n = metric.n();
    let mut levels = Vec::new();
    let mut probes: Vec<ProbeSeries> =
        cfg.probe.points.iter().map(|&z| ProbeSeries { z, p: cfg.probe.p, probes: Vec::new() }).collect();
    for &u_max in &b.u_max {
        let nu = nodes_for(u_max, b.nodes_per_unit);
        let grid = CollarGrid::with_budget(n, u_max, nu, b.ny, DEFAULT_BUDGET.max(8_000_000))
            .map_err(|e| discrete_err(e, u_max))?;
        let op = assemble(metric, &grid).map_err(|e| discrete_err(e, u_max))?;
        let pair = smallest_eigenvalue(&op, &EigenSettings::default()).map_err(|e| discrete_err(e, u_max))?;
        levels.push(BottomLevel {
            u_max,
            nu,
            ny: b.ny,
            dimension: op.dim(),
            value: pair.value,
            residual: pair.residual,
            iterations: pair.iterations,
        });
        for series in &mut probes {
            let r = resolvent_probe(&op, series.z, series.p, cfg.probe.trials, cfg.seed)
                .map_err(|e| discrete_err(e, u_max))?;
            series.probes.push(r);
        }
    }
    let nf = f64::from(n);
    let target = nf * nf * cfg.params.alpha0 * cfg.params.alpha0 / 4.0;
    let mut order: Vec<&BottomLevel> = levels.iter().collect();
    order.sort_by(|a, b| a.u_max.total_cmp(&b.u_max));
    let monotone = order.windows(2).all(|w| w[1].value <= w[0].value * (1.0 + 1e-10));
    let lambda1_hat = order.last().map_or(f64::NAN, |l| l.value);
    Ok(BottomReport {
        lambda1_hat,
        target,
        rel_error: (lambda1_hat / target - 1.0).abs(),
        refinement: levels,
        monotone,
        resolvent_probes: probes,
    })
}

/// Deterministic pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}
