//! Finite-difference collar Laplacian in `u = log(x₁/x)`, used as an
//! independent oracle for the analytic formulas.
//!
//! The scheme is conservative: with the volume weight
//! `w = x₁⁻ⁿ e^{nu} (1 + c x)ⁿ / α(y)`,
//! `Δf = −w⁻¹ [∂_u(w α² ∂_u f) + Σᵢ ∂ᵢ(w x² (1 + c x)⁻² ∂ᵢ f)]`,
//! discretised with midpoint coefficients, so `w · L` is exactly symmetric.
//! Coefficients are formed from differences of `log w` to avoid overflow.

mod banded;
mod eigen;
mod probe;

pub use banded::BandedLu;
pub use eigen::{smallest_eigenvalue, EigenSettings, Eigenpair};
pub use probe::{resolvent_probe, ProbeResult};

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::ModelMetric;

/// Default cap on the number of grid nodes.
pub const DEFAULT_BUDGET: usize = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscreteError {
    #[error("grid needs nu, ny >= 8 and uMax > 0 (got nu={nu}, ny={ny}, uMax={u_max})")]
    Grid { nu: usize, ny: usize, u_max: f64 },
    #[error("grid of {points} points exceeds the budget of {budget}")]
    Budget { points: usize, budget: usize },
    #[error("vector of length {got} does not match operator dimension {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("eigensolver did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("z near discrete spectrum: zero pivot at row {row}")]
    NearSpectrum { row: usize },
    #[error("dimension mismatch between metric (n={metric}) and grid (n={grid})")]
    MetricDimension { metric: u32, grid: u32 },
}

/// Interior nodes `u_k = (k + 1) hu`, `hu = uMax/(nu + 1)`, times the periodic
/// grid `yᵢ = j hy`, `hy = 2π/ny`, in each torus direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollarGrid {
    pub u_max: f64,
    pub nu: usize,
    pub ny: usize,
    pub n: u32,
    pub budget: usize,
}

impl CollarGrid {
    pub fn new(n: u32, u_max: f64, nu: usize, ny: usize) -> Result<Self, DiscreteError> {
        Self::with_budget(n, u_max, nu, ny, DEFAULT_BUDGET)
    }

    pub fn with_budget(n: u32, u_max: f64, nu: usize, ny: usize, budget: usize) -> Result<Self, DiscreteError> {
        if nu < 8 || ny < 8 || !(u_max > 0.0 && u_max.is_finite()) || n == 0 {
            return Err(DiscreteError::Grid { nu, ny, u_max });
        }
        let g = Self { u_max, nu, ny, n, budget };
        let points = g.len();
        if points > budget {
            return Err(DiscreteError::Budget { points, budget });
        }
        Ok(g)
    }

    pub fn hu(&self) -> f64 {
        self.u_max / (self.nu + 1) as f64
    }

    pub fn hy(&self) -> f64 {
        2.0 * PI / self.ny as f64
    }

    /// Nodes per `u`-slice, `nyⁿ`.
    pub fn slice_len(&self) -> usize {
        self.ny.saturating_pow(self.n)
    }

    pub fn len(&self) -> usize {
        self.nu.saturating_mul(self.slice_len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn u(&self, k: usize) -> f64 {
        (k + 1) as f64 * self.hu()
    }

    /// `(k, y)` of a flat index `k · nyⁿ + Σ jᵢ nyⁱ`.
    pub fn node(&self, idx: usize) -> (usize, Vec<f64>) {
        let m = self.slice_len();
        let (k, mut j) = (idx / m, idx % m);
        let hy = self.hy();
        let y = (0..self.n)
            .map(|_| {
                let t = (j % self.ny) as f64 * hy;
                j /= self.ny;
                t
            })
            .collect();
        (k, y)
    }

    /// Values of `f(u, y)` at every node.
    pub fn sample<F: Fn(f64, &[f64]) -> Complex64 + Sync>(&self, f: F) -> Vec<Complex64> {
        (0..self.len())
            .into_par_iter()
            .map(|idx| {
                let (k, y) = self.node(idx);
                f(self.u(k), &y)
            })
            .collect()
    }
}

/// Row-compressed sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().with_min_len(1024).for_each(|(i, yi)| {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        });
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.row(i).find(|&(j, _)| j == i).map_or(0.0, |e| e.1)).collect()
    }
}

/// Discrete collar Laplacian with Dirichlet conditions at `u = 0` and `u = uMax`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    pub grid: CollarGrid,
    /// The operator `L` itself.
    pub matrix: Csr,
    /// `D^{1/2} L D^{−1/2}` with `D = diag(w)`; exactly symmetric.
    pub symmetric: Csr,
    /// `log w` at each node.
    pub log_weight: Vec<f64>,
}

impl SparseOperator {
    pub fn dim(&self) -> usize {
        self.log_weight.len()
    }

    /// `log` of the cell mass `w · hu · hyⁿ` used by discrete norms.
    pub fn log_mass(&self, idx: usize) -> f64 {
        self.log_weight[idx] + self.grid.hu().ln() + f64::from(self.grid.n) * self.grid.hy().ln()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, DiscreteError> {
        self.check(x.len())?;
        let mut y = vec![0.0; x.len()];
        self.matrix.matvec(x, &mut y);
        Ok(y)
    }

    /// `L F` for complex samples `F` on the grid.
    pub fn apply_to_samples(&self, f: &[Complex64]) -> Result<Vec<Complex64>, DiscreteError> {
        self.check(f.len())?;
        Ok((0..f.len())
            .into_par_iter()
            .with_min_len(1024)
            .map(|i| self.matrix.row(i).map(|(j, v)| v * f[j]).sum())
            .collect())
    }

    /// Discrete volume-weighted inner product `Σ w hu hyⁿ · a b̄`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let v: Vec<f64> = (0..a.len()).map(|i| self.log_mass(i).exp() * a[i] * b[i]).collect();
        crate::quadrature::pairwise_sum(&v)
    }

    /// One `row col value` triplet per line, zero-based.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> io::Result<()> {
        for i in 0..self.dim() {
            for (j, v) in self.matrix.row(i) {
                writeln!(out, "{i} {j} {v:e}")?;
            }
        }
        Ok(())
    }

    fn check(&self, len: usize) -> Result<(), DiscreteError> {
        if len == self.dim() {
            Ok(())
        } else {
            Err(DiscreteError::Dimension { expected: self.dim(), got: len })
        }
    }
}

fn log_weight(metric: &ModelMetric, u: f64, y: &[f64]) -> f64 {
    let nf = f64::from(metric.n());
    let x = metric.x_from_u(u);
    -nf * metric.x1.ln() + nf * u + nf * (metric.c * x).ln_1p() - metric.profile.alpha(y).ln()
}

/// Assembles `L` and its symmetrization on `grid`.
pub fn assemble(metric: &ModelMetric, grid: &CollarGrid) -> Result<SparseOperator, DiscreteError> {
    if metric.n() != grid.n {
        return Err(DiscreteError::MetricDimension { metric: metric.n(), grid: grid.n });
    }
    let m = grid.slice_len();
    let n = grid.n as usize;
    let (hu, hy) = (grid.hu(), grid.hy());
    let log_weight_at: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (k, y) = grid.node(idx);
            log_weight(metric, grid.u(k), &y)
        })
        .collect();

    // Each row: (col, L value, S value), diagonal first.
    let rows: Vec<Vec<(usize, f64, f64)>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (k, y) = grid.node(idx);
            let u = grid.u(k);
            let lw = log_weight_at[idx];
            let alpha = metric.profile.alpha(&y);
            let mut row = Vec::with_capacity(2 * n + 3);
            let mut diag = 0.0;
            let mut push = |col: Option<usize>, log_coeff: f64, row: &mut Vec<(usize, f64, f64)>| {
                diag += (log_coeff - lw).exp();
                if let Some(c) = col {
                    let lwc = log_weight_at[c];
                    row.push((c, -(log_coeff - lw).exp(), -(log_coeff - 0.5 * (lw + lwc)).exp()));
                }
            };
            // Radial fluxes: log of w α² / hu² at the midpoints.
            // Midpoints are computed from the lower index so both rows of an
            // edge see bitwise-identical coefficients.
            for (lower, step) in [(k as f64 - 1.0, k.checked_sub(1)), (k as f64, (k + 1 < grid.nu).then_some(k + 1))] {
                let umid = (lower + 1.5) * hu;
                let lc = log_weight(metric, umid, &y) + 2.0 * alpha.ln() - 2.0 * hu.ln();
                push(step.map(|kk| kk * m + idx % m), lc, &mut row);
            }
            // Torus fluxes: log of w x² (1 + c x)⁻² / hy² at the midpoints.
            let x = metric.x_from_u(u);
            let lx = 2.0 * x.ln() - 2.0 * (metric.c * x).ln_1p() - 2.0 * hy.ln();
            let mut stride = 1;
            for i in 0..n {
                let j = (idx % m / stride) % grid.ny;
                for jn in [(j + grid.ny - 1) % grid.ny, (j + 1) % grid.ny] {
                    let lower = if jn == (j + 1) % grid.ny { j } else { jn };
                    let mut ymid = y.clone();
                    ymid[i] = (lower as f64 + 0.5) * hy;
                    let lc = log_weight(metric, u, &ymid) + lx;
                    let col = idx - j * stride + jn * stride;
                    push(Some(col), lc, &mut row);
                }
                stride *= grid.ny;
            }
            row.push((idx, diag, diag));
            row.sort_unstable_by_key(|e| e.0);
            row
        })
        .collect();

    let mut row_ptr = Vec::with_capacity(grid.len() + 1);
    row_ptr.push(0);
    let nnz: usize = rows.iter().map(Vec::len).sum();
    let (mut cols, mut lv, mut sv) = (Vec::with_capacity(nnz), Vec::with_capacity(nnz), Vec::with_capacity(nnz));
    for r in rows {
        for (c, a, s) in r {
            cols.push(c);
            lv.push(a);
            sv.push(s);
        }
        row_ptr.push(cols.len());
    }
    Ok(SparseOperator {
        grid: *grid,
        matrix: Csr { row_ptr: row_ptr.clone(), cols: cols.clone(), vals: lv },
        symmetric: Csr { row_ptr, cols, vals: sv },
        log_weight: log_weight_at,
    })
}
