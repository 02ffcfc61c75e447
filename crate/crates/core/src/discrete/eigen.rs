use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::{Csr, DiscreteError, SparseOperator};

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSettings {
    /// Lanczos steps before giving up.
    pub max_iterations: usize,
    /// Required `‖S v − θ v‖ / (θ ‖v‖)`.
    pub tolerance: f64,
    /// Relative residual target of the inner conjugate-gradient solves.
    pub inner_tolerance: f64,
    pub inner_max_iterations: usize,
}

impl Default for EigenSettings {
    fn default() -> Self {
        Self { max_iterations: 120, tolerance: 1e-8, inner_tolerance: 1e-12, inner_max_iterations: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    /// Eigenvector of the symmetrized operator, unit Euclidean norm.
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.par_iter().zip(b).with_min_len(4096).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.par_iter_mut().zip(x).with_min_len(4096).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Jacobi-preconditioned conjugate gradients for SPD `a`.
fn pcg(a: &Csr, diag: &[f64], b: &[f64], settings: &EigenSettings) -> Result<Vec<f64>, DiscreteError> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let bnorm = dot(b, b).sqrt();
    for it in 0..settings.inner_max_iterations {
        a.matvec(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        if dot(&r, &r).sqrt() <= settings.inner_tolerance * bnorm {
            return Ok(x);
        }
        z.par_iter_mut().zip(&r).zip(diag).for_each(|((zi, ri), d)| *zi = ri / d);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
        if it + 1 == settings.inner_max_iterations {
            break;
        }
    }
    Err(DiscreteError::NoConvergence {
        residual: dot(&r, &r).sqrt() / bnorm,
        iterations: settings.inner_max_iterations,
    })
}

/// Smallest eigenvalue of the weighted symmetric form of `op`.
///
/// Runs Lanczos on `S⁻¹` (shift-invert at zero, since `S` is positive
/// definite under Dirichlet truncation) with full reorthogonalisation and
/// stops once the Ritz pair of `S` has relative residual below the tolerance.
pub fn smallest_eigenvalue(op: &SparseOperator, settings: &EigenSettings) -> Result<Eigenpair, DiscreteError> {
    let s = &op.symmetric;
    let n = op.dim();
    let diag = s.diagonal();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());
    // Smooth start vector with a component along the ground state.
    let mut q: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * ((i * 7919) % 101) as f64 / 101.0).collect();
    let norm = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|v| *v /= norm);
    let mut best = (f64::INFINITY, Vec::new());
    let mut sv = vec![0.0; n];

    for it in 0..settings.max_iterations.min(n) {
        let mut w = pcg(s, &diag, &q, settings)?;
        let a = dot(&w, &q);
        axpy(-a, &q, &mut w);
        if let Some(prev) = basis.last() {
            axpy(-betas.last().copied().unwrap_or(0.0), prev, &mut w);
        }
        basis.push(q.clone());
        for _ in 0..2 {
            for v in &basis {
                let c = dot(&w, v);
                axpy(-c, v, &mut w);
            }
        }
        alphas.push(a);
        let b = dot(&w, &w).sqrt();

        let m = alphas.len();
        if m >= 2 && (m % 4 == 0 || b < 1e-14) || m == settings.max_iterations.min(n) {
            let mut t = DMatrix::<f64>::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = alphas[i];
                if i + 1 < m {
                    t[(i, i + 1)] = betas[i];
                    t[(i + 1, i)] = betas[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            // Largest Ritz value of the inverse is the smallest eigenvalue.
            let imax = eig.eigenvalues.imax();
            let coeffs = eig.eigenvectors.column(imax);
            let mut y = vec![0.0; n];
            for (c, v) in coeffs.iter().zip(&basis) {
                axpy(*c, v, &mut y);
            }
            let yn = dot(&y, &y).sqrt();
            y.iter_mut().for_each(|v| *v /= yn);
            s.matvec(&y, &mut sv);
            let value = dot(&y, &sv);
            let res: f64 = sv.iter().zip(&y).map(|(a, b)| (a - value * b).powi(2)).sum::<f64>().sqrt() / value.abs();
            if res < best.0 {
                best = (res, y.clone());
            }
            if res < settings.tolerance {
                return Ok(Eigenpair { value, vector: y, residual: res, iterations: it + 1 });
            }
        }
        if b < 1e-14 {
            break;
        }
        betas.push(b);
        q = w.into_iter().map(|v| v / b).collect();
    }
    Err(DiscreteError::NoConvergence { residual: best.0, iterations: alphas.len() })
}
