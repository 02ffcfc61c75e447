use num_complex::Complex64;

use super::{DiscreteError, SparseOperator};

/// LU factorisation with partial pivoting of a complex band matrix, stored by
/// columns with room for the `kl` extra superdiagonals created by pivoting.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    ab: Vec<Complex64>,
    piv: Vec<usize>,
}

impl BandedLu {
    /// Storage entries needed for an `n × n` matrix with bandwidths `kl`, `ku`.
    pub fn storage(n: usize, kl: usize, ku: usize) -> usize {
        n.saturating_mul(2 * kl + ku + 1)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        j * self.ld + self.kl + self.ku + i - j
    }

    /// Factorises `op − z I`.
    pub fn factor_shifted(op: &SparseOperator, z: Complex64, budget: usize) -> Result<Self, DiscreteError> {
        let n = op.dim();
        let bw = op.grid.slice_len();
        let (kl, ku) = (bw, bw);
        let size = Self::storage(n, kl, ku);
        if size > budget {
            return Err(DiscreteError::Budget { points: size, budget });
        }
        let ld = 2 * kl + ku + 1;
        let mut lu = Self { n, kl, ku, ld, ab: vec![Complex64::new(0.0, 0.0); size], piv: vec![0; n] };
        for i in 0..n {
            for (j, v) in op.matrix.row(i) {
                let k = lu.at(i, j);
                lu.ab[k] += v;
            }
            let k = lu.at(i, i);
            lu.ab[k] -= z;
        }
        lu.factor()?;
        Ok(lu)
    }

    fn factor(&mut self) -> Result<(), DiscreteError> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = self.ab[self.at(k, k)].norm();
            for i in k + 1..=last_row {
                let v = self.ab[self.at(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(DiscreteError::NearSpectrum { row: k });
            }
            self.piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.at(k, j), self.at(p, j));
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.ab[self.at(k, k)];
            for i in k + 1..=last_row {
                let ik = self.at(i, k);
                let l = self.ab[ik] / pivot;
                self.ab[ik] = l;
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..=last_col {
                    let kj = self.ab[self.at(k, j)];
                    let ij = self.at(i, j);
                    self.ab[ij] -= l * kj;
                }
            }
        }
        Ok(())
    }

    // Band index arithmetic reads clearer with explicit indices.
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &mut [Complex64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= self.ab[self.at(i, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in k + 1..=(k + kl + ku).min(n - 1) {
                acc -= self.ab[self.at(k, j)] * b[j];
            }
            b[k] = acc / self.ab[self.at(k, k)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{assemble, CollarGrid};
    use crate::geometry::{BoundaryProfile, ModelMetric};

    #[test]
    fn solves_shifted_system() {
        let m =
            ModelMetric::new(BoundaryProfile::new(1, "trig:1.5,0.3".parse().unwrap()).unwrap(), 1.0, 0.1, 0.0).unwrap();
        let op = assemble(&m, &CollarGrid::new(1, 6.0, 12, 8).unwrap()).unwrap();
        let z = Complex64::new(0.3, 0.7);
        let lu = BandedLu::factor_shifted(&op, z, 1 << 24).unwrap();
        let x: Vec<Complex64> =
            (0..op.dim()).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let mut b = op.apply_to_samples(&x).unwrap();
        b.iter_mut().zip(&x).for_each(|(bi, xi)| *bi -= z * xi);
        lu.solve(&mut b);
        let err = b.iter().zip(&x).map(|(a, c)| (a - c).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }
}
