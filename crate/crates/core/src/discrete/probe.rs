use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{BandedLu, DiscreteError, SparseOperator};
use crate::region::ComplexPoint;

/// Storage cap, in complex entries, for the banded factorisation.
pub const PROBE_BUDGET: usize = 50_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbeResult {
    pub z: ComplexPoint,
    pub p: f64,
    /// `max` over trials of `‖(L − z)⁻¹ r‖_p / ‖r‖_p`.
    pub value: f64,
    pub trials: Vec<f64>,
    pub seed: u64,
}

fn weighted_norm(op: &SparseOperator, v: &[Complex64], p: f64) -> f64 {
    let terms: Vec<f64> = v.iter().enumerate().map(|(i, x)| (x.norm().ln() * p + op.log_mass(i)).exp()).collect();
    crate::quadrature::pairwise_sum(&terms).powf(1.0 / p)
}

/// Lower bound on the discrete `ℓ^p → ℓ^p` resolvent norm at `z`.
///
/// Probe vectors are `r = w^{−1/p} ξ` with `ξ` standard normal, so each cell
/// carries comparable `ℓ^p` mass. Norms are volume-weighted.
pub fn resolvent_probe(
    op: &SparseOperator,
    z: ComplexPoint,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<ProbeResult, DiscreteError> {
    let lu = BandedLu::factor_shifted(op, z.into(), PROBE_BUDGET)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(trials);
    for _ in 0..trials.max(1) {
        let r: Vec<Complex64> = op
            .log_weight
            .iter()
            .map(|lw| {
                let xi: f64 = StandardNormal.sample(&mut rng);
                Complex64::from(xi * (-lw / p).exp())
            })
            .collect();
        let mut x = r.clone();
        lu.solve(&mut x);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(DiscreteError::NearSpectrum { row: 0 });
        }
        values.push(weighted_norm(op, &x, p) / weighted_norm(op, &r, p));
    }
    let value = values.iter().copied().fold(0.0, f64::max);
    Ok(ProbeResult { z, p, value, trials: values, seed })
}
