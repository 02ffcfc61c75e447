use std::f64::consts::PI;

use lpspec::geometry::*;
use lpspec::quasimode::{BumpB, CutoffPhi};
use num_complex::Complex64;

fn metric(n: u32, alpha: &str, c: f64) -> ModelMetric {
    ModelMetric::new(BoundaryProfile::new(n, alpha.parse().unwrap()).unwrap(), 1.0, c, 0.0).unwrap()
}

/// `−(1/√g) ∂ₐ(√g gᵃᵇ ∂_b f)` by nested centred differences in `(x, y)`, using
/// only the metric coefficients.
fn laplace_beltrami_fd(m: &ModelMetric, f: &dyn Fn(f64, &[f64]) -> Complex64, x: f64, y: &[f64]) -> Complex64 {
    let n = f64::from(m.n());
    let alpha = |y: &[f64]| m.profile.alpha(y);
    let sqrt_g = |x: f64, y: &[f64]| x.powf(-n - 1.0) * (1.0 + m.c * x).powf(n) / alpha(y);
    let hx = 1e-4 * x;
    let hy = 1e-4;
    let mut acc = Complex64::new(0.0, 0.0);
    for s in [-0.5, 0.5] {
        let xm = x + s * hx;
        let flux = sqrt_g(xm, y) * alpha(y).powi(2) * xm * xm * (f(xm + 0.5 * hx, y) - f(xm - 0.5 * hx, y)) / hx;
        acc += s.signum() * flux / hx;
    }
    for i in 0..y.len() {
        for s in [-0.5, 0.5] {
            let mut ym = y.to_vec();
            ym[i] += s * hy;
            let mut yp = ym.clone();
            let mut yq = ym.clone();
            yp[i] += 0.5 * hy;
            yq[i] -= 0.5 * hy;
            let gyy = x * x / (1.0 + m.c * x).powi(2);
            let flux = sqrt_g(x, &ym) * gyy * (f(x, &yp) - f(x, &yq)) / hy;
            acc += s.signum() * flux / hy;
        }
    }
    -acc / sqrt_g(x, y)
}

#[test]
fn product_expansion_matches_coordinate_laplacian() {
    let m = metric(2, "trig:2,0.3,-0.1,0.05", 0.3);
    let phi = CutoffPhi::new(4.0, 3).unwrap();
    let b = BumpB::ball(vec![1.0, 2.0], 1.5);
    let lambda = Complex64::new(4.0 / 3.0, 0.8);
    let f = |x: f64, y: &[f64]| {
        let mut g = vec![0.0; y.len()];
        let (bv, _) = b.sample(y, &mut g);
        phi.sample_u((m.x1 / x).ln()).phi * bv * Complex64::from(x).powc(lambda)
    };
    use lpspec::geometry::TorusFunction;
    for (x, y) in [(0.03, [1.2, 2.3]), (0.7, [0.4, 1.9]), (0.5, [1.0, 2.0]), (0.025, [1.5, 1.5])] {
        let pt = CollarPoint::new(x, y.to_vec());
        let terms = m.apply_laplacian_product(lambda, &phi, &b, &pt).unwrap();
        let fd = laplace_beltrami_fd(&m, &f, x, &y);
        let scale = terms.eigen().norm().max(terms.total().norm());
        assert!((terms.total() - fd).norm() < 1e-5 * scale, "x={x}: {} vs {fd}", terms.total());
        // The split lines reassemble into the total.
        let sum = terms.eigen() + terms.first_order() + terms.second_order() + terms.boundary();
        assert!((sum - terms.total()).norm() < 1e-12 * scale);
        let _ = b.sample(&y, &mut [0.0; 2]);
    }
}

#[test]
fn flat_cutoff_and_constant_bump_reduce_to_eigenrelation() {
    let m = metric(3, "constant:1.7", 0.0);
    let phi = CutoffPhi::new(20.0, 2).unwrap();
    let b = BumpB::uniform(3);
    let lambda = Complex64::new(1.5, -2.0);
    let pt = CollarPoint::new(1e-4, vec![0.1, 0.2, 0.3]);
    let t = m.apply_laplacian_product(lambda, &phi, &b, &pt).unwrap();
    let want = 1.7f64.powi(2) * lambda * (3.0 - lambda) * Complex64::from(1e-4).powc(lambda);
    assert!((t.total() - want).norm() < 1e-14 * want.norm());
}

#[test]
fn cutoff_slope_isolates_first_and_second_order_lines() {
    let m = metric(1, "constant:1.3", 0.0);
    let phi = CutoffPhi::new(6.0, 2).unwrap();
    let b = BumpB::uniform(1);
    let lambda = Complex64::new(1.0, 0.5);
    let x: f64 = 0.8;
    let pt = CollarPoint::new(x, vec![0.0]);
    let t = m.apply_laplacian_product(lambda, &phi, &b, &pt).unwrap();
    // Independent derivatives of φ in x.
    let at = |x: f64| phi.sample_u((1.0 / x).ln()).phi;
    let h = 1e-5;
    let d1 = (at(x + h) - at(x - h)) / (2.0 * h);
    let d2 = (at(x + h) - 2.0 * at(x) + at(x - h)) / (h * h);
    let a2 = 1.69;
    let xl = Complex64::from(x).powc(lambda);
    let want = a2 * lambda * (1.0 - lambda) * at(x) * xl + xl * x * a2 * d1 * (1.0 - 2.0 * lambda - 1.0)
        - xl * x * x * a2 * d2;
    assert!((t.total() - want).norm() < 1e-4 * want.norm(), "{} vs {want}", t.total());
}

#[test]
fn monomial_is_exact_eigenfunction_for_constant_alpha() {
    let m = metric(2, "constant:1.4", 0.0);
    for lambda in [Complex64::new(1.0, 0.0), Complex64::new(0.7, 3.0), Complex64::new(2.0, -1.0)] {
        for x in [1e-8, 0.3, 1.0] {
            let pt = CollarPoint::new(x, vec![0.5, 0.5]);
            let v = m.apply_laplacian_monomial(lambda, &pt).unwrap();
            let want = 1.96 * lambda * (2.0 - lambda) * Complex64::from(x).powc(lambda);
            assert!((v - want).norm() <= 4.0 * f64::EPSILON * want.norm());
        }
    }
}

#[test]
fn monomial_with_warped_torus_matches_finite_differences() {
    let m = metric(1, "constant:1", 0.1);
    let lambda = Complex64::new(1.0, 0.0);
    let x = 0.5;
    let v = m.apply_laplacian_monomial(lambda, &CollarPoint::new(x, vec![0.0])).unwrap();
    let fd = laplace_beltrami_fd(&m, &|x, _| Complex64::from(x), x, &[0.0]);
    assert!((v - fd).norm() < 1e-7, "{v} vs {fd}");
    assert!((v.re + 0.25 * 0.1 / 1.05).abs() < 1e-15);
}

#[test]
fn radial_distance_is_bracketed_by_curvature_extremes() {
    let m = metric(2, "trig:2,0.4,0.2", 0.0);
    let (a0, a1) = (m.profile.alpha0(), m.profile.alpha1());
    for i in 0..50 {
        let x = (-(i as f64) * 0.3).exp() * 0.99;
        let y = [i as f64 * 0.7 % (2.0 * PI), i as f64 * 1.3 % (2.0 * PI)];
        let d = m.collar_distance(x, &y).unwrap();
        let u = (1.0 / x).ln();
        assert!(u / a1 <= d + 1e-15 && d <= u / a0 + 1e-15);
    }
}

fn closed_form(n: u32, alpha: f64, r: f64, vk: f64) -> f64 {
    let nf = f64::from(n);
    vk + (2.0 * PI).powi(n as i32) * ((nf * alpha * r).exp() - 1.0) / (nf * alpha)
}

#[test]
fn ball_volume_matches_closed_form_and_refines() {
    let m = ModelMetric::new(BoundaryProfile::constant(3, 1.2).unwrap(), 1.0, 0.0, 5.0).unwrap();
    let q = VolumeQuadrature::default();
    let mut last = q.ball_volume(&m, 0.0).unwrap();
    assert_eq!(last, 5.0);
    for r in [1.0, 2.5, 4.0, 7.0, 10.0] {
        let got = q.ball_volume(&m, r).unwrap();
        let want = closed_form(3, 1.2, r, 5.0);
        assert!(((got - want) / want).abs() < 1e-6);
        assert!(got > last);
        last = got;
    }
    let coarse = VolumeQuadrature { u_step: 1.2, ..Default::default() };
    let fine = VolumeQuadrature { u_step: 0.6, ..Default::default() };
    let want = closed_form(3, 1.2, 3.0, 5.0);
    let e1 = (coarse.ball_volume(&m, 3.0).unwrap() - want).abs();
    let e2 = (fine.ball_volume(&m, 3.0).unwrap() - want).abs();
    assert!(e1 / e2 >= 3.0, "refinement ratio {}", e1 / e2);
}

#[test]
fn growth_rate_constant_alpha() {
    let m = ModelMetric::new(BoundaryProfile::constant(4, 2.0).unwrap(), 1.0, 0.0, 1.0).unwrap();
    let q = VolumeQuadrature::default();
    let radii: Vec<f64> = (1..=10).map(f64::from).collect();
    let fit = q.volume_growth_rate(&m, &radii).unwrap();
    assert!((fit.kappa_hat - 8.0).abs() < 0.02 * 8.0, "{}", fit.kappa_hat);
    let doubled = ModelMetric::new(BoundaryProfile::constant(4, 4.0).unwrap(), 1.0, 0.0, 1.0).unwrap();
    let fit2 = q.volume_growth_rate(&doubled, &radii).unwrap();
    assert!((fit2.kappa_hat / fit.kappa_hat - 2.0).abs() < 1e-3);
}

#[test]
fn growth_rate_tracks_largest_curvature() {
    let m = metric(1, "trig:1.5,0.5", 0.0);
    let q = VolumeQuadrature { torus_points: 128, ..Default::default() };
    let radii: Vec<f64> = (1..=15).map(|k| 2.0 * f64::from(k)).collect();
    let fit = q.volume_growth_rate(&m, &radii).unwrap();
    assert!((fit.kappa_hat - 2.0).abs() < 0.05 * 2.0, "{}", fit.kappa_hat);
    assert!(fit.kappa_hat >= 1.0 && fit.kappa_hat <= 2.0 * 1.01);
}

#[test]
fn sturm_liouville_slope_approaches_growth_rate() {
    let (alpha1, eps, n) = (1.5, 0.1, 3);
    let sol = sturm_liouville_compare(1.0, 3.0, alpha1 + eps, 4.0, 60.0, n, 1e-3).unwrap();
    let slope = sol.log_volume_slope(40.0);
    let target = f64::from(n) * (alpha1 + eps);
    assert!((slope - target).abs() < 0.03 * target, "{slope}");
    let empty = sturm_liouville_compare(2.0, 2.0, 1.3, 1.3, 8.0, 1, 1e-3).unwrap();
    for k in (0..empty.r.len()).step_by(500) {
        let exact = (1.3 * empty.r[k]).sinh() / 1.3;
        assert!((empty.u(k) - exact).abs() <= 1e-8 * exact.max(1.0));
    }
}

#[test]
fn spec_file_round_trip() {
    let m = parse_metric_spec("n=1\nx1=2\nc=0.5\nalpha=constant:2\ncompact_volume=1.5\n").unwrap();
    assert_eq!((m.n(), m.x1, m.c, m.compact_volume), (1, 2.0, 0.5, 1.5));
}
