use lpspec::geometry::{BoundaryProfile, ModelMetric};
use lpspec::quasimode::*;
use lpspec::region::{lp_contained_region, membership, ComplexPoint, SpectralParams};

fn constant_metric(n: u32, alpha: f64, c: f64) -> ModelMetric {
    ModelMetric::new(BoundaryProfile::constant(n, alpha).unwrap(), 1.0, c, 0.0).unwrap()
}

fn cosine_metric() -> ModelMetric {
    ModelMetric::new(BoundaryProfile::new(1, "trig:1.5,0.5".parse().unwrap()).unwrap(), 1.0, 0.0, 0.0).unwrap()
}

fn quad() -> QuasimodeQuadrature {
    QuasimodeQuadrature::default()
}

#[test]
fn symmetric_configuration_has_only_cutoff_terms() {
    let m = constant_metric(2, 1.0, 0.0);
    let q = Quasimode::new(QuasimodeSpec::new(2, 1.5, 1.0, 0.1, 0.4, 500.0), &m).unwrap();
    let r = q.residual(&quad(), DEFAULT_PASS_SLACK);
    let f = r.norms.f;
    for k in [0, 2, 4, 5, 6] {
        assert!(r.norms.terms[k] < 1e-12 * f, "term {} = {}", k + 1, r.norms.terms[k]);
    }
    assert!(r.norms.terms[1] > 1e-3 * f && r.norms.terms[3] > 1e-3 * f);

    let warped = constant_metric(2, 1.0, 0.1);
    let r = Quasimode::new(QuasimodeSpec::new(2, 1.5, 1.0, 0.1, 0.4, 500.0), &warped).unwrap().residual(&quad(), 3.0);
    assert!(r.norms.terms[2] > 1e-6 * r.norms.f && r.norms.terms[4] > 1e-6 * r.norms.f);
}

#[test]
fn residual_decays_like_inverse_pth_root_of_depth() {
    let m = constant_metric(1, 1.0, 0.0);
    for p in [1.0, 1.5, 2.0] {
        let pts: Vec<(f64, f64)> = [1e2, 1e3, 1e4]
            .iter()
            .map(|&l| {
                let r = Quasimode::new(QuasimodeSpec::new(1, p, 1.0, 0.1, 0.0, l), &m).unwrap().residual(&quad(), 3.0);
                (l.ln(), r.ratio.ln())
            })
            .collect();
        let slope = (pts[2].1 - pts[0].1) / (pts[2].0 - pts[0].0);
        assert!((slope + 1.0 / p).abs() < 0.1 / p, "p={p}: slope {slope}");
    }
}

#[test]
fn norm_grows_linearly_in_depth_and_is_homogeneous() {
    let m = constant_metric(2, 1.3, 0.2);
    let p = 1.25;
    let per_l: Vec<f64> = [1e2, 1e3, 1e4]
        .iter()
        .map(|&l| Quasimode::new(QuasimodeSpec::new(2, p, 1.69, 0.1, 0.0, l), &m).unwrap().lp_norm(&quad()).powf(p) / l)
        .collect();
    assert!((per_l[2] / per_l[1] - 1.0).abs() < 2e-3, "{per_l:?}");
    let spec = QuasimodeSpec::new(2, p, 1.69, 0.1, 0.0, 50.0);
    let one = Quasimode::new(spec.clone().with_bump(BumpB::uniform(2)), &m).unwrap().lp_norm(&quad());
    let two = Quasimode::new(spec.with_bump(BumpB::uniform(2).scaled(2.0)), &m).unwrap().lp_norm(&quad());
    assert!((two / one - 2.0).abs() < 1e-12);
}

#[test]
fn norm_sandwich_holds() {
    for (metric, a) in [(constant_metric(2, 1.3, 0.4), 1.69), (cosine_metric(), 3.0)] {
        let n = metric.n();
        let q = Quasimode::new(QuasimodeSpec::new(n, 1.5, a, 0.2, 0.3, 30.0), &metric).unwrap();
        let (lo, hi) = q.norm_bounds(&quad());
        let norm = q.lp_norm(&quad());
        assert!(lo <= norm && norm <= hi, "{lo} <= {norm} <= {hi}");
    }
}

#[test]
fn norms_are_translation_invariant_for_constant_alpha() {
    let m = constant_metric(2, 1.0, 0.1);
    let bump = BumpB::ball(vec![1.0, 2.0], 0.9);
    let spec = QuasimodeSpec::new(2, 1.5, 1.0, 0.1, 0.5, 40.0);
    let a = Quasimode::new(spec.clone().with_bump(bump.clone()), &m).unwrap().residual(&quad(), 3.0);
    let b = Quasimode::new(spec.with_bump(bump.translated(&[2.5, 4.0])), &m).unwrap().residual(&quad(), 3.0);
    assert!((a.norms.f / b.norms.f - 1.0).abs() < 1e-10);
    assert!((a.norms.total / b.norms.total - 1.0).abs() < 1e-10);
}

#[test]
fn term_one_is_bounded_by_epsilon() {
    let m = cosine_metric();
    for (a, eps, s) in [(3.0, 0.1, 0.0), (4.0, 0.05, 1.0), (1.5, 0.2, 2.0)] {
        let q = Quasimode::new(QuasimodeSpec::new(1, 1.5, a, eps, s, 100.0), &m).unwrap();
        let r = q.residual(&quad(), 3.0);
        assert!(r.norms.terms[0] <= eps * r.norms.f, "A={a}: {} > {}", r.norms.terms[0], eps * r.norms.f);
    }
}

#[test]
fn shrinking_epsilon_shrinks_ratio() {
    let m = cosine_metric();
    let mut ratios = Vec::new();
    for eps in [0.2, 0.1, 0.05] {
        let probe = Quasimode::new(QuasimodeSpec::new(1, 1.5, 3.0, eps, 0.5, 10.0), &m).unwrap();
        let depth = probe.required_depth(DEFAULT_COUPLING);
        let v = verify_quasimode(
            QuasimodeSpec::new(1, 1.5, 3.0, eps, 0.5, depth),
            &m,
            &quad(),
            DEFAULT_PASS_SLACK,
            DEFAULT_COUPLING,
        )
        .unwrap();
        assert!(v.report.pass, "eps={eps}: ratio {}", v.report.ratio);
        ratios.push(v.report.ratio);
    }
    assert!(ratios[0] > ratios[1] && ratios[1] > ratios[2], "{ratios:?}");
}

#[test]
fn bump_sits_at_the_curvature_maximum_for_a_equal_alpha1_squared() {
    let m = cosine_metric();
    let probe = Quasimode::new(QuasimodeSpec::new(1, 1.0, 4.0, 0.1, 0.0, 10.0), &m).unwrap();
    let c = probe.bump().center[0];
    assert!(c.min(2.0 * std::f64::consts::PI - c) < 1e-6);
    let depth = probe.required_depth(DEFAULT_COUPLING);
    let v =
        verify_quasimode(QuasimodeSpec::new(1, 1.0, 4.0, 0.1, 0.0, depth), &m, &quad(), 3.0, DEFAULT_COUPLING).unwrap();
    assert!(v.report.pass, "{}", v.report.ratio);
}

#[test]
fn supports_move_toward_the_boundary_as_epsilon_shrinks() {
    let m = constant_metric(1, 1.0, 0.0);
    let supports: Vec<(f64, f64)> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&eps| {
            let depth = coupled_depth(1.5, eps, std::f64::consts::PI, 2, DEFAULT_COUPLING);
            Quasimode::new(QuasimodeSpec::new(1, 1.5, 1.0, eps, 0.0, depth), &m).unwrap().support_u()
        })
        .collect();
    for w in supports.windows(2) {
        assert!(w[1].1 > w[0].1);
    }
}

#[test]
fn spectral_samples_lie_in_the_contained_region() {
    let m = cosine_metric();
    let params = SpectralParams::connected(1, 1.0, 2.0).unwrap();
    let mut modes = Vec::new();
    for (p, a, s) in [(1.0, 1.0, 0.5), (1.5, 2.5, -1.0), (1.5, 4.0, 2.0), (1.2, 3.3, 0.0)] {
        modes.push(Quasimode::new(QuasimodeSpec::new(1, p, a, 0.1, s, 50.0), &m).unwrap());
    }
    for (mode, sample) in modes.iter().zip(spectral_sample(&modes)) {
        let region = lp_contained_region(&params, mode.spec().p).unwrap();
        assert!(membership(sample.value, &region).unwrap(), "{sample:?}");
        assert_eq!(sample.q, mode.spec().p);
        let mirrored = Quasimode::new(QuasimodeSpec::new(1, sample.q, sample.a, 0.1, -sample.s, 50.0), &m).unwrap();
        let conj = spectral_sample(std::slice::from_ref(&mirrored))[0].value;
        assert_eq!(conj, sample.value.conj());
    }
    let bottom = Quasimode::new(QuasimodeSpec::new(1, 2.0, 1.0, 0.1, 0.0, 50.0), &m).unwrap();
    assert_eq!(spectral_sample(&[bottom])[0].value, ComplexPoint::new(0.25, 0.0));
}

#[test]
fn report_serializes_with_expected_keys() {
    let m = constant_metric(1, 1.0, 0.0);
    let r = Quasimode::new(QuasimodeSpec::new(1, 1.0, 1.0, 0.1, 0.0, 100.0), &m).unwrap().residual(&quad(), 3.0);
    let v = serde_json::to_value(&r).unwrap();
    for key in ["p", "A", "epsilon", "L", "lambda", "Lambda", "norms", "ratio", "pass"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["norms"]["terms"].as_array().unwrap().len(), 7);
    assert!(v["lambda"]["re"].is_number() && v["Lambda"]["im"].is_number());
}
