use lpspec::region::*;
use proptest::prelude::*;

fn params(n: u32, a0: f64, a1: f64) -> SpectralParams {
    SpectralParams::connected(n, a0, a1).unwrap()
}

/// Dense scan over `A` of `F(A, y)`; independent of the closed-form critical point.
fn scan_min_boundary(region: &RegionUnion, y: f64) -> f64 {
    region.params.alpha_sq.sample(4000).into_iter().map(|a| region.boundary_x(a, y)).fold(f64::INFINITY, f64::min)
}

/// Bisection in `q` on the increasing map `q ↦ F_q(y)`; independent of the
/// closed-form inversion.
fn bisect_q(x: f64, y: f64, a: f64, n: u32, p: f64) -> f64 {
    let nf = f64::from(n);
    let boundary = |q: f64| {
        let t = 1.0 - 2.0 / q;
        y * y / (a * nf * nf * t * t) + a * nf * nf / q * (1.0 - 1.0 / q)
    };
    let (mut lo, mut hi) = (p, 2.0 - 1e-15);
    if boundary(hi) <= x {
        return 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if boundary(mid) <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn duality_leaves_membership_unchanged(
        n in 1u32..6, a0 in 0.3f64..2.0, spread in 0.0f64..1.5, p in 1.01f64..1.99,
        x in -30.0f64..60.0, y in -40.0f64..40.0,
    ) {
        let pr = params(n, a0, a0 + spread);
        let q = conjugate_exponent(p);
        let pt = ComplexPoint::new(x, y);
        let inner_p = membership(pt, &lp_contained_region(&pr, p).unwrap()).unwrap();
        let inner_q = membership(pt, &lp_contained_region(&pr, q).unwrap()).unwrap();
        prop_assert_eq!(inner_p, inner_q);
        let outer_p = lp_containing_parabola(&pr, p).unwrap().contains(pt);
        let outer_q = lp_containing_parabola(&pr, q).unwrap().contains(pt);
        prop_assert_eq!(outer_p, outer_q);
    }

    #[test]
    fn contained_region_lies_in_containing_parabola(
        n in 1u32..6, a0 in 0.3f64..2.0, spread in 0.0f64..1.5, p in 1.0f64..1.99,
        x in -30.0f64..60.0, y in -40.0f64..40.0,
    ) {
        let pr = params(n, a0, a0 + spread);
        let pt = ComplexPoint::new(x, y);
        if membership(pt, &lp_contained_region(&pr, p).unwrap()).unwrap() {
            prop_assert!(lp_containing_parabola(&pr, p).unwrap().contains(pt));
        }
    }

    #[test]
    fn membership_matches_dense_scan(
        n in 1u32..5, a0 in 0.5f64..1.5, spread in 0.0f64..1.0, p in 1.05f64..1.95,
        y in -20.0f64..20.0, offset in -2.0f64..2.0,
    ) {
        let pr = params(n, a0, a0 + spread);
        let region = lp_contained_region(&pr, p).unwrap();
        let (_, closed_form) = region.min_boundary(y);
        let scanned = scan_min_boundary(&region, y);
        prop_assert!(closed_form <= scanned + 1e-12 * (1.0 + scanned.abs()));
        prop_assert!(scanned - closed_form <= 1e-4 * (1.0 + scanned.abs()));
        let x = closed_form + offset;
        let far = offset.abs() > 1e-3 * (1.0 + closed_form.abs());
        if far {
            prop_assert_eq!(membership(ComplexPoint::new(x, y), &region).unwrap(), offset > 0.0);
        }
    }

    #[test]
    fn inversion_round_trip(
        n in 1u32..6, a in 0.2f64..5.0, p in 1.0f64..1.95, q_frac in 0.0f64..1.0, s in -10.0f64..10.0,
    ) {
        let q = p + (2.0 - p) * q_frac * 0.999;
        let pt = parametrize_spectrum_set(q, s, a, n);
        let inv = invert_parametrization(pt, a, n, p).unwrap();
        let back = parametrize_spectrum_set(inv.q, inv.s, a, n);
        let err = ((back.x - pt.x).powi(2) + (back.y - pt.y).powi(2)).sqrt();
        prop_assert!(err < 1e-10 * (1.0 + pt.x.abs() + pt.y.abs()), "err {err}");
        if s.abs() > 1e-3 {
            let oracle = bisect_q(pt.x, pt.y, a, n, p);
            prop_assert!((oracle - inv.q).abs() < 1e-8, "{} vs {}", oracle, inv.q);
        }
    }

    #[test]
    fn envelope_is_tangent_to_every_slice(p in 1.02f64..1.98, a in 0.1f64..10.0, n in 1u32..6) {
        let pr = params(n, a.sqrt(), a.sqrt());
        let slice = lp_contained_region(&pr, p).unwrap().slice(a);
        let m = envelope_slope(p).unwrap();
        // y²/w + v − m y = 0 has discriminant m² − 4v/w; normalise by m².
        let disc = (m * m - 4.0 * slice.vertex / slice.width) / (m * m);
        prop_assert!(disc.abs() < 1e-9, "{disc}");
    }

    #[test]
    fn slices_grow_in_a(p in 1.02f64..1.98, a in 0.1f64..10.0, da in 0.01f64..5.0) {
        let pr = params(3, 0.1, 4.0);
        let region = lp_contained_region(&pr, p).unwrap();
        let (s1, s2) = (region.slice(a), region.slice(a + da));
        prop_assert!(s2.width > s1.width && s2.vertex > s1.vertex);
    }
}

#[test]
fn p_two_slices_are_rays() {
    let pr = params(3, 1.0, 2.0);
    let region = lp_contained_region(&pr, 2.0).unwrap();
    for a in [1.0, 2.5, 4.0] {
        let s = region.slice(a);
        assert!(s.degenerate);
        assert_eq!(s.vertex, a * 9.0 / 4.0);
        assert!(s.contains(ComplexPoint::new(a * 9.0 / 4.0 + 1.0, 0.0)));
        assert!(!s.contains(ComplexPoint::new(a * 9.0 / 4.0 + 1.0, 1e-3)));
    }
    assert!(matches!(membership(ComplexPoint::new(5.0, 0.0), &region), Err(RegionError::Degenerate(_))));
}

#[test]
fn equal_curvature_bounds_make_l1_regions_coincide() {
    let pr = params(4, 1.5, 1.5);
    assert_eq!(l1_contained_parabola(&pr), l1_containing_parabola(&pr));
    let inner = lp_contained_region(&pr, 1.0).unwrap().slice(2.25);
    let outer = lp_containing_parabola(&pr, 1.0).unwrap();
    assert!((inner.width - outer.width).abs() < 1e-12 && (inner.vertex - outer.vertex).abs() < 1e-12);
}

#[test]
fn disconnected_range_unions_only_its_pieces() {
    let range = AlphaSqRange::new(vec![[1.0, 1.0], [4.0, 4.0]]).unwrap();
    let pr = SpectralParams::new(2, 1.0, 2.0, range).unwrap();
    let region = lp_contained_region(&pr, 1.5).unwrap();
    let (a, f) = region.min_boundary(3.0);
    assert!(a == 1.0 || a == 4.0);
    let direct = region.boundary_x(1.0, 3.0).min(region.boundary_x(4.0, 3.0));
    assert_eq!(f, direct);
}
