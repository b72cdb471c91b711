use num_complex::Complex64;
use proptest::prelude::*;
use singint::geometry::CurvePath;
use singint::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn unit_circle(n: usize) -> CurvePath {
    CurvePath::circle(c(0.0, 0.0), 1.0, n).unwrap()
}

fn segment(n: usize) -> CurvePath {
    CurvePath::segment(c(-1.0, 0.0), c(1.0, 0.0), n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn portion_measure_is_monotone_in_radius(
        node in 0usize..257,
        r1 in 1e-4f64..3.0,
        r2 in 1e-4f64..3.0,
        closed in any::<bool>(),
    ) {
        let curve = if closed { unit_circle(256) } else { segment(257) };
        let t = curve.points()[node % curve.node_count()];
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let a = curve.portion(t, lo).unwrap().measure;
        let b = curve.portion(t, hi).unwrap().measure;
        prop_assert!(a <= b + 1e-12, "measure({lo}) = {a} > measure({hi}) = {b}");
    }

    #[test]
    fn small_portions_are_at_least_their_radius(node in 0usize..257, scale in 0.0f64..1.0, closed in any::<bool>()) {
        let curve = if closed { unit_circle(256) } else { segment(257) };
        let i = node % curve.node_count();
        let t = curve.points()[i];
        let r = 4.0 * curve.local_mesh_width(i) * (1.0 + 10.0 * scale);
        let ratio = curve.portion(t, r).unwrap().measure / r;
        prop_assert!(ratio >= 0.9, "ratio {ratio} at node {i}, R = {r}");
    }

    #[test]
    fn segment_portion_matches_interval_length(x in -1.0f64..1.0, r in 1e-6f64..3.0) {
        let curve = segment(65);
        let t = c(x, 0.0);
        let expected = (x + r).min(1.0) - (x - r).max(-1.0);
        let got = curve.portion(t, r).unwrap().measure;
        prop_assert!((got - expected).abs() <= 1e-12 * (1.0 + expected), "{got} vs {expected}");
    }
}

#[test]
fn circle_length_and_portions_converge() {
    let coarse = unit_circle(2048);
    let fine = unit_circle(4096);
    let rel = (coarse.length() - fine.length()).abs() / fine.length();
    assert!(rel < 1e-3, "length change {rel}");
    for r in [0.01, 0.1, 0.5, 1.5] {
        let t = c(1.0, 0.0);
        let a = coarse.portion(t, r).unwrap().measure;
        let b = fine.portion(t, r).unwrap().measure;
        assert!((a - b).abs() / b < 1e-3, "R = {r}: {a} vs {b}");
    }
    // the portion of radius R centered on the unit circle has arc 4 asin(R/2)
    let exact = 4.0 * (0.25f64).asin();
    let got = fine.portion(c(1.0, 0.0), 0.5).unwrap().measure;
    assert!((got - exact).abs() / exact < 1e-5, "{got} vs {exact}");
}

#[test]
fn carleson_constants_of_smooth_curves_are_stable() {
    for (name, coarse, fine) in [
        ("segment", segment(257), segment(513)),
        ("circle", unit_circle(256), unit_circle(512)),
    ] {
        let a = coarse.carleson_constant(64, 64).unwrap();
        let b = fine.carleson_constant(64, 64).unwrap();
        assert!((b - a).abs() / a < 0.02, "{name}: {a} -> {b}");
        // the whole circle lies in the disk of radius 2, giving the ratio pi
        assert!(a >= 1.0 && a <= std::f64::consts::PI + 1e-9, "{name}: {a}");
    }
}

#[test]
fn spiral_carleson_constants_separate_the_exponents() {
    let stable = CurvePath::carleson_study(&[256, 512, 1024], |r| CurvePath::spiral_example(2.0, r), 64, 64).unwrap();
    assert!(stable.stable(), "alpha = 2 drifts {:?}", stable.drifts());
    let growing = CurvePath::carleson_study(&[256, 512, 1024], |r| CurvePath::spiral_example(1.5, r), 64, 64).unwrap();
    assert!(growing.diverging(), "alpha = 1.5 drifts {:?}", growing.drifts());
    assert!(matches!(CurvePath::spiral_example(0.5, 256), Err(Error::NotRectifiable { .. })));
}

#[test]
fn text_round_trip_preserves_the_polyline() {
    let curve = CurvePath::spiral_example(2.0, 64).unwrap();
    let back = CurvePath::from_text(&curve.to_text(), "memory").unwrap();
    assert_eq!(back.node_count(), curve.node_count());
    assert_eq!(back.is_closed(), curve.is_closed());
    for (a, b) in back.points().iter().zip(curve.points()) {
        assert_eq!(a, b);
    }
}

#[test]
fn off_curve_points_are_rejected() {
    let curve = segment(65);
    assert!(matches!(curve.portion(c(0.0, 0.5), 0.1), Err(Error::PointNotOnCurve { .. })));
    assert!(matches!(curve.portion(c(0.0, 0.0), 0.0), Err(Error::InvalidRadius { .. })));
}
