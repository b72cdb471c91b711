use num_complex::Complex64;
use proptest::prelude::*;
use singint::exponent::{ExponentFunction, ExponentSpec};
use singint::geometry::CurvePath;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn unit_segment(n: usize) -> CurvePath {
    CurvePath::segment(c(0.0, 0.0), c(1.0, 0.0), n).unwrap()
}

/// Pairwise maximum written out independently of the library.
fn brute_modulus(curve: &CurvePath, values: &[f64]) -> f64 {
    let pts = curve.points();
    let mut best: f64 = 0.0;
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            let d = (pts[i] - pts[j]).norm();
            if i != j && d <= 0.5 {
                best = best.max((values[i] - values[j]).abs() / (1.0 / -d.ln()));
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjugation_is_an_involution(values in prop::collection::vec(1.01f64..100.0, 17)) {
        let curve = unit_segment(17);
        let p = ExponentFunction::from_values(&curve, values.clone()).unwrap();
        let q = p.conjugate();
        let back = q.conjugate();
        for i in 0..values.len() {
            prop_assert!((back.at_node(i) - values[i]).abs() <= 1e-12 * values[i]);
            let sum = 1.0 / values[i] + 1.0 / q.at_node(i);
            prop_assert!((sum - 1.0).abs() <= 1e-12, "1/p + 1/q = {sum}");
        }
    }

    #[test]
    fn modulus_is_monotone_under_restriction(
        values in prop::collection::vec(1.5f64..4.0, 33),
        mask in prop::collection::vec(any::<bool>(), 33),
    ) {
        let curve = unit_segment(33);
        let p = ExponentFunction::from_values(&curve, values).unwrap();
        let subset: Vec<usize> = (0..33).filter(|&i| mask[i]).collect();
        prop_assert!(p.dini_lipschitz_modulus_on(&curve, &subset) <= p.dini_lipschitz_modulus(&curve));
    }
}

#[test]
fn constant_and_linear_conjugates() {
    let curve = unit_segment(11);
    assert_eq!(ExponentFunction::constant(&curve, 2.0).unwrap().conjugate().at_node(5), 2.0);
    let q = ExponentFunction::constant(&curve, 4.0).unwrap().conjugate();
    assert!((q.at_node(0) - 4.0 / 3.0).abs() < 1e-15);
    let lin = ExponentFunction::from_fn(&curve, |z| 1.5 + 1.5 * z.re).unwrap().conjugate();
    assert!((lin.at_node(0) - 3.0).abs() < 1e-12);
    assert!((lin.at_node(10) - 1.5).abs() < 1e-12);
}

#[test]
fn radial_exponent_has_a_stable_modulus() {
    let spec = ExponentSpec::Radial { center: c(0.25, 0.0), base: 2.0, amplitude: 1.0 };
    let mut moduli = Vec::new();
    for n in [129, 257] {
        let curve = unit_segment(n);
        let p = ExponentFunction::from_spec(&curve, &spec).unwrap();
        let got = p.dini_lipschitz_modulus(&curve);
        let oracle = brute_modulus(&curve, p.values());
        assert!((got - oracle).abs() <= 1e-12 * oracle, "{got} vs {oracle}");
        moduli.push(got);
    }
    assert!(moduli[0] > 0.0);
    assert!((moduli[1] - moduli[0]).abs() / moduli[0] < 0.1, "{moduli:?}");
}

#[test]
fn a_jump_makes_the_modulus_grow_under_refinement() {
    let mut moduli = Vec::new();
    for n in [33, 65, 129, 257] {
        let curve = unit_segment(n);
        let p = ExponentFunction::from_fn(&curve, |z| if z.re < 0.5 { 2.0 } else { 2.5 }).unwrap();
        moduli.push(p.dini_lipschitz_modulus(&curve));
    }
    // one cell of width h carries the jump, so the modulus is 0.5 ln(1/h)
    for w in moduli.windows(2) {
        assert!(w[1] > w[0] + 0.3, "{moduli:?}");
    }
    assert!((moduli[3] - 0.5 * 256f64.ln()).abs() < 1e-9, "{moduli:?}");
}

#[test]
fn exponents_leave_the_admissible_range_with_an_error() {
    let curve = unit_segment(5);
    assert!(ExponentFunction::constant(&curve, 1.0).is_err());
    assert!(ExponentFunction::constant(&curve, f64::INFINITY).is_err());
    assert!(ExponentFunction::from_values(&curve, vec![2.0; 4]).is_err());
}
