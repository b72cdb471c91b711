use num_complex::Complex64;
use proptest::prelude::*;
use singint::geometry::CurvePath;
use singint::submult::{h_ratio, powerlikeness_indices, v0, SubmultProfile, V0Evaluator, V0Window, DEFAULT_HALF_WIDTH, DEFAULT_STEP};
use singint::weights::{mo_indices, phi0_profile, CompositeWeight, RadialRule, WeightFactor};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn segment() -> CurvePath {
    CurvePath::segment(c(-1.0, 0.0), c(1.0, 0.0), 129).unwrap()
}

fn composite() -> CompositeWeight {
    CompositeWeight::new(vec![
        WeightFactor { anchor: c(-0.5, 0.0), rule: RadialRule::Power { gamma: 0.3 } },
        WeightFactor { anchor: c(0.25, 0.0), rule: RadialRule::Oscillating { gamma: -0.2, amp: 0.1, freq: 1.0 } },
    ])
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn max_of_two_powers_has_its_exponents_as_indices(a in -1.0f64..1.0, gap in 0.0f64..1.0) {
        let b = a + gap;
        let profile = SubmultProfile::synthetic(|x| x.powf(a).max(x.powf(b)));
        let (ok, worst) = profile.check_submultiplicative(2000, 7);
        prop_assert!(ok, "worst ratio {worst}");
        let idx = profile.indices();
        prop_assert!((idx.alpha - a).abs() < 1e-9 && (idx.beta - b).abs() < 1e-9, "{idx:?}");
        prop_assert!(idx.alpha <= idx.beta);
    }

    #[test]
    fn v0_of_a_power_weight_is_the_power(lambda in -0.8f64..0.8, lx in -3.0f64..3.0) {
        let curve = segment();
        let w = CompositeWeight::khvedelidze(&[(c(0.0, 0.0), lambda)]).unwrap();
        let x = lx.exp();
        let got = v0(&w, &curve, c(0.0, 0.0), x).unwrap();
        prop_assert!((got - x.powf(lambda)).abs() < 1e-3 * x.powf(lambda), "{got} vs {}", x.powf(lambda));
    }
}

#[test]
fn power_profile_passes_with_unit_worst_ratio() {
    let profile = SubmultProfile::synthetic(|x| x.powf(0.4));
    let (ok, worst) = profile.check_submultiplicative(500, 1);
    assert!(ok);
    assert!((worst - 1.0).abs() < 1e-12);
}

#[test]
fn log_square_profile_fails_with_ratio_five_quarters() {
    let profile = SubmultProfile::from_ln_fn(1.0, 8, singint::submult::Provenance::Synthetic, |lx| (1.0 + lx * lx).ln());
    let (ok, worst) = profile.check_submultiplicative(100, 3);
    assert!(!ok);
    assert!(worst >= 1.25 - 1e-12, "{worst}");
}

#[test]
fn h_ratio_examples() {
    let curve = CurvePath::segment(c(0.0, 0.0), c(1.0, 0.0), 65).unwrap();
    let unit = CompositeWeight::unit();
    assert_eq!(h_ratio(&unit, &curve, c(0.3, 0.0), 0.1, 0.2).unwrap(), 1.0);
    let w = CompositeWeight::khvedelidze(&[(c(0.0, 0.0), 0.3)]).unwrap();
    assert_eq!(h_ratio(&w, &curve, c(0.0, 0.0), 0.2, 0.2).unwrap(), 1.0);
    let got = h_ratio(&w, &curve, c(0.0, 0.0), 0.1, 0.2).unwrap();
    assert!((got - 0.5f64.powf(0.3)).abs() < 1e-9, "{got}");
}

#[test]
fn v0_trivial_cases() {
    let curve = segment();
    assert!((v0(&CompositeWeight::unit(), &curve, c(0.2, 0.0), 3.0).unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v0(&composite(), &curve, c(0.25, 0.0), 1.0).unwrap(), 1.0);
}

#[test]
fn phi0_and_v0_profiles_are_regular_and_submultiplicative() {
    let curve = segment();
    let w = composite();
    let osc = &w.factors()[1].rule;
    let profiles = [
        phi0_profile(osc, curve.length()).unwrap(),
        V0Evaluator::new(&w, &curve, c(0.25, 0.0), V0Window::default())
            .unwrap()
            .profile(DEFAULT_STEP, DEFAULT_HALF_WIDTH)
            .unwrap(),
    ];
    for profile in profiles {
        let (ok, worst) = profile.check_submultiplicative(2000, 11);
        assert!(ok, "{:?}: worst ratio {worst}", profile.provenance());
        assert!(profile.regularity_bound().is_finite());
        assert!(profile.indices().disagreement <= 0.05, "{:?}", profile.indices());
    }
}

#[test]
fn powerlikeness_matches_the_factor_indices_at_anchors_and_vanishes_elsewhere() {
    let curve = segment();
    let w = composite();
    for f in w.factors() {
        let mo = mo_indices(&f.rule, curve.length()).unwrap();
        let pl = powerlikeness_indices(&w, &curve, f.anchor).unwrap();
        assert!((pl.alpha - mo.alpha).abs() <= 0.02 && (pl.beta - mo.beta).abs() <= 0.02, "{pl:?} vs {mo:?}");
    }
    for t in [c(-0.9, 0.0), c(0.0, 0.0), c(0.7, 0.0)] {
        let pl = powerlikeness_indices(&w, &curve, t).unwrap();
        assert!(pl.alpha.abs() <= 0.02 && pl.beta.abs() <= 0.02, "{t}: {pl:?}");
    }
}
