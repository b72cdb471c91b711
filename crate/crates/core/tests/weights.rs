use num_complex::Complex64;
use proptest::prelude::*;
use singint::weights::{almost_increasing_constant_on, mo_indices, phi0, CompositeWeight, RadialRule, WeightFactor};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn oscillating(gamma: f64, amp: f64, freq: f64) -> RadialRule {
    RadialRule::Oscillating { gamma, amp, freq }
}

/// `x^γ max_θ exp(A [sin(B ln x + θ) - sin θ])` on a dense θ grid.
fn theta_max_oracle(gamma: f64, amp: f64, freq: f64, x: f64) -> f64 {
    let phase = freq * x.ln();
    let best = (0..20_000)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / 20_000.0;
            (phase + theta).sin() - theta.sin()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    x.powf(gamma) * (amp * best).exp()
}

fn radial_rule() -> impl Strategy<Value = RadialRule> {
    prop_oneof![
        (-0.9f64..0.9).prop_map(|gamma| RadialRule::Power { gamma }),
        (-0.9f64..0.9, -2.0f64..2.0).prop_map(|(gamma, beta)| RadialRule::LogPower { gamma, beta }),
        (-0.5f64..0.9, 0.0f64..0.3, 0.5f64..2.0).prop_map(|(g, a, b)| oscillating(g, a, b)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn phi0_is_submultiplicative(rule in radial_rule(), lx in -6.0f64..6.0, ly in -6.0f64..6.0) {
        let (x, y) = (lx.exp(), ly.exp());
        let xy = phi0(&rule, x * y, 1.0).unwrap();
        let bound = phi0(&rule, x, 1.0).unwrap() * phi0(&rule, y, 1.0).unwrap();
        prop_assert!(xy <= bound * (1.0 + 1e-6), "Φ({}) = {xy} > {bound}", x * y);
    }

    #[test]
    fn lower_index_never_exceeds_upper(rule in radial_rule()) {
        let idx = mo_indices(&rule, 1.0).unwrap();
        prop_assert!(idx.alpha <= idx.beta + 1e-12, "{idx:?}");
    }

    #[test]
    fn phi0_matches_the_theta_max_formula(gamma in -0.5f64..0.9, amp in 0.05f64..0.3, freq in 0.5f64..2.0, lx in -5.0f64..5.0) {
        let x = lx.exp();
        let got = phi0(&oscillating(gamma, amp, freq), x, 1.0).unwrap();
        let oracle = theta_max_oracle(gamma, amp, freq, x);
        prop_assert!((got - oracle).abs() <= 0.01 * oracle, "{got} vs {oracle}");
    }
}

#[test]
fn phi0_at_one_is_one() {
    for rule in [RadialRule::Power { gamma: 0.4 }, RadialRule::LogPower { gamma: 0.1, beta: 1.0 }, oscillating(0.5, 0.2, 1.0)]
    {
        assert_eq!(phi0(&rule, 1.0, 1.0).unwrap(), 1.0);
    }
}

#[test]
fn phi0_of_a_power_is_the_power() {
    let rule = RadialRule::Power { gamma: -0.35 };
    for x in [1e-3, 0.2, 7.0] {
        assert!((phi0(&rule, x, 1.0).unwrap() - x.powf(-0.35)).abs() < 1e-14 * x.powf(-0.35));
    }
}

#[test]
fn power_indices_are_the_exponent() {
    for gamma in [-0.5, 0.0, 0.3, 0.9] {
        let idx = mo_indices(&RadialRule::Power { gamma }, 1.0).unwrap();
        assert!((idx.alpha - gamma).abs() < 1e-3 && (idx.beta - gamma).abs() < 1e-3, "{gamma}: {idx:?}");
    }
}

#[test]
fn oscillating_indices_follow_the_theta_max_formula() {
    // the θ-max factor lies in [1, e^{2A}], so both log-log limits equal γ
    let idx = mo_indices(&oscillating(0.5, 0.2, 1.0), 1.0).unwrap();
    assert!((idx.alpha - 0.5).abs() < 0.02 && (idx.beta - 0.5).abs() < 0.02, "{idx:?}");
    assert!(idx.alpha <= idx.beta);
}

#[test]
fn indices_scale_with_powers_of_the_factor() {
    let rule = oscillating(0.5, 0.2, 1.0);
    let base = mo_indices(&rule, 1.0).unwrap();
    for eps in [-0.1, 0.1] {
        let scaled = mo_indices(&rule.powered(1.0 + eps), 1.0).unwrap();
        assert!((scaled.alpha - (1.0 + eps) * base.alpha).abs() < 1e-3, "{eps}: {scaled:?}");
        assert!((scaled.beta - (1.0 + eps) * base.beta).abs() < 1e-3, "{eps}: {scaled:?}");
    }
}

#[test]
fn indices_add_over_factors_at_one_anchor() {
    let power = RadialRule::Power { gamma: 0.2 };
    let osc = oscillating(0.3, 0.15, 1.5);
    let a = mo_indices(&power, 1.0).unwrap();
    let b = mo_indices(&osc, 1.0).unwrap();
    let both = mo_indices(&RadialRule::Product(vec![power, osc]), 1.0).unwrap();
    assert!((both.alpha - (a.alpha + b.alpha)).abs() < 0.02, "{both:?}");
    assert!((both.beta - (a.beta + b.beta)).abs() < 0.02, "{both:?}");
}

#[test]
fn almost_increasing_constants() {
    let id = RadialRule::Power { gamma: 1.0 };
    assert!((almost_increasing_constant_on(&id, 256, 1e-6, 1.0).unwrap() - 1.0).abs() < 1e-12);

    // brute-force pair maximum on a shared grid as the oracle
    let osc = oscillating(0.5, 0.8, 1.0);
    let brute = |n: usize| {
        let xs: Vec<f64> = (0..n).map(|k| (1e-6f64).ln() * (1.0 - k as f64 / (n - 1) as f64)).collect();
        let mut worst: f64 = 1.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((osc.ln_eval_log(xs[i]) - osc.ln_eval_log(xs[j])).exp());
            }
        }
        worst
    };
    let coarse = almost_increasing_constant_on(&osc, 512, 1e-6, 1.0).unwrap();
    let fine = almost_increasing_constant_on(&osc, 1024, 1e-6, 1.0).unwrap();
    assert!((coarse - brute(512)).abs() < 1e-12 * coarse);
    assert!(coarse > 1.0 && (fine - coarse).abs() / coarse < 0.01, "{coarse} {fine}");

    let inv = RadialRule::Power { gamma: -1.0 };
    let a = almost_increasing_constant_on(&inv, 256, 1e-6, 1.0).unwrap();
    let b = almost_increasing_constant_on(&inv, 256, 0.5e-6, 1.0).unwrap();
    assert!(b >= 2.0 * a * (1.0 - 1e-9), "{a} {b}");
}

#[test]
fn weight_evaluation_examples() {
    let flat = CompositeWeight::single(c(0.0, 0.0), RadialRule::Power { gamma: 0.0 });
    assert_eq!(flat.evaluate(c(0.3, 0.0)).unwrap(), 1.0);
    let khv = CompositeWeight::khvedelidze(&[(c(0.0, 0.0), 0.25)]).unwrap();
    assert!((khv.evaluate(c(4.0, 0.0)).unwrap() - 2f64.sqrt()).abs() < 1e-14);
    let pair = CompositeWeight::khvedelidze(&[(c(-1.0, 0.0), 0.25), (c(1.0, 0.0), -0.25)]).unwrap();
    assert!((pair.evaluate(c(0.0, 0.5)).unwrap() - 1.0).abs() < 1e-15);
    let repeated = vec![
        WeightFactor { anchor: c(0.0, 0.0), rule: RadialRule::Power { gamma: 0.1 } },
        WeightFactor { anchor: c(0.0, 0.0), rule: RadialRule::Power { gamma: 0.2 } },
    ];
    assert!(CompositeWeight::new(repeated).is_err());
}
