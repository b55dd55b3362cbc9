use proptest::prelude::*;

use selfgrav::hermite::p_poly;
use selfgrav::quadrature::QuadratureConfig;
use selfgrav::spectrum::{adjacent_g, g_coefficient};

fn g(n1: u32, n2: u32, alpha: f64) -> f64 {
    g_coefficient(n1, n2, alpha, &QuadratureConfig::default())
        .unwrap()
        .g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn adjacent_lines_ordered_in_intermediate_band(alpha in 2.0f64..8.0, n in 0u32..11) {
        prop_assert!(g(n, n + 1, alpha) > g(n + 1, n + 2, alpha));
    }

    #[test]
    fn adjacent_g_bounded(alpha in (-1.0f64..2.0).prop_map(|e| 10f64.powf(e)), n in 0u32..12) {
        let v = g(n, n + 1, alpha);
        prop_assert!(v > 0.0 && v < 1.2, "g({n},{}) at {alpha} = {v}", n + 1);
    }

    #[test]
    fn g_is_additive(alpha in 0.5f64..30.0, n1 in 0u32..5, d1 in 1u32..4, d2 in 1u32..4) {
        let n2 = n1 + d1;
        let n3 = n2 + d2;
        let lhs = g(n1, n3, alpha);
        let rhs = g(n1, n2, alpha) + g(n2, n3, alpha);
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));
    }
}

#[test]
fn narrow_convergence_is_monotone() {
    for n in 0..3 {
        let gaps: Vec<f64> = [20.0, 35.0, 50.0]
            .iter()
            .map(|&a| (g(n, n + 1, a) - 1.0).abs())
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "n={n}: {gaps:?}");
    }
}

// Small α: the kernel's 1/(2ζ) tail between ζ ~ 1 and ζ ~ 1/α adds
// (3/8)(P_n(0) − P_{n+1}(0))·α³ln(1/α) on top of the cubic term, so it is
// g/α³ minus that logarithm that settles to a constant.
#[test]
fn wide_limit_is_cubic_with_log_correction() {
    for n in 0..4 {
        let log_coeff = 0.375 * (p_poly(n).eval(0.0) - p_poly(n + 1).eval(0.0));
        let reduced = |a: f64| g(n, n + 1, a) / a.powi(3) - log_coeff * (1.0 / a).ln();
        let ratio = reduced(0.1) / reduced(0.05);
        assert!((ratio - 1.0).abs() < 0.01, "n={n}: ratio {ratio}");
    }
}

#[test]
fn multi_level_transition_tends_to_level_difference() {
    let v = g(0, 3, 80.0);
    assert!((v - 3.0).abs() < 0.1, "{v}");
}

#[test]
fn adjacent_g_matches_pairwise() {
    let cfg = QuadratureConfig::default();
    let all = adjacent_g(5, 4.0, &cfg).unwrap();
    assert_eq!(all.len(), 5);
    for (n, c) in all.iter().enumerate() {
        let n = n as u32;
        assert!((c.g - g(n, n + 1, 4.0)).abs() < 1e-12);
    }
}
