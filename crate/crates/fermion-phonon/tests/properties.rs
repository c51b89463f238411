//! Randomized properties checked with proptest.

use std::f64::consts::PI;

use fermion_phonon::bogoliubov::{solve_closed_form, BogoliubovSolution, Flavor};
use fermion_phonon::correlators::{klein_sign, npoint_continuum, pair_exponent, sum_rules, two_point, CorrelatorSpec, InsertionPoint};
use fermion_phonon::model::{Chirality, ModelParams};
use fermion_phonon::vertex::klein_word_sign;
use num_complex::Complex64;
use proptest::prelude::*;

/// Stable parameter points in dimensionless couplings, away from the
/// degenerate-branch boundary.
fn stable_params() -> impl Strategy<Value = ModelParams> {
    (0.5..2.0f64, 0.02..0.98f64, -0.95..0.95f64, -0.95..0.95f64)
        .prop_map(|(v_f, ratio, g1, g2_unit)| {
            let v_p = v_f * ratio;
            let g2 = g2_unit * (1.0 + g1).sqrt();
            ModelParams::new(v_f, v_p, 2.0 * PI * v_f * g1, g2 * v_p * (PI * v_f).sqrt(), 0.1, 100.0, None)
        })
        .prop_filter("nondegenerate branches", |p| {
            let g1 = p.lambda / (2.0 * PI * p.v_f);
            let g2 = p.g / (p.v_p * (PI * p.v_f).sqrt());
            let d = p.v_f * p.v_f * (1.0 - g1 * g1) - p.v_p * p.v_p;
            let w = (d * d + 4.0 * p.v_f * p.v_f * p.v_p * p.v_p * g2 * g2 * (1.0 - g1)).sqrt();
            w > 1e-6 * p.v_f * p.v_f
        })
}

fn solution() -> impl Strategy<Value = BogoliubovSolution> {
    stable_params().prop_map(|p| solve_closed_form(&p).expect("stable point"))
}

fn chirality() -> impl Strategy<Value = Chirality> {
    prop_oneof![Just(Chirality::Plus), Just(Chirality::Minus)]
}

fn word(max_len: usize) -> impl Strategy<Value = Vec<(Chirality, i32)>> {
    prop::collection::vec((chirality(), prop_oneof![Just(1), Just(-1)]), 0..=max_len)
}

/// Words with as many creators as annihilators in each chirality, in random order.
fn neutral_word() -> impl Strategy<Value = Vec<(Chirality, i32)>> {
    (0..=3usize, 0..=3usize)
        .prop_flat_map(|(plus, minus)| {
            let mut w = Vec::new();
            for (r, count) in [(Chirality::Plus, plus), (Chirality::Minus, minus)] {
                for _ in 0..count {
                    w.push((r, 1));
                    w.push((r, -1));
                }
            }
            Just(w).prop_shuffle()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn two_point_is_hermitian(
        sol in solution(),
        r in chirality(),
        x in -5.0..5.0f64,
        t in -5.0..5.0f64,
        log_reg in -8.0..-1.0f64,
        ell in 0.2..3.0f64,
    ) {
        let reg = 10f64.powf(log_reg);
        let a = two_point(r, x, t, &sol, ell, reg);
        let b = two_point(r, -x, -t, &sol, ell, reg).conj();
        prop_assert!((a - b).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn closed_form_identities(sol in solution()) {
        prop_assert!((sol.norm_identity() - 1.0).abs() < 1e-12);
        let v_f = sol.params.v_f;
        prop_assert!((sol.velocity_sum() - v_f).abs() < 1e-12 * v_f);
        for x in Flavor::BOTH {
            prop_assert!(sol.vtilde(x) > 0.0);
        }
    }

    #[test]
    fn exponent_sum_rule(sol in solution(), w in neutral_word()) {
        prop_assert!(klein_sign(&w) != 0);
        let mut total = 0.0;
        for a in 0..w.len() {
            for b in a + 1..w.len() {
                let qq = f64::from(w[a].1 * w[b].1);
                for r in Chirality::BOTH {
                    for x in Flavor::BOTH {
                        total -= qq * pair_exponent(&sol, r, x, w[a].0, w[b].0);
                    }
                }
            }
        }
        let expected = w.len() as f64 / 2.0 * (1.0 + 2.0 * sol.sigma_sq());
        prop_assert!((total - expected).abs() < 1e-12 * expected.max(1.0));
    }

    #[test]
    fn klein_signs_agree(w in word(10)) {
        prop_assert_eq!(klein_word_sign(&w), klein_sign(&w));
        prop_assert_eq!(klein_sign(&w) != 0, sum_rules(&w).is_ok());
    }

    #[test]
    fn charge_neutral_two_point_matches_npoint(
        sol in solution(),
        r in chirality(),
        x in -5.0..5.0f64,
        t in -5.0..5.0f64,
    ) {
        let spec = CorrelatorSpec::two_point(r, x, t, 1.0, 1e-6).unwrap();
        let a = npoint_continuum(&spec, &sol).unwrap();
        let b = two_point(r, x, t, &sol, 1.0, 1e-6);
        prop_assert!((a - b).norm() <= 1e-12 * b.norm());
    }

    #[test]
    fn translation_invariance(
        sol in solution(),
        shift_x in -10.0..10.0f64,
        shift_t in -10.0..10.0f64,
    ) {
        let points = [(Chirality::Plus, -1, 0.3, 0.1), (Chirality::Minus, 1, 1.7, -0.4),
                      (Chirality::Minus, -1, -2.2, 0.6), (Chirality::Plus, 1, 0.9, 1.0)];
        let build = |dx: f64, dt: f64| {
            CorrelatorSpec::new(
                points.iter().map(|&(r, q, x, t)| InsertionPoint::new(r, q, x + dx, t + dt)).collect(),
                1.0,
                1e-6,
            )
            .unwrap()
        };
        let a: Complex64 = npoint_continuum(&build(0.0, 0.0), &sol).unwrap();
        let b: Complex64 = npoint_continuum(&build(shift_x, shift_t), &sol).unwrap();
        prop_assert!((a - b).norm() <= 1e-9 * a.norm());
    }
}
