//! Vertex-operator calculus: coefficients, contractions, normal ordering and
//! finite-size correlators.

use std::f64::consts::PI;

use fermion_phonon::bogoliubov::{solve_closed_form, BogoliubovSolution, Flavor};
use fermion_phonon::correlators::{
    free_finite_l, free_two_point_momentum_sum, klein_sign, CorrelatorSpec, InsertionPoint,
};
use fermion_phonon::model::{momentum_grid, Chirality, ModelParams, MomentumGrid};
use fermion_phonon::numeric::EULER_GAMMA;
use fermion_phonon::vertex::{
    field_vertex, finite_correlator, klein_word_sign, normal_order_product, pair_contraction,
    pair_contraction_by_modes, pair_contraction_detailed, vacuum_expectation, z_renorm, Channel, FiniteOptions,
};
use fermion_phonon::{Error, Exec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PLUS: Chirality = Chirality::Plus;
const MINUS: Chirality = Chirality::Minus;

fn channel_index(r: Chirality, x: Flavor) -> usize {
    Channel::ALL.iter().position(|c| c.r == r && c.x == x).unwrap()
}

fn setup(lambda: f64, g: f64, a: f64, l: f64) -> (BogoliubovSolution, MomentumGrid) {
    let p = ModelParams::new(1.0, 0.3, lambda, g, a, l, None);
    let sol = solve_closed_form(&p).unwrap();
    let grid = momentum_grid(l, 2, a).unwrap();
    (sol, grid)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn free_vertex_coefficients() {
    let (sol, grid) = setup(0.0, 0.0, 0.5, 20.0);
    let (x, eps) = (1.3, 0.2);
    for r in Chirality::BOTH {
        for q in [-1, 1] {
            let v = field_vertex(r, q, x, 0.0, eps, &sol, &grid).unwrap();
            assert_eq!(v.winding[r.index()], q * r.sign());
            assert_eq!(v.winding[r.flip().index()], 0);
            for m in [-7i64, -1, 1, 3, 40] {
                let p = 2.0 * PI * m as f64 / v.l;
                let expected = (q * r.sign()) as f64 * Complex64::new(-eps * p.abs() / 2.0, -p * x).exp()
                    / Complex64::new(0.0, p);
                let got = v.alpha(channel_index(r, Flavor::F), m);
                assert!((got - expected).norm() < 1e-14 * expected.norm());
                for (s, f) in [(r, Flavor::P), (r.flip(), Flavor::F), (r.flip(), Flavor::P)] {
                    assert_eq!(v.alpha(channel_index(s, f), m), Complex64::new(0.0, 0.0));
                }
            }
        }
    }
}

#[test]
fn modes_above_the_cutoff_are_free() {
    let (sol, grid) = setup(1.0, 0.2, 0.5, 20.0);
    let v = field_vertex(PLUS, 1, 0.4, 0.7, 0.1, &sol, &grid).unwrap();
    let above = v.n_a as i64 + 1;
    for m in [above, above + 5, -above] {
        assert!(v.alpha(channel_index(PLUS, Flavor::F), m).norm() > 0.0);
        assert_eq!(v.alpha(channel_index(PLUS, Flavor::P), m), Complex64::new(0.0, 0.0));
        assert_eq!(v.alpha(channel_index(MINUS, Flavor::F), m), Complex64::new(0.0, 0.0));
        assert_eq!(v.alpha(channel_index(MINUS, Flavor::P), m), Complex64::new(0.0, 0.0));
    }
    let below = v.n_a as i64;
    for index in 0..4 {
        assert!(v.alpha(index, below).norm() > 0.0, "channel {index} is mixed below the cutoff");
    }
}

#[test]
fn time_dependence_is_a_pure_phase() {
    let (sol, grid) = setup(1.0, 0.2, 0.5, 20.0);
    let t = 0.9;
    let v0 = field_vertex(MINUS, -1, 0.4, 0.0, 0.1, &sol, &grid).unwrap();
    let vt = field_vertex(MINUS, -1, 0.4, t, 0.1, &sol, &grid).unwrap();
    for (index, channel) in Channel::ALL.iter().enumerate() {
        for m in [1i64, -2, 3, 50] {
            let p = 2.0 * PI * m as f64 / v0.l;
            let speed = if (m.unsigned_abs()) <= v0.n_a {
                sol.vtilde(channel.x)
            } else {
                sol.bare_velocity(channel.x)
            };
            let a0 = v0.alpha(index, m);
            if a0.norm() == 0.0 {
                continue;
            }
            let ratio = vt.alpha(index, m) / a0;
            let expected = Complex64::new(0.0, channel.r.sign() as f64 * p * speed * t).exp();
            assert!((ratio - expected).norm() < 1e-12, "channel {channel:?}, m = {m}");
        }
    }
}

#[test]
fn free_pair_contraction_closed_form() {
    let (sol, grid) = setup(0.0, 0.0, 0.5, 30.0);
    let l = 30.0;
    let eps = 0.15;
    for r in Chirality::BOTH {
        for (q1, q2) in [(-1, 1), (1, -1), (1, 1), (-1, -1)] {
            let (x1, x2) = (2.1, -0.7);
            let v1 = field_vertex(r, q1, x1, 0.0, eps, &sol, &grid).unwrap();
            let v2 = field_vertex(r, q2, x2, 0.0, eps, &sol, &grid).unwrap();
            let arg = Complex64::new(r.sign() as f64 * (x1 - x2), eps) * (PI / l);
            let kernel = Complex64::new(0.0, (PI * eps / l).exp()) / (2.0 * arg.sin());
            let expected = kernel.powi(-q1 * q2);
            let got = pair_contraction(&v1, &v2);
            assert!(rel(got, expected) < 1e-12, "r = {r}, q = ({q1}, {q2}): {got} vs {expected}");
        }
    }
}

#[test]
fn pair_contraction_matches_mode_sum() {
    let (sol, grid) = setup(1.0, 0.2, 0.5, 20.0);
    let eps = [0.7, 0.4, 0.4];
    let vs = [
        field_vertex(PLUS, -1, 1.0, 0.3, eps[0], &sol, &grid).unwrap(),
        field_vertex(MINUS, 1, -2.0, -0.1, eps[1], &sol, &grid).unwrap(),
        field_vertex(PLUS, 1, 0.5, 0.2, eps[2], &sol, &grid).unwrap(),
    ];
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            let c = pair_contraction_detailed(&vs[i], &vs[j], &FiniteOptions::default());
            let m = pair_contraction_by_modes(&vs[i], &vs[j], c.n_max);
            assert!(rel(c.value(), m) < 1e-11, "pair ({i}, {j})");
        }
    }
}

#[test]
fn coincident_inverse_fields_give_the_vacuum_normalization() {
    let (sol, grid) = setup(0.0, 0.0, 0.5, 20.0);
    let eps = 0.3;
    let v1 = field_vertex(PLUS, -1, 0.8, 0.0, eps, &sol, &grid).unwrap();
    let v2 = field_vertex(PLUS, 1, 0.8, 0.0, eps, &sol, &grid).unwrap();
    let product = normal_order_product(&[v1, v2], &FiniteOptions::default()).unwrap();
    let expected = 1.0 / (1.0 - (-2.0 * PI * eps / 20.0).exp());
    // Direct summation of -log(1 - e^{-d}).
    let d = 2.0 * PI * eps / 20.0;
    let series: f64 = (1..200_000).map(|n| (-(n as f64) * d).exp() / n as f64).sum();
    assert!((series.exp() - expected).abs() < 1e-10 * expected);
    assert!(rel(product.contraction, Complex64::new(expected, 0.0)) < 1e-12);
    let value = vacuum_expectation(&product);
    assert!(rel(value, Complex64::new(expected / 20.0, 0.0)) < 1e-12);
}

#[test]
fn normal_ordering_basics() {
    let (sol, grid) = setup(1.0, 0.2, 0.5, 20.0);
    let opts = FiniteOptions::default();
    let v = field_vertex(PLUS, 1, 0.3, 0.0, 0.2, &sol, &grid).unwrap();
    let single = normal_order_product(std::slice::from_ref(&v), &opts).unwrap();
    assert_eq!(single.contraction, Complex64::new(1.0, 0.0));
    assert_eq!(vacuum_expectation(&single), Complex64::new(0.0, 0.0));
    assert!(matches!(normal_order_product(&[], &opts), Err(Error::BadArgument(_))));

    let vs = [
        field_vertex(PLUS, 1, 0.3, 0.1, 0.2, &sol, &grid).unwrap(),
        field_vertex(MINUS, -1, -1.1, 0.4, 0.2, &sol, &grid).unwrap(),
        field_vertex(PLUS, -1, 2.0, -0.3, 0.2, &sol, &grid).unwrap(),
    ];
    let product = normal_order_product(&vs, &opts).unwrap();
    let forward = pair_contraction(&vs[0], &vs[1]) * pair_contraction(&vs[0], &vs[2]) * pair_contraction(&vs[1], &vs[2]);
    let backward = pair_contraction(&vs[1], &vs[2]) * pair_contraction(&vs[0], &vs[2]) * pair_contraction(&vs[0], &vs[1]);
    assert!(rel(product.contraction, forward) < 1e-12);
    assert!(rel(product.contraction, backward) < 1e-12);
    assert_eq!(product.klein_word, vec![(PLUS, 1), (MINUS, -1), (PLUS, -1)]);
    assert_eq!(vacuum_expectation(&product), Complex64::new(0.0, 0.0));
}

#[test]
fn free_two_point_matches_closed_form_and_momentum_oracle() {
    let l = 2.0 * PI * 10.0;
    let (sol, grid) = setup(0.0, 0.0, 0.05, l);
    let eps = 0.05;
    for r in Chirality::BOTH {
        let spec = CorrelatorSpec::new(
            vec![InsertionPoint::new(r, -1, 1.3, 0.0), InsertionPoint::new(r, 1, -0.4, 0.0)],
            1.0,
            eps,
        )
        .unwrap();
        let fv = finite_correlator(&spec, &sol, &grid, &FiniteOptions::default()).unwrap();
        // The finite-size fields carry the damping on both sides, which shifts the
        // kernel by e^{pi eps / L} relative to the closed form.
        let closed = free_finite_l(&spec, l).unwrap() * (PI * eps / l).exp();
        assert!((fv.value - closed).norm() <= fv.tail_bound + fv.rounding_bound + 1e-14);
        let oracle = free_two_point_momentum_sum(r, 1.7, eps, l).unwrap() * (PI * eps / l).exp();
        assert!((fv.value - oracle).norm() < 1e-12);
    }
}

#[test]
fn exchange_of_same_chirality_fields_is_antisymmetric() {
    let l = 50.0;
    let (sol, grid) = setup(0.0, 0.0, 0.5, l);
    let opts = FiniteOptions::default();
    let mut last = f64::INFINITY;
    for eps in [1e-2, 1e-3, 1e-4] {
        let a = field_vertex(PLUS, -1, 1.0, 0.0, eps, &sol, &grid).unwrap();
        let b = field_vertex(PLUS, 1, -0.5, 0.0, eps, &sol, &grid).unwrap();
        let ab = vacuum_expectation(&normal_order_product(&[a.clone(), b.clone()], &opts).unwrap());
        let ba = vacuum_expectation(&normal_order_product(&[b, a], &opts).unwrap());
        // The ratio is sin(pi (u + i eps) / L) / sin(pi (-u + i eps) / L).
        let u = 1.5;
        let s = |v: f64| (Complex64::new(v, eps) * (PI / l)).sin();
        assert!(rel(ba / ab, s(u) / s(-u)) < 1e-10);
        let gap = (ba / ab + 1.0).norm();
        assert!(gap < last);
        last = gap;
    }
    assert!(last < 1e-3);
}

#[test]
fn klein_signs_agree_on_random_words() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut nonzero = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(0..=8);
        let word: Vec<(Chirality, i32)> = (0..n)
            .map(|_| {
                let r = if rng.gen_bool(0.5) { PLUS } else { MINUS };
                (r, if rng.gen_bool(0.5) { 1 } else { -1 })
            })
            .collect();
        let a = klein_word_sign(&word);
        assert_eq!(a, klein_sign(&word), "{word:?}");
        nonzero += (a != 0) as usize;
    }
    assert!(nonzero > 50);
}

#[test]
fn z_renorm_examples() {
    let (free, _) = setup(0.0, 0.0, 0.5, 20.0);
    assert_eq!(z_renorm(&free, 0.1).unwrap().z, 1.0);
    let p = ModelParams::new(1.0, 0.3, 1.0, 0.2, PI / 2.0, 2.0 * PI, None);
    let sol = solve_closed_form(&p).unwrap();
    let z = z_renorm(&sol, 0.0).unwrap();
    assert!((z.z - (-sol.sigma_sq() * 1.5).exp()).abs() < 1e-15);
    let asymptote = (EULER_GAMMA.exp() * 2.0 * PI / PI).powf(-sol.sigma_sq());
    assert!((z.asymptote - asymptote).abs() < 1e-15);
    assert!(matches!(z_renorm(&sol, -1.0), Err(Error::BadRegulator(_))));

    let mut last = f64::INFINITY;
    for ratio in [1e2, 1e3, 1e4] {
        let p = ModelParams::new(1.0, 0.3, 1.0, 0.2, 1.0, ratio, None);
        let sol = solve_closed_form(&p).unwrap();
        let z = z_renorm(&sol, 0.0).unwrap();
        let gap = (z.z / z.asymptote - 1.0).abs();
        assert!(gap < last && gap < 5.0 / ratio, "L/a = {ratio}: gap {gap}");
        last = gap;
    }
}

#[test]
fn execution_modes_agree_bit_for_bit() {
    let (sol, grid) = setup(1.0, 0.2, 0.05, 200.0);
    let spec = CorrelatorSpec::new(
        vec![
            InsertionPoint::new(PLUS, -1, 1.0, 0.3),
            InsertionPoint::new(MINUS, 1, -2.0, 0.1),
            InsertionPoint::new(MINUS, -1, 0.5, -0.2),
            InsertionPoint::new(PLUS, 1, 0.0, 0.0),
        ],
        1.0,
        0.01,
    )
    .unwrap();
    let seq = FiniteOptions {
        exec: Exec::Sequential,
        ..FiniteOptions::default()
    };
    let par = FiniteOptions {
        exec: Exec::default(),
        ..FiniteOptions::default()
    };
    let a = finite_correlator(&spec, &sol, &grid, &seq).unwrap();
    let b = finite_correlator(&spec, &sol, &grid, &par).unwrap();
    assert_eq!(a, b);
    assert!(a.value.norm() > 0.0);
}

#[test]
fn finite_correlator_errors_and_selection() {
    let (sol, grid) = setup(1.0, 0.2, 0.5, 20.0);
    let opts = FiniteOptions::default();
    let one = CorrelatorSpec::new(vec![InsertionPoint::new(PLUS, 1, 0.0, 0.0)], 1.0, 0.1).unwrap();
    assert_eq!(finite_correlator(&one, &sol, &grid, &opts).unwrap().value, Complex64::new(0.0, 0.0));
    let spec = CorrelatorSpec::two_point(PLUS, 0.5, 0.1, 1.0, 1e-4).unwrap();
    let capped = FiniteOptions {
        max_modes: 100,
        ..opts
    };
    assert!(matches!(finite_correlator(&spec, &sol, &grid, &capped), Err(Error::TailTooLarge { .. })));
    assert!(matches!(field_vertex(PLUS, 1, 0.0, 0.0, 0.0, &sol, &grid), Err(Error::BadRegulator(_))));
    assert!(matches!(field_vertex(PLUS, 1, 11.0, 0.0, 0.1, &sol, &grid), Err(Error::BadGeometry(_))));
    let other = momentum_grid(40.0, 2, 0.5).unwrap();
    assert!(matches!(field_vertex(PLUS, 1, 0.0, 0.0, 0.1, &sol, &other), Err(Error::BadGeometry(_))));
}
