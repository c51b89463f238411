//! Parameter validation, derived couplings and momentum grids.

use std::f64::consts::PI;

use fermion_phonon::bogoliubov::{diagonalize_numeric, Flavor};
use fermion_phonon::model::{derived_couplings, momentum_grid, validate_params, ModelParams};
use fermion_phonon::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(lambda: f64, g: f64) -> ModelParams {
    ModelParams::new(1.0, 0.3, lambda, g, 0.01, 100.0, Some(0.1))
}

#[test]
fn free_parameters_are_accepted() {
    let p = params(0.0, 0.0);
    assert_eq!(validate_params(p).unwrap(), p);
}

#[test]
fn stability_boundaries_are_rejected() {
    assert!(matches!(validate_params(params(2.0 * PI, 0.0)), Err(Error::UnstableCouplings(_))));
    // 2 (g / v_p)^2 = 2 pi v_f.
    let g = 0.3 * PI.sqrt();
    match validate_params(params(0.0, g)) {
        Err(Error::UnstableCouplings(msg)) => assert!(msg.contains("2 (g / v_p)^2 < 2 pi v_f + lambda")),
        other => panic!("expected UnstableCouplings, got {other:?}"),
    }
    match validate_params(params(2.0 * PI, 0.0)) {
        Err(Error::UnstableCouplings(msg)) => assert!(msg.contains("lambda < 2 pi v_f")),
        other => panic!("expected UnstableCouplings, got {other:?}"),
    }
}

#[test]
fn geometry_is_checked() {
    let bad = [
        ModelParams::new(1.0, 1.2, 0.0, 0.0, 0.01, 100.0, None),
        ModelParams::new(-1.0, 0.3, 0.0, 0.0, 0.01, 100.0, None),
        ModelParams::new(1.0, 0.3, 0.0, 0.0, 200.0, 100.0, None),
        ModelParams::new(1.0, 0.3, 0.0, 0.0, 0.01, 100.0, Some(0.0)),
        ModelParams::new(1.0, 0.3, f64::NAN, 0.0, 0.01, 100.0, None),
    ];
    for p in bad {
        assert!(matches!(validate_params(p), Err(Error::BadGeometry(_))), "{p:?}");
    }
}

#[test]
fn default_zero_mode_frequency_is_one_spacing() {
    let p = ModelParams::new(1.0, 0.3, 0.0, 0.0, 0.01, 100.0, None);
    assert!((p.omega0 - 2.0 * PI * 0.3 / 100.0).abs() < 1e-15);
}

#[test]
fn derived_couplings_examples() {
    let c = derived_couplings(&params(0.0, 0.0));
    assert_eq!((c.gamma1, c.gamma2), (0.0, 0.0));
    assert!((c.w - (1.0 - 0.09)).abs() < 1e-15);
    let c = derived_couplings(&params(PI, 0.0));
    assert!((c.gamma1 - 0.5).abs() < 1e-15);
}

#[test]
fn w_matches_the_eigenvalue_gap() {
    let p = params(1.0, 0.2);
    let c = derived_couplings(&p);
    let mom = 2.0 * PI / p.l;
    let num = diagonalize_numeric(&p, mom).unwrap();
    let gap = (num.omega_f * num.omega_f - num.omega_p * num.omega_p) / (mom * mom);
    assert!((gap - c.w).abs() < 1e-12, "gap {gap} vs W {}", c.w);
    assert!(num.velocity(Flavor::F) > num.velocity(Flavor::P));
}

#[test]
fn w_triangle_bound_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let v_p = rng.gen_range(0.05..0.95);
        let g1: f64 = rng.gen_range(-0.95..0.95);
        let g2 = rng.gen_range(-0.99..0.99) * (1.0 + g1).sqrt();
        let p = ModelParams::new(1.0, v_p, 2.0 * PI * g1, g2 * v_p * PI.sqrt(), 0.1, 50.0, None);
        let p = validate_params(p).unwrap();
        let c = derived_couplings(&p);
        assert!(c.gamma1 < 1.0 && c.gamma2 * c.gamma2 < 1.0 + c.gamma1);
        let d = (1.0 - c.gamma1 * c.gamma1) - v_p * v_p;
        assert!(c.w >= d.abs() - 1e-12);
    }
}

#[test]
fn unit_grid() {
    let g = momentum_grid(2.0 * PI, 2, PI / 2.0).unwrap();
    assert_eq!(g.fermion_momenta(), vec![-1.5, -0.5, 0.5, 1.5]);
    assert_eq!(g.boson_momenta(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    assert_eq!(g.n_a, 2);
    assert_eq!(momentum_grid(2.0 * PI, 1, PI).unwrap().n_a, 1);
    assert_eq!(momentum_grid(10.0, 3, 0.5).unwrap().n_a, 10);
}

#[test]
fn grid_values_are_exact_multiples() {
    let l = 37.5;
    let g = momentum_grid(l, 4, 0.3).unwrap();
    for (k2, k) in g.fermion_half_units().iter().zip(g.fermion_momenta()) {
        assert_eq!(k2.rem_euclid(2), 1);
        let n = k * l / (2.0 * PI) - 0.5;
        assert!((n - n.round()).abs() < 1e-12);
    }
    for p in g.boson_momenta() {
        let m = p * l / (2.0 * PI);
        assert!((m - m.round()).abs() < 1e-12);
    }
}

#[test]
fn grid_rejects_bad_geometry() {
    assert!(momentum_grid(10.0, 0, 0.5).is_err());
    assert!(momentum_grid(10.0, 2, 6.0).is_err());
    assert!(momentum_grid(-1.0, 2, 0.1).is_err());
}
