//! Shows the finite-size two-point function approaching its continuum limit
//! as the system grows and the cutoff and damping shrink together.

use fermion_phonon::bogoliubov::solve_closed_form;
use fermion_phonon::correlators::{two_point, CorrelatorSpec};
use fermion_phonon::model::{momentum_grid, Chirality, ModelParams};
use fermion_phonon::vertex::{renormalized_finite_correlator, FiniteOptions};

fn main() -> Result<(), fermion_phonon::Error> {
    let (x, t, ell) = (1.0, 0.2, 1.0);
    let continuum = solve_closed_form(&ModelParams::new(1.0, 0.3, 1.0, 0.2, 0.01, 1000.0, None))?;
    let exact = two_point(Chirality::Plus, x, t, &continuum, ell, 1e-12);
    println!("continuum value: {exact:.6}");
    println!("{:>4} {:>8} {:>8} {:>8} {:>26} {:>10}", "s", "L", "a", "eps", "finite value", "rel. err");
    for s in [1.0, 2.0, 4.0, 8.0, 16.0] {
        let (l, a, eps) = (1000.0 * s, 0.01 / s, 0.1 / s);
        let sol = solve_closed_form(&ModelParams::new(1.0, 0.3, 1.0, 0.2, a, l, None))?;
        let grid = momentum_grid(l, 1, a)?;
        let spec = CorrelatorSpec::two_point(Chirality::Plus, x, t, ell, eps)?;
        let value = renormalized_finite_correlator(&spec, &sol, &grid, &FiniteOptions::default())?.value;
        let err = (value - exact).norm() / exact.norm();
        println!("{s:>4} {l:>8} {a:>8.5} {eps:>8.5} {:>26} {err:>10.2e}", format!("{value:.6}"));
    }
    Ok(())
}
