//! The five subcommands.

use std::f64::consts::PI;

use fermion_phonon::bogoliubov::{solve_closed_form, spectrum, BogoliubovSolution, Flavor};
use fermion_phonon::correlators::{exponents, klein_sign, npoint_continuum, ExponentTable};
use fermion_phonon::fock::{
    build_space_with, degeneracy_counts, identity_residual_with, jacobi_check, reconstruction_check, Failure, Identity,
};
use fermion_phonon::model::{momentum_grid, ModelParams};
use fermion_phonon::vertex::{finite_correlator, renormalized_finite_correlator};
use fermion_phonon::{Error, Exec};
use serde::{Deserialize, Serialize};

use crate::config::{CorrelatorMode, Format, Range, RunConfig};
use crate::output::{csv_table, float, json};
use crate::Command;

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// Everything succeeded.
    Success = 0,
    /// A verification check failed.
    VerificationFailed = 1,
    /// Invalid input, unstable couplings or an I/O failure.
    InvalidInput = 2,
}

impl Status {
    /// Numeric exit code.
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    /// Exit status.
    pub status: Status,
    /// Text for the output file or standard output.
    pub body: String,
    /// Diagnostics for standard error.
    pub messages: Vec<String>,
    /// Destination of `body`; standard output when absent.
    pub path: Option<std::path::PathBuf>,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Self {
            status: Status::Success,
            body,
            messages: Vec::new(),
            path: None,
        }
    }

    /// Failed run caused by invalid input.
    pub fn invalid(message: String) -> Self {
        Self {
            status: Status::InvalidInput,
            body: String::new(),
            messages: vec![format!("error: {message}")],
            path: None,
        }
    }
}

fn from_core(e: Error) -> Outcome {
    Outcome::invalid(e.to_string())
}

fn from_any(e: anyhow::Error) -> Outcome {
    Outcome::invalid(format!("{e:#}"))
}

/// Runs `command` with `cfg`; `format` overrides the configured format.
pub fn dispatch(command: &Command, cfg: &RunConfig, format: Option<Format>) -> Outcome {
    let format = format.or(cfg.output.format);
    let result = match command {
        Command::Solve => cmd_solve(cfg, format.unwrap_or(Format::Json)),
        Command::Verify => cmd_verify(cfg, format.unwrap_or(Format::Json)),
        Command::Spectrum { e_max } => cmd_spectrum(cfg, *e_max, format.unwrap_or(Format::Csv)),
        Command::Correlate { mode, regulator, ell } => {
            let mut cfg = cfg.clone();
            if let Some(m) = mode {
                cfg.correlator.mode = *m;
            }
            if let Some(r) = regulator {
                cfg.correlator.regulator = *r;
            }
            if let Some(l) = ell {
                cfg.correlator.ell = *l;
            }
            cmd_correlate(&cfg, format.unwrap_or(Format::Csv))
        }
        Command::Scan => cmd_scan(cfg, format.unwrap_or(Format::Csv)),
    };
    result.unwrap_or_else(|o| o)
}

/// JSON document of the `solve` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Closed-form solution.
    pub solution: BogoliubovSolution,
    /// Exponents derived from it.
    pub exponents: ExponentTable,
}

/// `solve`: closed-form solution and exponents.
pub fn cmd_solve(cfg: &RunConfig, format: Format) -> Result<Outcome, Outcome> {
    let params = cfg.params().map_err(from_core)?;
    let solution = solve_closed_form(&params).map_err(from_core)?;
    let report = SolveReport {
        exponents: exponents(&solution),
        solution,
    };
    match format {
        Format::Json => Ok(Outcome::ok(json(&report).map_err(from_any)?)),
        Format::Csv => {
            let s = &report.solution;
            let e = &report.exponents;
            let header = [
                "vtilde_f", "vtilde_p", "rho_f", "rho_p", "sigma_f", "sigma_p", "E0", "delta_cdw", "delta_sc",
                "fermion_dimension",
            ];
            let row = [
                s.vtilde_f, s.vtilde_p, s.rho_f, s.rho_p, s.sigma_f, s.sigma_p, s.e0, e.delta_cdw, e.delta_sc,
                e.fermion_dimension,
            ]
            .map(float)
            .to_vec();
            Ok(Outcome::ok(csv_table(&header, &[row]).map_err(from_any)?))
        }
    }
}

/// One entry of the verification report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    /// Check name.
    pub check: String,
    /// Whether it passed.
    pub pass: bool,
    /// Residual; exact rationals are written as strings such as `"0"` or `"1/2"`.
    pub residual: String,
    /// Allowed residual for floating-point checks.
    pub bound: Option<String>,
    /// Human-readable summary.
    pub detail: String,
    /// First offending basis pair, when the check names one.
    pub failure: Option<Failure>,
}

/// Largest truncation accepted by `verify`.
pub const MAX_VERIFY_K: u32 = 5;

/// `verify`: exact identity suite, level counting, Jacobi identity and field
/// reconstruction on the truncated Fock space.
pub fn cmd_verify(cfg: &RunConfig, format: Format) -> Result<Outcome, Outcome> {
    let k = cfg.grid.k;
    if k == 0 || k > MAX_VERIFY_K {
        return Err(Outcome::invalid(format!("verify needs 1 <= K <= {MAX_VERIFY_K}, got K = {k}")));
    }
    let params = cfg.model.params();
    let grid = momentum_grid(params.l, k, params.a).map_err(from_core)?;
    let space = build_space_with(grid, cfg.fock.sign_convention.into()).map_err(from_core)?;
    let exec = Exec::default();
    let window2 = space.interior_window2();
    let mut reports = Vec::new();
    for identity in Identity::ALL {
        let rep = identity_residual_with(&space, identity, None, window2, exec).map_err(from_core)?;
        reports.push(CheckReport {
            check: identity.name().to_string(),
            pass: rep.pass(),
            residual: rep.residual.to_string(),
            bound: None,
            detail: format!(
                "{} instances, {} (instance, ket) pairs checked, {} outside the exact window",
                rep.instances, rep.kets_checked, rep.kets_skipped
            ),
            failure: rep.failure.clone(),
        });
    }

    let e2_max = 2 * k;
    let counts = degeneracy_counts(&space, e2_max);
    let mismatch = counts.iter().find(|(_, (f, b))| f != b);
    reports.push(CheckReport {
        check: "DEGENERACY".into(),
        pass: mismatch.is_none(),
        residual: counts.values().map(|(f, b)| f.abs_diff(*b)).max().unwrap_or(0).to_string(),
        bound: None,
        detail: counts
            .iter()
            .map(|(e, (f, b))| format!("E={e}pi/L: {f} fermion, {b} boson"))
            .collect::<Vec<_>>()
            .join("; "),
        failure: None,
    });

    let jac = jacobi_check(0.5, 60).map_err(from_core)?;
    reports.push(CheckReport {
        check: "JACOBI".into(),
        pass: jac.pass(),
        residual: float(jac.residual),
        bound: Some(float(jac.tail_bound + jac.rounding_bound + 1e-12)),
        detail: format!("z = 0.5, order 60: lhs {}, rhs {}", float(jac.lhs), float(jac.rhs)),
        failure: None,
    });

    let rec = reconstruction_check(&space, window2, exec).map_err(from_core)?;
    reports.push(CheckReport {
        check: "RECONSTRUCTION".into(),
        pass: rec.pass(),
        residual: rec.mismatches.to_string(),
        bound: None,
        detail: format!(
            "{} (ket, r, k) triples compared, {} outside the exact window, {} unexpected leaks",
            rec.pairs_checked, rec.pairs_skipped, rec.unexpected_leaks
        ),
        failure: rec.first_mismatch.map(|(r, k2, ket)| Failure {
            instance: format!("psi_{r}(k = {k2} pi/L)"),
            ket,
            bra: None,
            detail: "reconstructed field differs from the field operator".into(),
        }),
    });

    let all_pass = reports.iter().all(|r| r.pass);
    let body = match format {
        Format::Json => json(&reports).map_err(from_any)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        r.check.clone(),
                        r.pass.to_string(),
                        r.residual.clone(),
                        r.bound.clone().unwrap_or_default(),
                        r.detail.clone(),
                    ]
                })
                .collect();
            csv_table(&["check", "pass", "residual", "bound", "detail"], &rows).map_err(from_any)?
        }
    };
    let mut outcome = Outcome::ok(body);
    if !all_pass {
        outcome.status = Status::VerificationFailed;
        for r in reports.iter().filter(|r| !r.pass) {
            let place = r
                .failure
                .as_ref()
                .map(|f| match f.bra {
                    Some(bra) => format!(" at {} (ket {}, bra {}): {}", f.instance, f.ket, bra, f.detail),
                    None => format!(" at {} (ket {}): {}", f.instance, f.ket, f.detail),
                })
                .unwrap_or_default();
            outcome.messages.push(format!("verification failed: {}{place}", r.check));
        }
    }
    Ok(outcome)
}

fn occupation_label(occ: &[(Flavor, i32, u32)]) -> String {
    occ.iter()
        .map(|(x, m, n)| format!("{x}({m:+})^{n}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// `spectrum`: eigenvalues with excitation energy at most `e_max`.
pub fn cmd_spectrum(cfg: &RunConfig, e_max: f64, format: Format) -> Result<Outcome, Outcome> {
    let params = cfg.params().map_err(from_core)?;
    let solution = solve_closed_form(&params).map_err(from_core)?;
    let grid = momentum_grid(params.l, cfg.grid.k, params.a).map_err(from_core)?;
    let entries = spectrum(&params, &solution, e_max, &grid).map_err(from_core)?;
    let body = match format {
        Format::Json => json(&entries).map_err(from_any)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = entries
                .iter()
                .map(|e| {
                    vec![
                        float(e.energy),
                        float(e.energy - solution.e0),
                        e.degeneracy.to_string(),
                        e.q_plus.to_string(),
                        e.q_minus.to_string(),
                        e.m_p0.to_string(),
                        occupation_label(&e.occupations),
                    ]
                })
                .collect();
            csv_table(
                &["energy", "excitation", "degeneracy", "q_plus", "q_minus", "m_p0", "occupations"],
                &rows,
            )
            .map_err(from_any)?
        }
    };
    Ok(Outcome::ok(body))
}

/// One grid point of the `correlate` output.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorRow {
    /// Position offset of the first insertion.
    pub x: f64,
    /// Time offset of the first insertion.
    pub t: f64,
    /// Real part.
    pub re: f64,
    /// Imaginary part.
    pub im: f64,
    /// Modulus.
    pub abs: f64,
}

/// `correlate`: correlation function over the configured `(x, t)` grid.
pub fn cmd_correlate(cfg: &RunConfig, format: Format) -> Result<Outcome, Outcome> {
    let params = cfg.params().map_err(from_core)?;
    let solution = solve_closed_form(&params).map_err(from_core)?;
    let cor = &cfg.correlator;
    let xs = cor.x.values().map_err(from_any)?;
    let ts = cor.t.values().map_err(from_any)?;
    let points: Vec<(f64, f64)> = ts.iter().flat_map(|&t| xs.iter().map(move |&x| (x, t))).collect();
    // Validate once so a bad spec is reported before any work is done.
    let probe = cor.spec_at(0.0, 0.0).map_err(from_core)?;
    let mut messages = Vec::new();
    if klein_sign(&probe.word()) == 0 {
        messages.push("warning: the insertions violate charge selection; every value is zero".to_string());
    }
    let grid = match cor.mode {
        CorrelatorMode::Finite => Some(momentum_grid(params.l, cfg.grid.k, params.a).map_err(from_core)?),
        CorrelatorMode::Continuum => None,
    };
    let opts = fermion_phonon::vertex::FiniteOptions {
        exec: Exec::Sequential,
        ..cfg.finite_options()
    };
    let values = Exec::default().map(&points, |&(x, t)| -> fermion_phonon::Result<CorrelatorRow> {
        let spec = cor.spec_at(x, t)?;
        let value = match (&grid, cor.mode) {
            (Some(g), CorrelatorMode::Finite) => {
                if cor.renormalize {
                    renormalized_finite_correlator(&spec, &solution, g, &opts)?.value
                } else {
                    finite_correlator(&spec, &solution, g, &opts)?.value
                }
            }
            _ => npoint_continuum(&spec, &solution)?,
        };
        Ok(CorrelatorRow {
            x,
            t,
            re: value.re,
            im: value.im,
            abs: value.norm(),
        })
    });
    let rows: Vec<CorrelatorRow> = values.into_iter().collect::<Result<_, _>>().map_err(from_core)?;
    let body = match format {
        Format::Json => json(&rows).map_err(from_any)?,
        Format::Csv => {
            let table: Vec<Vec<String>> =
                rows.iter().map(|r| [r.x, r.t, r.re, r.im, r.abs].map(float).to_vec()).collect();
            csv_table(&["x", "t", "re", "im", "abs"], &table).map_err(from_any)?
        }
    };
    let mut outcome = Outcome::ok(body);
    outcome.messages = messages;
    Ok(outcome)
}

/// One coupling point of the `scan` output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    /// Fermion-fermion coupling.
    pub lambda: f64,
    /// Fermion-phonon coupling.
    pub g: f64,
    /// `lambda / (2 pi v_f)`.
    pub gamma1: f64,
    /// `g / (v_p sqrt(pi v_f))`.
    pub gamma2: f64,
    /// Renormalized fermion velocity (NaN when unstable).
    pub vtilde_f: f64,
    /// Renormalized phonon velocity (NaN when unstable).
    pub vtilde_p: f64,
    /// CDW exponent (NaN when unstable).
    pub delta_cdw: f64,
    /// SC exponent (NaN when unstable).
    pub delta_sc: f64,
    /// `ok`, or the reason the point has no solution.
    pub status: String,
}

fn axis(physical: Option<Range>, reduced: Option<Range>, scale: f64, default: f64, name: &str) -> anyhow::Result<Vec<f64>> {
    match (physical, reduced) {
        (Some(_), Some(_)) => anyhow::bail!("scan over {name} given both in physical and dimensionless form"),
        (Some(r), None) => r.values(),
        (None, Some(r)) => Ok(r.values()?.into_iter().map(|v| v * scale).collect()),
        (None, None) => Ok(vec![default]),
    }
}

fn scan_point(base: &ModelParams, lambda: f64, g: f64) -> ScanRow {
    let params = base.with_couplings(lambda, g);
    let mut row = ScanRow {
        lambda,
        g,
        gamma1: params.gamma1(),
        gamma2: params.gamma2(),
        vtilde_f: f64::NAN,
        vtilde_p: f64::NAN,
        delta_cdw: f64::NAN,
        delta_sc: f64::NAN,
        status: "ok".into(),
    };
    match solve_closed_form(&params) {
        Ok(sol) => {
            let e = exponents(&sol);
            row.vtilde_f = sol.vtilde_f;
            row.vtilde_p = sol.vtilde_p;
            row.delta_cdw = e.delta_cdw;
            row.delta_sc = e.delta_sc;
        }
        Err(err) => row.status = err.to_string(),
    }
    row
}

/// `scan`: one row per coupling point; unstable points are flagged, not fatal.
pub fn cmd_scan(cfg: &RunConfig, format: Format) -> Result<Outcome, Outcome> {
    let base = cfg.model.params();
    let lambdas = axis(cfg.scan.lambda, cfg.scan.gamma1, 2.0 * PI * base.v_f, base.lambda, "lambda").map_err(from_any)?;
    let gs = axis(cfg.scan.g, cfg.scan.gamma2, base.v_p * (PI * base.v_f).sqrt(), base.g, "g").map_err(from_any)?;
    let points: Vec<(f64, f64)> = lambdas.iter().flat_map(|&l| gs.iter().map(move |&g| (l, g))).collect();
    let rows = Exec::default().map(&points, |&(l, g)| scan_point(&base, l, g));
    let body = match format {
        Format::Json => json(&rows).map_err(from_any)?,
        Format::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut v = [r.lambda, r.g, r.gamma1, r.gamma2, r.vtilde_f, r.vtilde_p, r.delta_cdw, r.delta_sc]
                        .map(float)
                        .to_vec();
                    v.push(r.status.clone());
                    v
                })
                .collect();
            csv_table(
                &["lambda", "g", "gamma1", "gamma2", "vtilde_f", "vtilde_p", "delta_cdw", "delta_sc", "status"],
                &table,
            )
            .map_err(from_any)?
        }
    };
    Ok(Outcome::ok(body))
}
