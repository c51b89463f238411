//! In-process tests of the five subcommands and their exit-code contract.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use fermion_phonon::bogoliubov::solve_closed_form;
use fermion_phonon::correlators::exponents;
use fermion_phonon::fock::{build_space, degeneracy_counts};
use fermion_phonon::model::momentum_grid;
use fpctl::commands::{CheckReport, CorrelatorRow, ScanRow, SolveReport};
use fpctl::{run, threads_from_env, Cli, Outcome, Status};
use tempfile::NamedTempFile;

const MODEL: &str = "[model]\nv_f = 1.0\nv_p = 0.3\nlambda = 1.0\ng = 0.2\na = 0.1\nL = 100.0\n";
const FREE: &str = "[model]\nv_f = 1.0\nv_p = 0.3\nlambda = 0.0\ng = 0.0\na = 0.1\nL = 100.0\n";

fn config(text: &str) -> NamedTempFile {
    let mut file = tempfile::Builder::new().suffix(".toml").tempfile().unwrap();
    file.write_all(text.as_bytes()).unwrap();
    file
}

fn invoke(path: &Path, args: &[&str]) -> Outcome {
    let mut argv = vec!["fpctl", "--config", path.to_str().unwrap()];
    argv.extend_from_slice(args);
    run(&Cli::parse_from(argv))
}

fn csv_rows<T: serde::de::DeserializeOwned>(body: &str) -> Vec<T> {
    csv::Reader::from_reader(body.as_bytes()).deserialize().map(|r| r.unwrap()).collect()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join(name)
}

#[test]
fn solve_round_trips_the_solution() {
    let cfg = config(MODEL);
    let out = invoke(cfg.path(), &["solve"]);
    assert_eq!(out.status, Status::Success);
    let report: SolveReport = serde_json::from_str(&out.body).unwrap();
    let expected = solve_closed_form(&report.solution.params).unwrap();
    assert_eq!(report.solution, expected);
    assert_eq!(report.exponents, exponents(&expected));
}

#[test]
fn solve_free_config_has_trivial_exponents() {
    let cfg = config(FREE);
    let out = invoke(cfg.path(), &["solve"]);
    assert_eq!(out.status, Status::Success);
    let report: SolveReport = serde_json::from_str(&out.body).unwrap();
    assert_eq!(report.exponents.delta_cdw, 1.0);
    assert_eq!(report.exponents.delta_sc, 1.0);
    assert_eq!(report.exponents.fermion_dimension, 1.0);
}

#[test]
fn solve_rejects_unstable_couplings() {
    let text = format!("[model]\nv_f = 1.0\nv_p = 0.3\nlambda = {}\ng = 0.0\na = 0.1\nL = 100.0\n", 2.0 * PI);
    let cfg = config(&text);
    let out = invoke(cfg.path(), &["solve"]);
    assert_eq!(out.status, Status::InvalidInput);
    assert_eq!(out.status.code(), 2);
    assert!(out.body.is_empty());
    assert!(out.messages.iter().any(|m| m.contains("lambda")), "{:?}", out.messages);
}

#[test]
fn missing_or_malformed_config_is_invalid_input() {
    let out = run(&Cli::parse_from(["fpctl", "solve"]));
    assert_eq!(out.status, Status::InvalidInput);
    let cfg = config("[model]\nv_f = 1.0\n");
    assert_eq!(invoke(cfg.path(), &["solve"]).status, Status::InvalidInput);
    let cfg = config(&format!("{MODEL}[grid]\nunknown = 3\n"));
    assert_eq!(invoke(cfg.path(), &["solve"]).status, Status::InvalidInput);
}

fn verify_reports(k: u32) -> (Outcome, Vec<CheckReport>) {
    let cfg = config(&format!("{MODEL}[grid]\nK = {k}\n"));
    let out = invoke(cfg.path(), &["verify"]);
    let reports = if out.body.is_empty() { Vec::new() } else { serde_json::from_str(&out.body).unwrap() };
    (out, reports)
}

#[test]
fn verify_passes_at_k2() {
    let (out, reports) = verify_reports(2);
    assert_eq!(out.status, Status::Success, "{:?}", out.messages);
    assert!(reports.iter().all(|r| r.pass));
    for name in ["CAR", "SCHWINGER", "KRONIG", "DEGENERACY", "JACOBI", "RECONSTRUCTION"] {
        assert!(reports.iter().any(|r| r.check == name), "missing {name}");
    }
    for r in reports.iter().filter(|r| r.bound.is_none() && r.check != "DEGENERACY") {
        assert_eq!(r.residual, "0", "{}", r.check);
    }
}

#[test]
fn verify_passes_at_k1() {
    let (out, reports) = verify_reports(1);
    assert_eq!(out.status, Status::Success, "{:?}", out.messages);
    assert!(!reports.is_empty() && reports.iter().all(|r| r.pass));
}

#[test]
fn verify_names_car_for_unsigned_ladders() {
    let out = invoke(&fixture("unsigned_ladders.toml"), &["verify"]);
    assert_eq!(out.status, Status::VerificationFailed);
    assert_eq!(out.status.code(), 1);
    let reports: Vec<CheckReport> = serde_json::from_str(&out.body).unwrap();
    let car = reports.iter().find(|r| r.check == "CAR").unwrap();
    assert!(!car.pass);
    assert!(car.failure.is_some());
    assert!(out.messages.iter().any(|m| m.contains("CAR")), "{:?}", out.messages);
}

#[test]
fn verify_rejects_large_truncation() {
    let (out, _) = verify_reports(6);
    assert_eq!(out.status, Status::InvalidInput);
}

#[test]
fn spectrum_is_sorted_and_starts_at_the_vacuum() {
    let cfg = config(&format!("{MODEL}[grid]\nK = 10\n"));
    let out = invoke(cfg.path(), &["spectrum", "--e-max", "0.1"]);
    assert_eq!(out.status, Status::Success, "{:?}", out.messages);
    let rows = reader_rows(&out.body);
    let energies: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(energies.windows(2).all(|w| w[0] <= w[1]));
    let params = fpctl::RunConfig::from_toml(MODEL).unwrap().params().unwrap();
    let e0 = solve_closed_form(&params).unwrap().e0;
    assert_eq!(energies[0], e0);
    assert_eq!(&rows[0][1].parse::<f64>().unwrap(), &0.0);
    assert_eq!((&rows[0][3], &rows[0][4], &rows[0][5], &rows[0][6]), ("0", "0", "0", ""));
}

#[test]
fn free_spectrum_matches_fermion_level_counting() {
    let cfg = config(&format!("{FREE}[grid]\nK = 10\n"));
    let quantum = PI / 100.0;
    let out = invoke(cfg.path(), &["spectrum", "--e-max", &format!("{}", 4.5 * quantum)]);
    assert_eq!(out.status, Status::Success, "{:?}", out.messages);
    let mut levels: BTreeMap<u32, u64> = BTreeMap::new();
    for row in reader_rows(&out.body) {
        if row[6].contains("P(") || &row[5] != "0" {
            continue;
        }
        let e2 = row[1].parse::<f64>().unwrap() / quantum;
        assert!((e2 - e2.round()).abs() < 1e-9);
        *levels.entry(e2.round() as u32).or_default() += 1;
    }
    let space = build_space(momentum_grid(100.0, 3, 0.1).unwrap()).unwrap();
    let counts = degeneracy_counts(&space, 4);
    for (e2, (fermions, _)) in counts {
        assert_eq!(levels.get(&e2).copied().unwrap_or(0), fermions, "level {e2}");
    }
}

#[test]
fn spectrum_splits_charge_levels_by_the_forward_coupling() {
    let (v_f, l, gamma1) = (1.0, 100.0, 0.2);
    let text = format!("[model]\nv_f = {v_f}\nv_p = 0.3\nlambda = {}\ng = 0.0\na = 0.1\nL = {l}\n[grid]\nK = 10\n", 2.0 * PI * v_f * gamma1);
    let cfg = config(&text);
    let out = invoke(cfg.path(), &["spectrum", "--e-max", "0.1"]);
    assert_eq!(out.status, Status::Success, "{:?}", out.messages);
    let rows = reader_rows(&out.body);
    let level = |qp: &str, qm: &str| -> f64 {
        rows.iter()
            .find(|r| &r[3] == qp && &r[4] == qm && &r[5] == "0" && r[6].is_empty())
            .map(|r| r[0].parse().unwrap())
            .unwrap()
    };
    let split = level("1", "1") - level("1", "-1");
    let expected = 4.0 * gamma1 * PI * v_f / l;
    assert!((split.abs() - expected).abs() < 1e-12, "{split} vs {expected}");
}

fn reader_rows(body: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(body.as_bytes()).records().map(|r| r.unwrap()).collect()
}

#[test]
fn spectrum_reports_a_grid_that_is_too_small() {
    let cfg = config(&format!("{MODEL}[grid]\nK = 3\n"));
    let out = invoke(cfg.path(), &["spectrum", "--e-max", "0.2"]);
    assert_eq!(out.status, Status::InvalidInput);
    assert!(out.messages.iter().any(|m| m.contains("grid too small")), "{:?}", out.messages);
}

#[test]
fn correlate_free_two_point_falls_off_as_inverse_distance() {
    let text = format!("{FREE}[correlator]\nregulator = 1e-6\nx = {{ from = 0.5, to = 50.0, points = 100 }}\n");
    let cfg = config(&text);
    let out = invoke(cfg.path(), &["correlate"]);
    assert_eq!(out.status, Status::Success, "{:?}", out.messages);
    let rows: Vec<CorrelatorRow> = csv_rows(&out.body);
    assert_eq!(rows.len(), 100);
    for row in rows {
        assert!((2.0 * PI * row.x * row.abs - 1.0).abs() < 1e-10, "{row:?}");
    }
}

#[test]
fn correlate_odd_insertion_count_gives_zero_rows_and_a_warning() {
    let text = format!("{MODEL}[correlator]\ninsertions = [{{ r = \"+\", q = 1, x = 0.0, t = 0.0 }}]\n");
    let cfg = config(&text);
    for mode in ["continuum", "finite"] {
        let out = invoke(cfg.path(), &["correlate", "--mode", mode]);
        assert_eq!(out.status, Status::Success, "{:?}", out.messages);
        let rows: Vec<CorrelatorRow> = csv_rows(&out.body);
        assert_eq!(rows.len(), 10);
        assert!(rows.iter().all(|r| r.re == 0.0 && r.im == 0.0 && r.abs == 0.0));
        assert!(out.messages.iter().any(|m| m.starts_with("warning")), "{:?}", out.messages);
    }
}

#[test]
fn correlate_finite_mode_approaches_the_continuum() {
    // Free fields: the finite-size value tends to the continuum one as L grows.
    let text = format!(
        "[model]\nv_f = 1.0\nv_p = 0.3\nlambda = 0.0\ng = 0.0\na = 0.1\nL = 10000.0\n[correlator]\nregulator = 1e-3\nx = {{ from = 0.5, to = 5.0, points = 4 }}\n"
    );
    let cfg = config(&text);
    let finite: Vec<CorrelatorRow> = csv_rows(&invoke(cfg.path(), &["correlate", "--mode", "finite"]).body);
    let continuum: Vec<CorrelatorRow> = csv_rows(&invoke(cfg.path(), &["correlate", "--mode", "continuum"]).body);
    assert_eq!(finite.len(), 4);
    for (f, c) in finite.iter().zip(&continuum) {
        let diff = ((f.re - c.re).powi(2) + (f.im - c.im).powi(2)).sqrt();
        assert!(diff < 1e-6 * c.abs, "{f:?} vs {c:?}");
    }

    // Interacting fields: the renormalized finite value moves toward the
    // continuum one as the system is refined.
    let errors: Vec<f64> = [1.0, 2.0]
        .iter()
        .map(|s| {
            let text = format!(
                "[model]\nv_f = 1.0\nv_p = 0.3\nlambda = 1.0\ng = 0.2\na = {}\nL = {}\n[correlator]\nrenormalize = true\nregulator = {}\nx = {{ from = 1.0, to = 1.0, points = 1 }}\nt = {{ from = 0.2, to = 0.2, points = 1 }}\n",
                0.01 / s,
                1000.0 * s,
                0.1 / s
            );
            let cfg = config(&text);
            let f: Vec<CorrelatorRow> = csv_rows(&invoke(cfg.path(), &["correlate", "--mode", "finite"]).body);
            let reg = format!("{}", 1e-12);
            let c: Vec<CorrelatorRow> =
                csv_rows(&invoke(cfg.path(), &["correlate", "--mode", "continuum", "--regulator", &reg]).body);
            ((f[0].re - c[0].re).powi(2) + (f[0].im - c[0].im).powi(2)).sqrt() / c[0].abs
        })
        .collect();
    assert!(errors[1] < errors[0], "{errors:?}");
}

#[test]
fn scan_rows_obey_the_decoupled_identities() {
    let text = format!("{FREE}[scan]\ngamma1 = {{ from = -0.9, to = 0.9, points = 19 }}\n");
    let cfg = config(&text);
    let out = invoke(cfg.path(), &["scan"]);
    assert_eq!(out.status, Status::Success, "{:?}", out.messages);
    let rows: Vec<ScanRow> = csv_rows(&out.body);
    assert_eq!(rows.len(), 19);
    for row in &rows {
        assert_eq!(row.status, "ok");
        assert!((row.delta_cdw * row.delta_sc - 1.0).abs() < 1e-12, "{row:?}");
        assert!((row.vtilde_f - (1.0 - row.gamma1 * row.gamma1).sqrt()).abs() < 1e-12, "{row:?}");
    }
    let middle = rows.iter().find(|r| r.gamma1 == 0.0).unwrap();
    assert_eq!((middle.delta_cdw, middle.delta_sc), (1.0, 1.0));
    // v~_F decreases with |gamma1| on both sides of zero.
    for w in rows.windows(2) {
        if w[0].gamma1 >= 0.0 {
            assert!(w[1].vtilde_f < w[0].vtilde_f);
        } else if w[1].gamma1 <= 0.0 {
            assert!(w[1].vtilde_f > w[0].vtilde_f);
        }
    }
}

#[test]
fn scan_flags_unstable_points_without_aborting() {
    let text = format!("{MODEL}[scan]\ngamma1 = {{ from = 0.0, to = 1.2, points = 4 }}\n");
    let cfg = config(&text);
    let out = invoke(cfg.path(), &["scan"]);
    assert_eq!(out.status, Status::Success);
    let rows: Vec<ScanRow> = csv_rows(&out.body);
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0].status, "ok");
    let last = rows.last().unwrap();
    assert_ne!(last.status, "ok");
    assert!(last.vtilde_f.is_nan() && last.delta_cdw.is_nan());
    let text = format!("{MODEL}[scan]\ngamma1 = {{ from = 0.0, to = 0.5, points = 2 }}\nlambda = {{ from = 0.0, to = 1.0, points = 2 }}\n");
    let cfg = config(&text);
    assert_eq!(invoke(cfg.path(), &["scan"]).status, Status::InvalidInput);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let text = format!(
        "{MODEL}[correlator]\nx = {{ from = -3.0, to = 3.0, points = 7 }}\nt = {{ from = 0.0, to = 1.0, points = 3 }}\n[scan]\ngamma1 = {{ from = 0.0, to = 0.8, points = 5 }}\n"
    );
    let cfg = config(&text);
    for args in [&["solve"][..], &["correlate"], &["correlate", "--mode", "finite"], &["scan"], &["spectrum", "--e-max", "0.03"]] {
        let a = invoke(cfg.path(), args);
        let b = invoke(cfg.path(), args);
        assert_eq!(a.status, Status::Success, "{args:?}: {:?}", a.messages);
        assert_eq!(a.body, b.body, "{args:?}");
        #[cfg(feature = "parallel")]
        {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
            let c = pool.install(|| invoke(cfg.path(), args));
            assert_eq!(a.body, c.body, "{args:?} on one thread");
        }
    }
}

#[test]
fn output_formats_and_destination() {
    let cfg = config(&format!("{MODEL}[output]\nformat = \"json\"\npath = \"from-config.json\"\n"));
    let out = invoke(cfg.path(), &["scan"]);
    let rows: Vec<ScanRow> = serde_json::from_str(&out.body).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(out.path.as_deref(), Some(Path::new("from-config.json")));
    let out = invoke(cfg.path(), &["--output", "cli.csv", "--format", "csv", "scan"]);
    assert!(out.body.starts_with("lambda,g,"));
    assert_eq!(out.path.as_deref(), Some(Path::new("cli.csv")));
}

#[test]
fn threads_variable_parsing() {
    assert_eq!(threads_from_env(None).unwrap(), None);
    assert_eq!(threads_from_env(Some("")).unwrap(), None);
    assert_eq!(threads_from_env(Some(" 4 ")).unwrap(), Some(4));
    assert!(threads_from_env(Some("0")).is_err());
    assert!(threads_from_env(Some("many")).is_err());
    assert!(threads_from_env(Some("-2")).is_err());
}
