use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ndarray::Array2;
use surplus_id::entropy::EntropyModel;
use surplus_id::identify::{check_rationalizable, identify_entropy, rationalize_gauge};
use surplus_id::lp::solve_w0;
use surplus_id_cli::format::{load_market, read_market_file, MatrixRole};
use surplus_id_cli::report::*;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surplus-id"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_on(cmd: &str, fixture_name: &str, extra: &[&str]) -> Output {
    let path = fixture(fixture_name);
    let mut args = vec![cmd, "--input", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn rows(a: &Array2<f64>) -> Rows {
    a.outer_iter().map(|r| r.to_vec()).collect()
}

/// Compares against `tests/golden/<name>`; `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

#[test]
fn solve_identity_matches_library() {
    let out = run_on("solve", "phi_identity.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    golden("solve_identity.json", &stdout(&out));
    let report: SolveReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report.value, 1.0);

    let market = load_market(&fixture("phi_identity.json"), MatrixRole::Surplus, 1e-9).unwrap();
    let sol = solve_w0(market.phi.as_ref().unwrap(), &market.margins).unwrap();
    assert_eq!(report.value, sol.value);
    assert_eq!(report.mu_opt, rows(sol.mu_opt.mu()));
    assert_eq!(report.dual_f, sol.dual_f.to_vec());
    assert_eq!(report.dual_g, sol.dual_g.to_vec());
    assert!(report.note.is_none());
}

#[test]
fn solve_flags_separable_surplus() {
    let out = run_on("solve", "phi_separable.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    golden("solve_separable.json", &stdout(&out));
    let report: SolveReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(!report.in_s && report.argmax_is_entire_m);
    assert_eq!(report.note.as_deref(), Some("argmax = entire M; Φ ∉ S"));
}

#[test]
fn solve_without_phi_is_a_usage_error() {
    let out = run_on("solve", "phi_missing.json", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err: ErrorReport = serde_json::from_str(&stderr(&out)).unwrap();
    assert_eq!(err.error, "usage");
    assert_eq!(err.exit_code, 2);
}

#[test]
fn check_verdicts_and_exit_codes() {
    let diag = run_on("check", "diag.json", &[]);
    assert_eq!(diag.status.code(), Some(0));
    golden("check_diag.json", &stdout(&diag));
    let r: CheckReport = serde_json::from_str(&stdout(&diag)).unwrap();
    assert!(r.rationalizable);
    assert_eq!(r.witness, Some(vec![vec![0.0, -1.0], vec![-1.0, 0.0]]));

    let interior = run_on("check", "interior.json", &[]);
    assert_eq!(interior.status.code(), Some(1));
    golden("check_interior.json", &stdout(&interior));
    let r: CheckReport = serde_json::from_str(&stdout(&interior)).unwrap();
    assert!(!r.rationalizable && r.witness.is_none());

    let center = run_on("check", "barycenter.json", &[]);
    assert_eq!(center.status.code(), Some(1));
    let r: CheckReport = serde_json::from_str(&stdout(&center)).unwrap();
    assert!(r.note.contains("barycenter of M"));
    assert!(r.t_star.is_none());
}

#[test]
fn check_matches_library_on_3x3_boundary() {
    let out = run_on("check", "boundary_3x3.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    let r: CheckReport = serde_json::from_str(&stdout(&out)).unwrap();
    let market = load_market(&fixture("boundary_3x3.json"), MatrixRole::Matching, 1e-9).unwrap();
    let lib = check_rationalizable(market.mu.as_ref().unwrap()).unwrap();
    assert_eq!(r.rationalizable, lib.rationalizable);
    assert_eq!(r.witness, lib.witness.map(|w| rows(w.phi())));
    assert_eq!(r.t_star, lib.t_star);
}

#[test]
fn identify_shannon_reports_the_cross_difference() {
    let out = run_on("identify", "interior.json", &["--entropy", "shannon"]);
    assert_eq!(out.status.code(), Some(0));
    golden("identify_shannon.json", &stdout(&out));
    let r: IdentifyReport = serde_json::from_str(&stdout(&out)).unwrap();
    let cd = r.diagnostics["cross_difference[0,1;0,1]"];
    assert!((cd - 2.0 * (7.0f64 / 3.0).ln()).abs() < 1e-9);

    let market = load_market(&fixture("interior.json"), MatrixRole::Matching, 1e-9).unwrap();
    let lib = identify_entropy(market.mu.as_ref().unwrap(), &EntropyModel::Shannon).unwrap();
    assert_eq!(r.phi_raw, rows(lib.phi_raw.phi()));
    assert_eq!(r.phi_canonical, rows(lib.phi_canonical.phi()));
}

#[test]
fn identify_gauge_emits_the_ray() {
    let out = run_on("identify", "interior.json", &["--entropy", "gauge"]);
    assert_eq!(out.status.code(), Some(0));
    golden("identify_gauge.json", &stdout(&out));
    let r: IdentifyReport = serde_json::from_str(&stdout(&out)).unwrap();
    let g = r.gauge.as_ref().unwrap();
    assert!((g.t_star - 2.5).abs() < 1e-12);
    assert_eq!(g.binding_cells, vec![[0, 1], [1, 0]]);
    let expected = [[0.0, -12.5], [-12.5, 0.0]];
    for (row, want) in r.phi_raw.iter().zip(expected) {
        for (a, b) in row.iter().zip(want) {
            assert!((a - b).abs() < 1e-9);
        }
    }
    let market = load_market(&fixture("interior.json"), MatrixRole::Matching, 1e-9).unwrap();
    let (lg, lid) = rationalize_gauge(market.mu.as_ref().unwrap()).unwrap();
    assert_eq!(g.t_star, lg.t_star);
    assert_eq!(r.phi_raw, rows(lid.phi_raw.phi()));
}

#[test]
fn identify_quantile_needs_values() {
    let out = run_on("identify", "quantile.json", &["--entropy", "quantile"]);
    assert_eq!(out.status.code(), Some(0));
    let r: IdentifyReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(r.diagnostics["gradient_check_error"] < 1e-5);

    let out = run_on("identify", "interior.json", &["--entropy", "quantile"]);
    assert_eq!(out.status.code(), Some(2));
    let err: ErrorReport = serde_json::from_str(&stderr(&out)).unwrap();
    assert_eq!(err.error, "usage");
}

#[test]
fn identify_shannon_on_zero_cell_names_it() {
    let out = run_on("identify", "diag.json", &[]);
    assert_eq!(out.status.code(), Some(2));
    let err: ErrorReport = serde_json::from_str(&stderr(&out)).unwrap();
    assert_eq!(err.error, "boundary-point");
    assert!(err.message.starts_with("boundary point: ∇I undefined"));
    assert_eq!(err.cell, Some([0, 1]));
    assert!(err.hint.is_some());
}

#[test]
fn csv_with_sidecar_equals_json() {
    let a = run_on("identify", "interior.csv", &[]);
    let b = run_on("identify", "interior.json", &[]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn invalid_margins_name_the_constraint() {
    let out = run_on("check", "bad_margins.json", &[]);
    assert_eq!(out.status.code(), Some(2));
    let err: ErrorReport = serde_json::from_str(&stderr(&out)).unwrap();
    assert!(err.message.contains("row sum 0"), "{}", err.message);
}

#[test]
fn missing_file_and_bad_flags_exit_two() {
    let out = run(&["check", "--input", "/nonexistent/market.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err: ErrorReport = serde_json::from_str(&stderr(&out)).unwrap();
    assert_eq!(err.error, "io");

    let out = run_on("identify", "interior.json", &["--entropy", "tsallis"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn loose_tolerance_accepts_rounded_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rounded.json");
    std::fs::write(&path, r#"{"p":[0.5,0.5],"q":[0.5,0.5],"mu":[[0.3500001,0.15],[0.15,0.35]]}"#).unwrap();
    let strict = run(&["check", "--input", path.to_str().unwrap()]);
    assert_eq!(strict.status.code(), Some(2));
    let loose = run(&["--tol", "1e-6", "check", "--input", path.to_str().unwrap()]);
    assert_eq!(loose.status.code(), Some(1));
}

#[test]
fn geometry_columns() {
    let out = run_on("geometry", "interior.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    golden("geometry_interior.txt", &stdout(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    let header: Vec<&str> = lines[0].split_whitespace().collect();
    assert_eq!(header.len(), 10);
    for object in ["segment", "barycenter", "mu_hat", "mu_star", "ray"] {
        assert!(header.contains(&format!("{object}.mu11").as_str()));
    }
    let first: Vec<f64> = lines[1].split_whitespace().map(|s| s.parse().unwrap()).collect();
    let second: Vec<f64> = lines[2].split_whitespace().map(|s| s.parse().unwrap()).collect();
    // segment endpoints are the two vertices
    assert_eq!(&first[0..2], &[0.0, 0.5]);
    assert_eq!(&second[0..2], &[0.5, 0.0]);
    // μ* sits at the second endpoint
    assert!((first[6] - 0.5).abs() < 1e-12 && first[7].abs() < 1e-12);

    let endpoint = run_on("geometry", "diag.json", &[]);
    let text = stdout(&endpoint);
    let row: Vec<f64> = text.lines().nth(1).unwrap().split_whitespace().map(|s| s.parse().unwrap()).collect();
    assert_eq!(&row[4..6], &row[6..8]);

    let wrong = run_on("geometry", "market_3x2.json", &[]);
    assert_eq!(wrong.status.code(), Some(2));
}

#[test]
fn geometry_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("plot.txt");
    let out = run_on("geometry", "interior.json", &["--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let direct = run_on("geometry", "interior.json", &[]);
    assert_eq!(std::fs::read_to_string(&target).unwrap(), stdout(&direct));
}

fn simulate(dir: &Path, households: &str, seed: &str, round_trip: bool) -> Output {
    let mut extra = vec!["--households", households, "--seed", seed, "--out", dir.to_str().unwrap()];
    if round_trip {
        extra.push("--round-trip");
    }
    run_on("simulate", "phi_simulate.json", &extra)
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let first = simulate(dir.path(), "5000", "42", false);
    assert_eq!(first.status.code(), Some(0));
    let truth = std::fs::read(dir.path().join("mu_true.json")).unwrap();
    let empirical = std::fs::read(dir.path().join("mu_empirical.json")).unwrap();
    let second = simulate(dir.path(), "5000", "42", false);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(truth, std::fs::read(dir.path().join("mu_true.json")).unwrap());
    assert_eq!(empirical, std::fs::read(dir.path().join("mu_empirical.json")).unwrap());

    let other = simulate(dir.path(), "5000", "43", false);
    assert_eq!(other.status.code(), Some(0));
    assert_ne!(empirical, std::fs::read(dir.path().join("mu_empirical.json")).unwrap());
}

#[test]
fn simulate_outputs_reload_as_market_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), "20000", "3", false);
    let report: SimulateReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(!report.empirical_degenerate);
    let truth = load_market(Path::new(&report.mu_true_file), MatrixRole::Matching, 1e-9).unwrap();
    assert!(truth.phi.is_some() && truth.mu.is_some());
    let empirical = load_market(Path::new(&report.mu_empirical_file), MatrixRole::Matching, 1e-9).unwrap();
    let mu = empirical.mu.unwrap();
    assert!((mu.mu().sum() - 1.0).abs() < 1e-12);
    // empirical counts are multiples of 1/households
    for v in mu.mu().iter() {
        let n = v * 20000.0;
        assert!((n - n.round()).abs() < 1e-6);
    }
}

#[test]
fn simulate_round_trip_at_a_million() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), "1000000", "11", true);
    assert_eq!(out.status.code(), Some(0));
    let report: SimulateReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report.round_trip.unwrap().cross_difference_error < 0.02);
}

#[test]
fn simulate_rejects_zero_households() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), "0", "1", false);
    assert_eq!(out.status.code(), Some(2));
    let err: ErrorReport = serde_json::from_str(&stderr(&out)).unwrap();
    assert_eq!(err.error, "usage");
}

#[test]
fn simulate_small_sample_blocks_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), "3", "1", true);
    assert_eq!(out.status.code(), Some(1));
    let report: SimulateReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report.empirical_degenerate && report.round_trip.is_none());
    assert!(report.note.is_some());
}

#[test]
fn market_files_round_trip_through_the_loader() {
    let file = read_market_file(&fixture("quantile.json"), MatrixRole::Matching).unwrap();
    let text = surplus_id_cli::format::to_json(&file);
    let back: surplus_id_cli::format::MarketFile = serde_json::from_str(&text).unwrap();
    assert_eq!(file, back);
}
