use std::path::Path;
use std::process::{Command, Output};

fn relaxfr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaxfr"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn report_value<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.trim_start().strip_prefix('=')))
        .map(str::trim)
        .unwrap_or_else(|| panic!("no `{key}` in\n{report}"))
}

#[test]
fn list_problems_names_every_problem() {
    let out = relaxfr(&["list-problems"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in [
        "burgers_sine",
        "buckley_leverett",
        "wc_blast",
        "sedov_blast_2d",
        "khi_2d",
        "lin_advection_1d",
        "lin_advection_2d",
    ] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing:\n{text}");
    }
}

#[test]
fn verify_tableaux_passes() {
    let out = relaxfr(&["verify-tableaux"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.lines().count() >= 2);
    assert!(!text.contains("FAIL"), "{text}");
}

#[test]
fn run_writes_frames_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("burgers");
    let out = relaxfr(&[
        "run",
        "--problem",
        "burgers_sine",
        "--t-final",
        "0.1",
        "--out",
        out_dir.to_str().unwrap(),
        "--output-every",
        "5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let printed = stdout(&out);
    let report = std::fs::read_to_string(out_dir.join("report.txt")).unwrap();
    assert_eq!(printed, report);
    assert_eq!(report_value(&report, "problem"), "burgers_sine");
    let t: f64 = report_value(&report, "t_final").parse().unwrap();
    assert!((t - 0.1).abs() < 1e-12);
    let steps: usize = report_value(&report, "steps").parse().unwrap();
    let frames = std::fs::read_dir(&out_dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
        .count();
    assert_eq!(frames, 1 + steps.div_ceil(5));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "problem = sedov_blast_2d\nnx = 16\nny = 16\nmax_steps = 2\n").unwrap();
    let out = relaxfr(&["run", "--config", cfg.to_str().unwrap(), "--set", "max_steps=3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report_value(&stdout(&out), "steps"), "3");
}

#[test]
fn vtk_output_for_two_d_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = relaxfr(&[
        "run",
        "--problem",
        "khi_2d",
        "--nx",
        "4",
        "--ny",
        "4",
        "--set",
        "max_steps=1",
        "--format",
        "vtk",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let vtk: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "vtk"))
        .collect();
    assert_eq!(vtk.len(), 2);
    let text = std::fs::read_to_string(&vtk[0]).unwrap();
    assert!(text.starts_with("# vtk DataFile"));
    assert!(text.contains("CELL_DATA 16"));
}

#[test]
fn convergence_prints_rates() {
    let out = relaxfr(&["convergence", "--problem", "lin_advection_1d", "--nx", "5", "--levels", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let rows: Vec<_> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let eoc: f64 = rows[2].split_whitespace().last().unwrap().parse().unwrap();
    assert!(eoc > 2.5, "{text}");
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        &["run"][..],
        &["run", "--problem", "nope"],
        &["run", "--problem", "burgers_sine", "--set", "cfl"],
        &["run", "--problem", "burgers_sine", "--set", "unknown_key=1"],
        &["run", "--config", "/nonexistent/run.cfg"],
    ] {
        let out = relaxfr(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"), "{args:?}");
    }
}

#[test]
fn unstable_run_reports_a_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = relaxfr(&[
        "run",
        "--problem",
        "wc_blast",
        "--cfl",
        "5",
        "--set",
        "positivity=false",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let code = out.status.code();
    assert!(code == Some(2) || code == Some(3), "{code:?}");
    assert!(!Path::new(&dir.path().join("report.txt")).exists());
}
