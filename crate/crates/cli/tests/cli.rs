//! End-to-end checks of the command-line surface: exit codes, CSV shape,
//! determinism.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kdvks"))
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("kdvks-cli-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn subchar_reports_stable_band_point() {
    let out = bin().args(["subchar", "--x", "13"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("s1 = true"));
    assert!(text.contains("s2 = true"));
    assert!(text.contains("s3 = true"));
}

#[test]
fn validation_errors_exit_2() {
    // non-power-of-two sample count
    let out = bin()
        .args(["wave", "--x", "13", "--n", "100"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error: validation:"), "stderr: {err}");
    assert_eq!(err.lines().count(), 1, "one-line machine-parsable error");

    // both --k and --x
    let out = bin()
        .args(["wave", "--k", "0.9", "--x", "13"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // period outside the attainable range
    let out = bin().args(["subchar", "--x", "100"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn velocities_sweep_row_count_and_determinism() {
    let f1 = tmp("v1.csv");
    let f2 = tmp("v2.csv");
    for f in [&f1, &f2] {
        let out = bin()
            .args([
                "velocities",
                "--x-min", "8.6",
                "--x-max", "14.0",
                "--n-pts", "25",
                "--out",
            ])
            .arg(f)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(&f1).unwrap();
    let b = std::fs::read(&f2).unwrap();
    assert_eq!(a, b, "identical inputs must produce byte-identical CSV");
    let text = String::from_utf8(a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "X,alpha1,alpha2,alpha3,beta1,beta2");
    assert_eq!(lines.len(), 26, "header + n_pts rows");
    assert!(!text.contains('\r'), "LF line endings");
    std::fs::remove_file(&f1).ok();
    std::fs::remove_file(&f2).ok();
}

#[test]
fn wave_csv_and_svg() {
    let csv = tmp("wave.csv");
    let svg = tmp("wave.svg");
    let out = bin()
        .args(["wave", "--x", "13", "--n", "64", "--out"])
        .arg(&csv)
        .arg("--svg")
        .arg(svg.to_str().unwrap())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x,U0,U0p,U1,U2");
    assert_eq!(text.lines().count(), 65);
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    assert!(svg_text.starts_with("<svg"));
    assert!(svg_text.contains("polyline"));
    std::fs::remove_file(&csv).ok();
    std::fs::remove_file(&svg).ok();
}

#[test]
fn relax_rate_is_negative_on_window() {
    let out = bin()
        .args(["relax-rate", "--x-min", "8.0", "--x-max", "20.0", "--n-pts", "12"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let ls: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(ls < 0.0, "lambda_* = {ls}");
    }
}

#[test]
fn evans_check_passes_and_hill_emits_eigenvalues() {
    let out = bin()
        .args(["evans-check", "--x", "13", "--samples", "6"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("max_evans_rel"));

    let out = bin()
        .args(["hill", "--x", "13", "--delta", "0.05", "--xi", "0.1", "--n-modes", "24"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "re,im");
    assert_eq!(text.lines().count(), 1 + 49);
}

#[test]
fn config_file_supplies_defaults() {
    let cfg = tmp("cfg.txt");
    std::fs::write(&cfg, "# comment\nthreads = 2\ntol = 1e-3\n").unwrap();
    let out = bin()
        .args(["subchar", "--x", "13", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::remove_file(&cfg).ok();

    let bad = tmp("bad.txt");
    std::fs::write(&bad, "nonsense == =\n").unwrap();
    let out = bin()
        .args(["subchar", "--x", "13", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_file(&bad).ok();
}

#[test]
fn index_command_reports_flags() {
    let out = bin()
        .args(["index", "--x", "13", "--resolution", "64"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("ind = "));
    assert!(text.contains("origin_lambda1 = "));
    assert!(text.contains("s2 = true"));
    let ind: f64 = text
        .lines()
        .find(|l| l.starts_with("ind = "))
        .unwrap()
        .split(" = ")
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(ind < 0.0, "Ind(13) = {ind}");
}
