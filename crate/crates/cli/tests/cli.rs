use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ghostspin_core::interference::IntensityProfile;
use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(format!("{name}.json"))
}

fn ghostspin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ghostspin"))
        .args(args)
        .output()
        .unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not a report ({e}): {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

#[test]
fn check_dirac_exit_codes() {
    let ok = ghostspin(&[
        "check-dirac",
        "--config",
        config("rest_wave").to_str().unwrap(),
    ]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(report(&ok)["summary"]["passed"], true);

    let bad = ghostspin(&[
        "check-dirac",
        "--config",
        config("rest_wave_wrong_mass").to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(report(&bad)["summary"]["passed"], false);

    let missing = ghostspin(&["check-dirac", "--config", "/nonexistent/config.json"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error:"));
}

#[test]
fn malformed_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            "bad_expr",
            r#"{"field":{"type":"lightlike","f":"0","g":"s +"},"kappa":1,"grid":{"lo":-1,"hi":1,"samples":3}}"#,
        ),
        (
            "empty_grid",
            r#"{"field":{"type":"lightlike","f":"0","g":"s"},"kappa":1,"grid":{"lo":-1,"hi":1,"samples":0}}"#,
        ),
        (
            "unknown_key",
            r#"{"field":{"type":"lightlike","f":"0","g":"s"},"kappa":1,"grid":{"lo":-1,"hi":1,"samples":3},"extra":1}"#,
        ),
    ];
    for (name, text) in cases {
        let path = dir.path().join(format!("{name}.json"));
        std::fs::write(&path, text).unwrap();
        let out = ghostspin(&[
            "tensor",
            "--config",
            path.to_str().unwrap(),
            "--out",
            dir.path().join("t.csv").to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(2), "{name}");
    }
}

#[test]
fn ghost_tensor_vanishes_on_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("tensor.csv");
    let out = ghostspin(&[
        "tensor",
        "--config",
        config("lightlike_ghost").to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let (header, rows) = read_csv(&out_path);
    assert_eq!(rows.len(), 625);
    assert_eq!(header.len(), 14);
    for row in &rows {
        assert!(row[4..].iter().all(|t| t.abs() <= 1e-12), "{row:?}");
    }
}

#[test]
fn rest_wave_energy_density_is_kappa() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("tensor.json");
    let out = ghostspin(&[
        "tensor",
        "--config",
        config("rest_wave").to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let table: Value = serde_json::from_slice(&std::fs::read(&out_path).unwrap()).unwrap();
    let columns: Vec<String> = table["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap().to_owned())
        .collect();
    let t00 = columns.iter().position(|c| c == "T00").unwrap();
    for row in table["rows"].as_array().unwrap() {
        let row = floats(row);
        assert!((row[t00] - 1.5).abs() <= 1e-12);
        assert!(row[t00 + 1..].iter().all(|t| t.abs() <= 1e-12));
    }
}

#[test]
fn real_wave_current_is_null_vector() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("current.csv");
    let out = ghostspin(&[
        "current",
        "--config",
        config("lightlike_real").to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let (header, rows) = read_csv(&out_path);
    let (x2, j0, j1, j2, j3) = (
        column(&header, "x2"),
        column(&header, "j0"),
        column(&header, "j1"),
        column(&header, "j2"),
        column(&header, "j3"),
    );
    for row in &rows {
        let expected = 4.0 * (2.0 * row[x2]).exp();
        assert!((row[j0] - expected).abs() <= 1e-12 * expected);
        assert!((row[j3] + expected).abs() <= 1e-12 * expected);
        assert_eq!((row[j1], row[j2]), (0.0, 0.0));
    }
}

#[test]
fn zero_field_has_zero_current() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("current.csv");
    let out = ghostspin(&[
        "current",
        "--config",
        config("zero_field").to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let (_, rows) = read_csv(&out_path);
    assert!(rows.iter().all(|r| r[4..].iter().all(|j| *j == 0.0)));
}

#[test]
fn classify_verdicts() {
    let cases = [
        ("lightlike_real", "NonGhost", "NonGhost"),
        ("lightlike_ghost", "Ghost", "Ghost"),
        ("fluctuation_sum", "Ghost", "Ghost"),
        ("non_solution", "Indeterminate", "Indeterminate"),
    ];
    for (name, structural, numeric) in cases {
        let out = ghostspin(&["classify", "--config", config(name).to_str().unwrap()]);
        assert!(out.status.success(), "{name}");
        let summary = &report(&out)["summary"];
        assert_eq!(summary["structural"]["verdict"], structural, "{name}");
        assert_eq!(summary["numeric"]["verdict"], numeric, "{name}");
    }
}

#[test]
fn kappa_override_rebinds_field_parameter() {
    // the rest-wave phase is written in terms of kappa, so it stays a solution
    let out = ghostspin(&[
        "check-dirac",
        "--config",
        config("rest_wave").to_str().unwrap(),
        "--kappa",
        "2.0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["summary"]["kappa"], 2.0);
    let wrong = ghostspin(&[
        "check-dirac",
        "--config",
        config("rest_wave_wrong_mass").to_str().unwrap(),
        "--kappa",
        "2.0",
    ]);
    assert_eq!(wrong.status.code(), Some(1));
}

#[test]
fn ghostreal_profile_hits_zero_and_two() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("g");
    let out = ghostspin(&[
        "interfere",
        "--config",
        config("ghostreal").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let summary = &report(&out)["summary"];
    let minima = floats(&summary["ghostreal"]["minima"]);
    assert_eq!(minima.len(), 2);
    for (x, k) in minima.iter().zip([1.0, 3.0]) {
        assert!((x - k * std::f64::consts::PI).abs() <= 1e-12);
    }
    assert!((summary["max_value"].as_f64().unwrap() - 2.0).abs() <= 1e-12);

    let profile: IntensityProfile =
        serde_json::from_slice(&std::fs::read(out_dir.join("ghostreal.json")).unwrap()).unwrap();
    assert_eq!(profile.xs.len(), profile.values.len());
    assert!(profile
        .values
        .iter()
        .all(|v| (-1e-12..=2.0 + 1e-12).contains(v)));
}

#[test]
fn two_shadow_profiles_match_bruteforce() {
    let dir = tempfile::tempdir().unwrap();
    let out = ghostspin(&[
        "interfere",
        "--config",
        config("twoslit_n2").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let summary = &report(&out)["summary"];
    assert!(
        summary["bruteforce_max_relative_residual"]
            .as_f64()
            .unwrap()
            <= 1e-11
    );
    for name in ["real", "shadow_1", "shadow_2", "combined", "whichway"] {
        assert!(dir.path().join(format!("{name}.csv")).exists(), "{name}");
    }
}

#[test]
fn no_shadows_means_combined_equals_real() {
    let dir = tempfile::tempdir().unwrap();
    let out = ghostspin(&[
        "interfere",
        "--config",
        config("twoslit_n0").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let (_, real) = read_csv(&dir.path().join("real.csv"));
    let (_, combined) = read_csv(&dir.path().join("combined.csv"));
    assert_eq!(real, combined);
}

#[test]
fn sweep_rows_for_zero_shadows_follow_real_maxima() {
    let dir = tempfile::tempdir().unwrap();
    let sweep_dir = dir.path().join("sweep");
    let sweep = ghostspin(&[
        "sweep-shadows",
        "--config",
        config("sweep").to_str().unwrap(),
        "--out",
        sweep_dir.to_str().unwrap(),
    ]);
    assert!(sweep.status.success());
    assert_eq!(
        report(&sweep)["summary"]["maxima_coincide_within_one_step"],
        true
    );

    let single_dir = dir.path().join("single");
    let single = ghostspin(&[
        "interfere",
        "--config",
        config("sweep").to_str().unwrap(),
        "--out",
        single_dir.to_str().unwrap(),
        "--n",
        "0",
    ]);
    assert!(single.status.success());
    let real_maxima = floats(&report(&single)["summary"]["profiles"]["real"]["maxima"]);

    let (header, rows) = read_csv(&sweep_dir.join("summary.csv"));
    let (n, left, right) = (
        column(&header, "n"),
        column(&header, "x_left"),
        column(&header, "x_right"),
    );
    let mut from_table: Vec<f64> = rows
        .iter()
        .filter(|r| r[n] == 0.0)
        .map(|r| r[left])
        .collect();
    from_table.push(rows.iter().filter(|r| r[n] == 0.0).last().unwrap()[right]);
    assert_eq!(from_table, real_maxima);
}

#[test]
fn sweep_n_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = ghostspin(&[
        "sweep-shadows",
        "--config",
        config("sweep").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--n",
        "2,3",
    ]);
    assert!(out.status.success());
    assert!(dir.path().join("combined_n2.csv").exists());
    assert!(dir.path().join("combined_n3.csv").exists());
    assert!(!dir.path().join("combined_n0.csv").exists());
}
