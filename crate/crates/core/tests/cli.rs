use std::path::Path;
use std::process::{Command, Output};

use qrepeater::cli::{EXIT_CONFIG, EXIT_USAGE};

fn qrepeater(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrepeater"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn pg_curve_shape() {
    let text = stdout(&qrepeater(&["pg-curve", "--grid", "10:250:100"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "L0_km,platform,p_g");
    assert_eq!(lines.len(), 301);
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 3);
        let p: f64 = fields[2].parse().unwrap();
        assert!((0.0..=1.0).contains(&p));
        // 15 significant digits in scientific notation
        assert_eq!(
            fields[2].split('e').next().unwrap().len(),
            16,
            "{}",
            fields[2]
        );
    }
}

#[test]
fn presets_json_matches_builtin() {
    let text = stdout(&qrepeater(&["presets", "--format", "json"]));
    let parsed: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
    let builtin = qrepeater::builtin_platforms();
    assert_eq!(parsed.len(), builtin.len());
    for (json, p) in parsed.iter().zip(&builtin) {
        assert_eq!(json["name"], p.name.as_str());
        assert_eq!(json["modes"], p.modes);
        assert_eq!(json["chi"], p.chi);
        assert_eq!(json["eta_x"], p.eta_x);
        assert_eq!(json["eta_r"], p.eta_r);
        assert_eq!(json["eta_s"], p.eta_s);
    }
}

#[test]
fn presets_csv() {
    let text = stdout(&qrepeater(&["presets"]));
    assert!(text.starts_with("name,modes,chi,"));
    assert_eq!(text.lines().count(), 5);
    assert!(text.contains("mode-dependent"));
}

#[test]
fn json_tables_parse() {
    let text = stdout(&qrepeater(&[
        "spdc", "--grid", "0:700:3", "--format", "json",
    ]));
    let rows: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["L_km"].as_f64().unwrap(), 0.0);
    assert_eq!(rows[1]["L_km"].as_f64().unwrap(), 350.0);
    let days = rows[1]["T_days"].as_f64().unwrap();
    assert!(
        (days / 1.786_122_542_295_38e-4 - 1.0).abs() < 1e-12,
        "{days}"
    );
}

#[test]
fn unknown_subcommand_exits_2() {
    let out = qrepeater(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
}

#[test]
fn bad_grid_exits_2() {
    assert_eq!(
        qrepeater(&["pg-curve", "--grid", "250:10:5"]).status.code(),
        Some(EXIT_USAGE)
    );
    assert_eq!(
        qrepeater(&["pg-curve", "--grid", "10:250:1"]).status.code(),
        Some(EXIT_USAGE)
    );
    assert_eq!(
        qrepeater(&["pg-curve", "--platforms", "nonexistent"])
            .status
            .code(),
        Some(EXIT_USAGE)
    );
}

#[test]
fn config_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let malformed = write(dir.path(), "bad.json", "{ not json");
    let invalid = write(
        dir.path(),
        "chi.json",
        r#"{"platforms": [{"name": "WV-MUX-QM", "chi": 1.5}]}"#,
    );
    let unknown = write(dir.path(), "unknown.json", r#"{"colour": "blue"}"#);
    for path in [
        malformed.as_str(),
        invalid.as_str(),
        unknown.as_str(),
        "/nonexistent/config.json",
    ] {
        let out = qrepeater(&["limits", "--config", path]);
        assert_eq!(out.status.code(), Some(EXIT_CONFIG), "{path}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    }
    let err = String::from_utf8(qrepeater(&["limits", "--config", &invalid]).stderr).unwrap();
    assert!(err.contains("chi"), "{err}");
}

#[test]
fn config_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let lossy = write(
        dir.path(),
        "alpha.json",
        r#"{"constants": {"alpha_db_per_km": 0.17}}"#,
    );
    let base = stdout(&qrepeater(&["pg-curve", "--grid", "100:200:2"]));
    let tuned = stdout(&qrepeater(&[
        "pg-curve",
        "--grid",
        "100:200:2",
        "--config",
        &lossy,
    ]));
    assert_ne!(base, tuned);
}

#[test]
fn output_files_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = qrepeater(&[
            "optimize",
            "--grid",
            "100:900:5",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn mc_validate_passes_and_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for threads in ["1", "3"] {
        let path = dir.path().join(format!("mc{threads}.csv"));
        let out = Command::new(env!("CARGO_BIN_EXE_qrepeater"))
            .args([
                "mc-validate",
                "--samples",
                "20000",
                "--chain-samples",
                "2000",
                "--seed",
                "42",
            ])
            .args(["--output", path.to_str().unwrap()])
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        files.push(std::fs::read_to_string(path).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert!(files[0].lines().skip(1).all(|l| l.ends_with(",true")));
    assert_eq!(files[0].lines().count(), 1 + 1 + 16 + 3);
}

#[test]
fn rate_curve_includes_spdc() {
    let text = stdout(&qrepeater(&[
        "rate-curve",
        "--grid",
        "100:200:2",
        "--platforms",
        "WV-MUX-QM",
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "L_km,platform,architecture,N,T_s");
    assert_eq!(lines.len(), 1 + 2 * 3);
    assert!(lines[3].contains(",SPDC,direct,,"));
}

#[test]
fn ef_curve_columns() {
    let text = stdout(&qrepeater(&[
        "ef-curve", "--grid", "0:150:4", "--k", "10,100",
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "L0_km,t_us,EF_K10,EF_K100,EF_mean");
    assert_eq!(lines.len(), 5);
}
