use std::path::Path;
use std::process::{Command, Output};

use casimir_core::dataset::Dataset;

fn casimir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn record_number(text: &str, key: &str) -> f64 {
    let needle = format!("\"{key}\": ");
    let start = text.find(&needle).unwrap_or_else(|| panic!("no `{key}` in {text}")) + needle.len();
    let rest = &text[start..];
    let end = rest.find([',', '\n']).unwrap();
    rest[..end].trim().trim_matches('"').parse().unwrap()
}

#[test]
fn dipole_scan_rows_and_trends() {
    let out = stdout(&casimir(&["dipole-scan", "--grid", "0.2,0.5,0.8", "--tol", "1e-7"]));
    let ds = Dataset::from_csv_str(&out).unwrap();
    assert_eq!(ds.columns, ["x", "f_E", "f_M", "g_E", "g_M", "gf_ratio_E", "gf_ratio_M", "err"]);
    assert_eq!(ds.rows.len(), 3);
    assert_eq!(ds.meta("config.grid"), Some("0.2,0.5,0.8"));
    assert!(ds.meta("units").unwrap().contains("length unit R"));
    let fe = ds.column("f_E").unwrap();
    assert!(fe.iter().all(|v| *v < 0.0));
    assert!(fe.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn gf_ratio_flips_across_the_surface() {
    let inside = Dataset::from_csv_str(&stdout(&casimir(&["dipole-scan", "--grid", "0.9"]))).unwrap();
    let outside = Dataset::from_csv_str(&stdout(&casimir(&["dipole-scan", "--grid", "1.1"]))).unwrap();
    for col in ["gf_ratio_E", "gf_ratio_M"] {
        let a = inside.column(col).unwrap()[0];
        let b = outside.column(col).unwrap()[0];
        assert!(a * b < 0.0, "{col}: {a} vs {b}");
    }
}

#[test]
fn energy_is_deterministic_and_zero_when_concentric() {
    let args = ["energy", "--r", "0.1", "--R", "-1", "--a", "0.2", "--lmax", "4"];
    let first = casimir(&args);
    let second = casimir(&args);
    assert_eq!(stdout(&first), stdout(&second));
    assert!(record_number(&stdout(&first), "energy") < 0.0);

    let zero = stdout(&casimir(&["energy", "--r", "0.1", "--R", "-1", "--a", "0", "--lmax", "4"]));
    assert_eq!(record_number(&zero, "energy"), 0.0);
}

#[test]
fn config_file_supplies_defaults_that_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# interior run\nr = 0.1\nR = -1\na = 0.2\nlmax = 3\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = stdout(&casimir(&["energy", "--config", cfg]));
    assert_eq!(record_number(&from_file, "l_max"), 3.0);
    let overridden = stdout(&casimir(&["energy", "--config", cfg, "--lmax", "5"]));
    assert_eq!(record_number(&overridden, "l_max"), 5.0);
}

#[test]
fn pfa_record_and_degenerate_geometry() {
    let out = stdout(&casimir(&["pfa", "--r", "1", "--R", "inf", "--d", "0.1"]));
    assert_eq!(record_number(&out, "theta1_pfa_r"), -3.0);
    assert_eq!(record_number(&out, "theta1_pfa_R"), -1.0);
    let lead = record_number(&out, "pfa_force");
    assert!((lead + std::f64::consts::PI.powi(3) / 360.0 * 1e3).abs() < 1e-9);

    // concentric equal radii: r + R = 0 cannot be placed at positive separation
    let bad = casimir(&["pfa", "--r", "1", "--R", "-1", "--a", "0"]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn input_errors_exit_with_code_two() {
    for args in [
        vec!["dipole-scan", "--grid", "0.5:0.2:0.1"],
        vec!["energy", "--r", "1", "--R", "-3"],
        vec!["energy", "--r", "1", "--R", "inf", "--d", "0.5", "--units", "R"],
        vec!["energy", "--r", "1", "--R", "-3", "--a", "0.5", "--lmax", "many"],
        vec!["bogus"],
    ] {
        let o = casimir(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn force_scan_writes_a_loadable_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("force.csv");
    let o = casimir(&[
        "force", "--r", "1", "--R", "inf", "--grid", "0.5:1.0:0.5", "--lmax", "6", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ds = Dataset::read_from(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(ds.rows.len(), 2);
    // attractive, and weaker further away
    let f = ds.column("separation_force").unwrap();
    assert!(f[0] < f[1] && f[1] < 0.0);
}

fn write_dataset(path: &Path, ds: &Dataset) {
    std::fs::write(path, ds.to_csv_string().unwrap()).unwrap();
}

#[test]
fn fit_recovers_theta1_curve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("theta1.csv");
    let k = [1.05, 1.08, 1.38];
    let mut ds = Dataset::new(["x", "theta1", "theta1_err"]);
    for x in [-0.5, -0.3, 0.0, 0.5, 1.0] {
        ds.push_row(vec![x, -(k[0] * x + k[1] * x / (1.0 + x) + k[2]), 0.01]).unwrap();
    }
    write_dataset(&path, &ds);
    let out = stdout(&casimir(&["fit", "--input", path.to_str().unwrap(), "--model", "theta1"]));
    for (name, want) in ["k1", "k2", "k3"].iter().zip(k) {
        assert!((record_number(&out, name) - want).abs() < 1e-8);
    }
}
