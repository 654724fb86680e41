use std::path::Path;
use std::process::{Command, Output};

fn symspin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symspin"))
        .args(args)
        .env_remove("SYMSPIN_THREADS")
        .output()
        .expect("binary runs")
}

fn golden(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
        .display()
        .to_string()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn discrete_curve_matches_golden_file() {
    let out = symspin(&["entropy", "--config", &golden("discrete_orthogonal.toml")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let expected = std::fs::read(golden("discrete_orthogonal.csv")).unwrap();
    assert_eq!(out.stdout, expected);
    // log 2 to 17 significant digits, LF endings only.
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\n1000,6.9314718055994529e-1,0.0000000000000000e0\n"));
    assert!(!text.contains('\r'));
}

const MC_CONFIG: &str = r#"
[measure]
family = "torus"
p = [0.3, 0.7]

[query]
n = [2, 3]
m = [10, 20, 40]

[engine]
kind = "mc"
samples = 20000
seed = 11
"#;

#[test]
fn monte_carlo_output_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "mc.toml", MC_CONFIG);
    let a = dir.path().join("a.csv").display().to_string();
    let b = dir.path().join("b.csv").display().to_string();
    let c = dir.path().join("c.csv").display().to_string();
    assert!(symspin(&["entropy", "--config", &cfg, "--out", &a]).status.success());
    assert!(symspin(&["entropy", "--config", &cfg, "--out", &b]).status.success());
    assert!(symspin(&["entropy", "--config", &cfg, "--out", &c, "--seed", "12"])
        .status
        .success());
    for order in ["2", "3"] {
        let read = |base: &str| {
            let p = Path::new(base);
            let name = format!("{}.n{order}.csv", p.file_stem().unwrap().to_str().unwrap());
            let text = std::fs::read_to_string(p.with_file_name(name)).unwrap();
            // Drop the config echo, which records the output path.
            text.lines()
                .filter(|l| !l.starts_with('#'))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(read(&a), read(&b));
        assert_ne!(read(&a), read(&c));
    }
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 12);
    assert_eq!(meta["config"]["engine"]["samples"], 20000);
    assert_eq!(meta["curves"].as_array().unwrap().len(), 2);
}

#[test]
fn fit_recovers_dicke_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "dicke.toml",
        "[measure]\nfamily = \"torus\"\np = [0.5, 0.5]\n[query]\nn = [2]\ngrid = { lo = 1000, hi = 100000, count = 7 }\n[engine]\nkind = \"dicke\"\n",
    );
    let csv = dir.path().join("dicke.csv").display().to_string();
    assert!(symspin(&["entropy", "--config", &cfg, "--out", &csv]).status.success());
    let out = symspin(&["fit", "--csv", &csv, "--window", "1000", "100000"]);
    assert!(out.status.success());
    let fit: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let d = fit["dimension_estimate"].as_f64().unwrap();
    assert!((d - 1.0).abs() < 0.01, "d = {d}");
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(
        dir.path(),
        "bad.toml",
        "[measure]\nfamily = \"torus\"\np = [0.5, 0.5]\nwidth = 3\n",
    );
    let out = symspin(&["entropy", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("width"));

    let missing = dir.path().join("missing.toml").display().to_string();
    assert_eq!(symspin(&["entropy", "--config", &missing]).status.code(), Some(2));

    // The exact transfer engine has no torus evaluation.
    let mismatch = write_config(
        dir.path(),
        "mismatch.toml",
        "[measure]\nfamily = \"torus\"\np = [0.5, 0.5]\n[query]\nn = [2]\nm = [5]\n",
    );
    let out = symspin(&["entropy", "--config", &mismatch]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scaling_analysis::entropy_curve"));

    assert_eq!(symspin(&["verify", "no-such-suite"]).status.code(), Some(2));
}

#[test]
fn budget_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "big.toml",
        "[measure]\nfamily = \"torus\"\np = [0.25, 0.25, 0.25, 0.25]\n[query]\nn = [2]\nm = [100000]\n[engine]\nkind = \"quadrature\"\n",
    );
    let out = symspin(&["entropy", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn numerical_errors_exit_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "point.toml",
        "[measure]\nfamily = \"torus\"\np = [1.0, 0.0]\n[query]\nn = [2]\nm = [10]\n[engine]\nkind = \"asymptotic\"\n",
    );
    let out = symspin(&["entropy", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_suites_pass() {
    for suite in ["detA", "reconstruction", "geometry"] {
        let out = symspin(&["verify", suite]);
        assert!(
            out.status.success(),
            "{suite}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
        assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
    }
}
