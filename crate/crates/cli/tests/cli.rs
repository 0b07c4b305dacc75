use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const RECTANGLE: &str = r#"
p = 2
[curvature]
L = 3.141592653589793
k = "0"
[width]
delta = "0.4"
[mesh]
samples = 257
ns = 64
nt = 8
"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fermi-spectra"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn certify_writes_report_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), RECTANGLE);
    let out = dir.path().join("out");
    let o = run(&["certify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["command"], "certify");
    assert_eq!(report["results"]["certificate"]["certified"], true);
    let threshold = report["results"]["certificate"]["threshold"].as_f64().unwrap();
    assert!((threshold - 1.5625).abs() < 1e-12, "{threshold}");
    assert!(out.join("certify.csv").exists());
}

#[test]
fn figure2_csv_header_and_sign() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dir.path().join("fig");
    let o = run(&["figure2", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("figure2.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,r,b,b_minus_r"));
    let gaps: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(gaps.len(), 500);
    assert!(gaps.iter().all(|g| *g > 0.0));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &RECTANGLE.replace("p = 2", "p = 0.5"));
    let o = run(&["bounds", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("p must exceed 1"));

    let o = run(&["bounds", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["nonsense", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn flag_overrides_beat_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), RECTANGLE);
    let out = dir.path().join("o");
    let o = run(&[
        "solve2d", "--config", &cfg, "--out", out.to_str().unwrap(), "--ns", "32", "--nt", "8", "--p", "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["grids"]["ns"], 32);
    assert_eq!(report["results"]["full"]["mesh"]["ns"], 32);
    let o = run(&["solve2d", "--config", &cfg, "--ns", "7"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failed_hypotheses_still_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let text = RECTANGLE.replace("k = \"0\"", "k = \"0.2*cos(2*pi*s/L)\"");
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("b");
    let o = run(&["bounds", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["results"]["bounds"][0]["applicable"], false);
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), RECTANGLE);
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = run(&["solve1d", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["report.json", "solve1d_shooting.csv", "solve1d_discretized.csv"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = fermi_spectra::config::load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert!(cfg.command.is_some(), "{}", path.display());
            count += 1;
        }
    }
    assert!(count >= 5);
}
