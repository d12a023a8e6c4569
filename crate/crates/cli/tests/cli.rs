use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str], config: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fbtumor"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("run.toml");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

/// Rows of a CSV file as string fields, header excluded.
fn rows(path: PathBuf) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

fn column(path: PathBuf, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(&path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn stationary_tau_sweep_is_monotone() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["stationary"], Some("sweep.tau = [0.0, 0.005, 0.01, 0.02]\n"));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = column(tmp.path().join("out/stationary.csv"), "r_star");
    assert_eq!(r.len(), 4);
    assert!(r.windows(2).all(|w| w[0] < w[1]), "{r:?}");
    let ratios = rows(tmp.path().join("out/richardson.csv"));
    assert_eq!(ratios.len(), 3);
    let q: f64 = ratios[0][5].parse().unwrap();
    assert!((q - 4.0).abs() < 0.5);
}

#[test]
fn zero_intensity_has_no_first_order_shift() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["stationary"], Some("params.mu = 0.0\n"));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(column(tmp.path().join("out/stationary.csv"), "r1"), vec![0.0]);
}

#[test]
fn unknown_key_exits_with_config_error() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["stationary"], Some("[params]\nmu = 1.0\nsigma = 0.5\n"));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma"));
}

#[test]
fn excessive_delay_is_a_numerical_failure() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["stationary"], Some("params.mu = 30.0\nparams.tau = 0.5\n"));
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn stability_tables() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["stability"], None);
    assert_eq!(code(&o), 0);
    let star = column(tmp.path().join("out/mu_star.csv"), "mu_star")[0];
    let thresholds = rows(tmp.path().join("out/thresholds.csv"));
    assert_eq!(thresholds.len(), 17);
    assert_eq!(thresholds[0][2], "inf");
    assert_eq!(thresholds[1][2], "inf");
    let finite: Vec<f64> = thresholds[2..].iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(finite[0], star);
    assert!(finite.windows(2).all(|w| w[0] < w[1]));

    let mu = 1.1 * star;
    let o = run(tmp.path(), &["stability"], Some(&format!("params.mu = {mu:?}\n")));
    assert_eq!(code(&o), 0);
    for r in rows(tmp.path().join("out/classification.csv")) {
        let n: u32 = r[3].parse().unwrap();
        let expect = match n {
            0 => "stable",
            1 => "neutral",
            2 => "unstable",
            _ if mu > finite[n as usize - 2] => "unstable",
            _ => "stable",
        };
        assert_eq!(r[5], expect, "mode {n}");
    }
}

#[test]
fn stability_json_marks_infinite_thresholds() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["stability", "--format", "json"], None);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(tmp.path().join("out/thresholds.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v[0]["threshold"].is_null());
    assert_eq!(v[0]["infinite"], true);
    assert_eq!(v[2]["infinite"], false);
    assert!(v[2]["threshold"].as_f64().unwrap() > 0.0);
}

#[test]
fn mode_trajectories() {
    let tmp = TempDir::new().unwrap();
    let cfg = "params.mu = 0.7\nmodes.rho0_init = 1.0\nmodes.rho1_init = 0.3\nmodes.t_end = 200.0\nsweep.n = [1, 2]\n";
    let o = run(tmp.path(), &["modes"], Some(cfg));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = tmp.path().join("out");
    assert!(column(out.join("mode_1.csv"), "rho0").iter().all(|v| (v - 1.0).abs() < 1e-12));
    assert!(column(out.join("mode_1.csv"), "rho1").iter().all(|v| (v - 0.3).abs() < 1e-9));
    let summary = rows(out.join("modes_summary.csv"));
    let g: f64 = summary[1][4].parse().unwrap();
    let fit: f64 = summary[1][9].parse().unwrap();
    assert!(g < 0.0 && fit < 0.0 && fit / g > 0.9, "g {g}, fit {fit}");

    let o = run(tmp.path(), &["modes"], Some("modes.rho0_init = 0.0\nsweep.n = [2]\n"));
    assert_eq!(code(&o), 0);
    assert!(column(out.join("mode_2.csv"), "combined").iter().all(|v| *v == 0.0));
}

#[test]
fn evolve_short_run() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["evolve"], Some("params.tau = 0.02\nevolve.t_end = 1.0\nevolve.r_init_factor = 1.2\n"));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = tmp.path().join("out");
    let r = column(out.join("evolve.csv"), "radius");
    assert!(r.windows(2).all(|w| w[1] < w[0]), "a disk above its steady size shrinks");
    assert!(column(out.join("evolve_summary.csv"), "max_endpoint_error")[0] < 1e-6);
}

#[test]
fn evolve_rejects_coarse_step() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["evolve"], Some("params.tau = 0.02\nevolve.dt = 0.01\n"));
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_passes_on_defaults() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["verify"], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(rows(tmp.path().join("out/verify.csv")).iter().all(|r| r[4] == "pass"));
}

#[test]
fn verify_reports_injected_fault() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["verify"], Some("verify.fault = \"flip_a_sign\"\n"));
    assert_eq!(code(&o), 4);
    let failed: Vec<String> =
        rows(tmp.path().join("out/verify.csv")).into_iter().filter(|r| r[4] == "fail").map(|r| r[0].clone()).collect();
    assert_eq!(failed, vec!["a_negative".to_string()]);
}

#[test]
fn verify_rejects_empty_grid() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["verify"], Some("verify.grid_points = 0\n"));
    assert_eq!(code(&o), 2);
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let tmp = TempDir::new().unwrap();
    let cfg = "sweep.mu = [0.5, 1.0, 2.0]\nsweep.tau = [0.0, 0.01]\n";
    let read_all = |dir: &Path| -> Vec<Vec<u8>> {
        ["stationary.csv", "profiles.csv", "richardson.csv"]
            .iter()
            .map(|f| std::fs::read(dir.join("out").join(f)).unwrap())
            .collect()
    };
    assert_eq!(code(&run(tmp.path(), &["stationary", "--jobs", "1"], Some(cfg))), 0);
    let serial = read_all(tmp.path());
    assert_eq!(code(&run(tmp.path(), &["stationary", "--jobs", "4"], Some(cfg))), 0);
    assert_eq!(serial, read_all(tmp.path()));
    assert_eq!(code(&run(tmp.path(), &["stationary", "--jobs", "0"], None)), 2);
}
