//! End-to-end runs of the `foliate` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn foliate(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foliate"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

fn config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn analyze_classifies_the_built_ins() {
    let dir = TempDir::new().unwrap();
    let o = foliate(dir.path(), &["analyze", "--problem", "line-hyperbolic"]);
    assert_eq!(code(&o), 0);
    let j = json(&dir.path().join("analyze.json"));
    assert_eq!(j["result"]["classification"], "NormallyHyperbolic");
    assert!((f(&j["result"]["omega"]) - 0.9).abs() < 1e-12);
    assert!(dir.path().join("analyze.txt").exists());

    let o = foliate(dir.path(), &["analyze", "--problem", "line-stable"]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        json(&dir.path().join("analyze.json"))["result"]["classification"],
        "NormallyStable"
    );

    let o = foliate(dir.path(), &["analyze", "--problem", "nilpotent-demo"]);
    assert_eq!(code(&o), 2);
    let reason = json(&dir.path().join("analyze.json"))["result"]["reason"]
        .as_str()
        .unwrap()
        .to_string();
    assert!(reason.contains("0 not semi-simple"), "{reason}");
}

#[test]
fn records_carry_versions_and_config_echo() {
    let dir = TempDir::new().unwrap();
    let o = foliate(dir.path(), &["analyze", "--problem", "line-stable"]);
    assert_eq!(code(&o), 0);
    let j = json(&dir.path().join("analyze.json"));
    assert_eq!(j["schema_version"], 1);
    assert_eq!(j["library_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(j["config"]["problem"], "line-stable");
}

#[test]
fn fiber_matches_the_oracle() {
    let dir = TempDir::new().unwrap();
    let o = foliate(
        dir.path(),
        &[
            "fiber",
            "--problem",
            "line-stable",
            "--boundary",
            "0.1",
            "--xi",
            "0",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let j = json(&dir.path().join("fiber.json"));
    let u0 = &j["result"]["u0"];
    assert!((f(&u0[0]) - (1.0 - 1.01f64.sqrt())).abs() <= 1e-6);
    assert_eq!(f(&u0[1]), 0.1);
    assert_eq!(j["result"]["verification"]["passed"], true);
    let rows = csv_rows(&dir.path().join("fiber_trajectory.csv"));
    assert_eq!(rows[0], ["t", "u1", "u2", "deviation"]);
    assert_eq!(rows[1][0].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn linear_fiber_is_exact() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        dir.path(),
        "problem = \"linear-diag\"\n[solver]\nradius = 0.3\n",
    );
    let o = foliate(
        dir.path(),
        &[
            "fiber",
            "--config",
            &cfg,
            "--boundary",
            "0.3",
            "--xi",
            "0.2",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let u0 = json(&dir.path().join("fiber.json"))["result"]["u0"].clone();
    assert_eq!([f(&u0[0]), f(&u0[1]), f(&u0[2])], [0.2, 0.3, 0.0]);
}

#[test]
fn out_of_radius_is_a_precondition_failure() {
    let dir = TempDir::new().unwrap();
    let o = foliate(
        dir.path(),
        &[
            "fiber",
            "--problem",
            "line-stable",
            "--boundary",
            "10",
            "--xi",
            "0",
        ],
    );
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("solver radius"));
}

#[test]
fn unstable_request_on_a_stable_problem() {
    let dir = TempDir::new().unwrap();
    let o = foliate(
        dir.path(),
        &[
            "fiber",
            "--problem",
            "line-stable",
            "--kind",
            "unstable",
            "--xi",
            "0",
        ],
    );
    assert_eq!(code(&o), 3);
}

#[test]
fn foliate_tabulates_the_grid() {
    let dir = TempDir::new().unwrap();
    let o = foliate(dir.path(), &["foliate", "--problem", "line-stable"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&dir.path().join("foliate.csv"));
    assert_eq!(rows.len(), 122);
    let col = |name: &str| rows[0].iter().position(|c| c == name).unwrap();
    let (status, err) = (col("status"), col("oracle_error"));
    for r in &rows[1..] {
        assert_eq!(r[status], "ok");
        assert!(r[err].parse::<f64>().unwrap() <= 1e-6);
    }
}

#[test]
fn unstable_foliation_on_the_oracle_domain() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        dir.path(),
        "problem = \"line-hyperbolic\"\n[foliate]\nkind = \"unstable\"\n\
         boundary = { min = -0.1, max = 0.1, points = 3 }\nxi = { min = -0.1, max = 0.1, points = 3 }\n",
    );
    let o = foliate(dir.path(), &["foliate", "--config", &cfg]);
    assert_eq!(code(&o), 0);
    let j = json(&dir.path().join("foliate.json"));
    assert_eq!(j["result"]["solved"], 9);
}

#[test]
fn empty_grid_gives_an_empty_dataset() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        dir.path(),
        "problem = \"line-stable\"\n[foliate]\nboundary = { min = -0.1, max = 0.1, points = 0 }\n",
    );
    let o = foliate(dir.path(), &["foliate", "--config", &cfg]);
    assert_eq!(code(&o), 0);
    assert_eq!(csv_rows(&dir.path().join("foliate.csv")).len(), 1);
}

#[test]
fn decompose_examples() {
    let dir = TempDir::new().unwrap();
    let o = foliate(
        dir.path(),
        &["decompose", "--problem", "line-stable", "--u0", "0,0"],
    );
    assert_eq!(code(&o), 0);
    let r = json(&dir.path().join("decompose.json"))["result"].clone();
    assert!(f(&r["y0_coords"][0]).abs() <= 1e-12 && f(&r["xi_coords"][0]).abs() <= 1e-12);

    let o = foliate(
        dir.path(),
        &[
            "decompose",
            "--problem",
            "line-stable",
            "--u0",
            "-0.004987562,0.1",
        ],
    );
    assert_eq!(code(&o), 0);
    let r = json(&dir.path().join("decompose.json"))["result"].clone();
    assert!((f(&r["y0_coords"][0]) - 0.1).abs() <= 1e-6);
    assert!(f(&r["xi_coords"][0]).abs() <= 1e-6);

    let cfg = config(
        dir.path(),
        "problem = \"parabola-stable\"\n[solver]\nradius = 0.4\n[chart]\nrho_0 = 0.3\n",
    );
    let o = foliate(
        dir.path(),
        &["decompose", "--config", &cfg, "--u0", "0.3,0.14"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("decompose.json"))["result"].clone();
    assert!((f(&r["xi_coords"][0]) - 0.3).abs() <= 1e-9);
    assert!((f(&r["normal_form_y"][1]) - 0.05).abs() <= 1e-9);

    let o = foliate(
        dir.path(),
        &["decompose", "--problem", "line-hyperbolic", "--u0", "0,0,0"],
    );
    assert_eq!(code(&o), 3);
}

#[test]
fn verify_writes_table_and_trajectories() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        dir.path(),
        "problem = \"line-stable\"\n[verify]\nhorizon = 30.0\n\
         [[verify.points]]\nboundary = [0.1]\nxi = [0.1]\n\
         [[verify.points]]\nboundary = [-0.05]\nxi = [0.0]\n",
    );
    let o = foliate(dir.path(), &["verify", "--config", &cfg]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let rows = csv_rows(&dir.path().join("verify.csv"));
    assert_eq!(rows.len(), 3);
    let passed = rows[0].iter().position(|c| c == "passed").unwrap();
    assert!(rows[1..].iter().all(|r| r[passed] == "true"));
    let traj = csv_rows(&dir.path().join("verify_trajectories.csv"));
    assert_eq!(traj[0], ["index", "t", "u1", "u2"]);
    // the first fiber settles on its own base point (0.1, 0)
    let last = traj.iter().rev().find(|r| r[0] == "0").unwrap();
    assert!((last[2].parse::<f64>().unwrap() - 0.1).abs() <= 1e-6);
}

#[test]
fn chart_emits_graph_samples() {
    let dir = TempDir::new().unwrap();
    let o = foliate(dir.path(), &["chart", "--problem", "parabola-stable"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&dir.path().join("chart.csv"));
    assert_eq!(rows[0], ["x1", "phi1", "phi2", "u1", "u2"]);
    assert_eq!(rows.len(), 42);
    for r in &rows[1..] {
        let x: f64 = r[0].parse().unwrap();
        assert!((r[2].parse::<f64>().unwrap() - x * x).abs() <= 1e-9);
    }
}

#[test]
fn outputs_are_bitwise_reproducible() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let text = "problem = \"line-stable\"\nseed = 11\n[foliate]\nboundary = { min = -0.1, max = 0.1, points = 3 }\n";
    for d in [&a, &b] {
        let cfg = config(d.path(), text);
        assert_eq!(code(&foliate(d.path(), &["foliate", "--config", &cfg])), 0);
        assert_eq!(code(&foliate(d.path(), &["chart", "--config", &cfg])), 0);
    }
    for name in ["foliate.csv", "chart.csv", "chart.json"] {
        let ja = fs::read_to_string(a.path().join(name)).unwrap();
        let jb = fs::read_to_string(b.path().join(name)).unwrap();
        // the echoed output directory differs, everything else must match
        let strip = |s: &str| {
            s.lines()
                .filter(|l| !l.contains("output_dir"))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(strip(&ja), strip(&jb), "{name}");
    }
}

#[test]
fn configuration_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        dir.path(),
        "problem = \"line-stable\"\n[solver]\nsigmaa = 0.5\n",
    );
    let o = foliate(dir.path(), &["analyze", "--config", &cfg]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("sigmaa") && err.contains("line 3"), "{err}");

    let o = foliate(dir.path(), &["analyze", "--problem", "no-such-problem"]);
    assert_eq!(code(&o), 1);
    let o = foliate(dir.path(), &["analyze"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&foliate(dir.path(), &["frobnicate"])), 1);
    assert_eq!(
        code(&foliate(dir.path(), &["fiber", "--boundary", "abc"])),
        1
    );
}
