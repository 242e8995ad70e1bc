use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn hypersew(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypersew"))
        .args(args)
        .env_remove("HYPERSEW_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json_value(text: &str) -> serde_json::Value {
    serde_json::from_str(text).expect("valid JSON")
}

/// Rows of a field CSV after the header: coordinates and value.
fn field_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn gen_field_writes_every_node() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sheet.csv");
    let o = hypersew(&["gen-field", "--kind", "fbm", "--k", "2", "--H", "0.7,0.7", "--n", "64", "--seed", "1", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), path_str(&out));
    let rows = field_rows(&out);
    assert_eq!(rows.len(), 4096);
    for r in &rows {
        for c in &r[..2] {
            let j = c * 63.0;
            assert!((j - j.round()).abs() < 1e-9, "coordinate {c} is not j/63");
        }
        if r[0] == 0.0 || r[1] == 0.0 {
            assert_eq!(r[2], 0.0);
        }
    }
}

#[test]
fn gen_field_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = hypersew(&["gen-field", "--kind", "fbm", "--H", "0.6", "--n", "16", "--seed", "7", "--out", path_str(p)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn gen_field_rejects_bad_hurst() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.csv");
    let o = hypersew(&["gen-field", "--kind", "fbm", "--k", "2", "--H", "1.2,0.5", "--n", "8", "--out", path_str(&out)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("`H`"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn integrate_unit_integrand_gives_the_increment() {
    let o = hypersew(&["integrate", "--Y", "const1", "--X", "prod_id"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json_value(&stdout(&o));
    assert_eq!(v["value"].as_f64().unwrap(), 1.0);
    assert!(v["converged"].as_bool().unwrap());
    // the level-0 entry is the germ itself
    assert_eq!(v["levels"][0]["level"], 0);
    assert_eq!(v["levels"][0]["value"], 1.0);
}

#[test]
fn integrate_smooth_case() {
    let o = hypersew(&["integrate", "--Y", "prod_id", "--X", "prod_id", "--rect", "unit", "--tol", "1e-3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!((json_value(&stdout(&o))["value"].as_f64().unwrap() - 0.25).abs() <= 1e-3);
}

#[test]
fn integrate_reports_non_convergence_and_keeps_output() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.json");
    let o = hypersew(&[
        "integrate", "--Y", "weierstrass:0.6", "--X", "prod_id", "--tol", "1e-14", "--max-level", "2",
        "--out", path_str(&out),
    ]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    let written = fs::read_to_string(&out).unwrap();
    assert!(!json_value(&written)["converged"].as_bool().unwrap());
}

#[test]
fn integrate_with_fields_on_different_grids_fails_with_data_error() {
    let dir = TempDir::new().unwrap();
    let y = dir.path().join("y.csv");
    let x = dir.path().join("x.csv");
    let o = hypersew(&["gen-field", "--kind", "prod_id", "--n", "5", "--out", path_str(&y)]);
    assert_eq!(code(&o), 0);
    let o = hypersew(&["gen-field", "--kind", "prod_id", "--n", "4", "--out", path_str(&x)]);
    assert_eq!(code(&o), 0);
    let o = hypersew(&["integrate", "--Y", path_str(&y), "--X", path_str(&x), "--max-level", "2"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn integrate_caps_levels_at_sampled_resolution() {
    let dir = TempDir::new().unwrap();
    let y = dir.path().join("y.csv");
    let o = hypersew(&["gen-field", "--kind", "prod_id", "--n", "17", "--out", path_str(&y)]);
    assert_eq!(code(&o), 0);
    let o = hypersew(&["integrate", "--Y", path_str(&y), "--X", "prod_id", "--tol", "1e-3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json_value(&stdout(&o));
    assert!((v["value"].as_f64().unwrap() - 0.25).abs() <= 1e-3);
    assert!(v["levels"].as_array().unwrap().len() <= 5);

    let o = hypersew(&["gen-field", "--kind", "prod_id", "--n", "16", "--out", path_str(&y)]);
    assert_eq!(code(&o), 0);
    let o = hypersew(&["integrate", "--Y", path_str(&y), "--X", "prod_id"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn solve_unit_coefficient() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("y.csv");
    let o = hypersew(&["solve", "--f", "one", "--xi", "const1", "--X", "prod_id", "--n", "9", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for r in field_rows(&out) {
        assert!((r[2] - (1.0 + r[0] * r[1])).abs() <= 1e-12);
    }
    let sidecar = fs::read_to_string(out.with_extension("json")).unwrap();
    assert!(sidecar.contains("tile_size") && sidecar.contains("iterations") && sidecar.contains("residual"));
}

#[test]
fn solve_bessel_case() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("y.csv");
    let o = hypersew(&["solve", "--f", "id", "--xi", "const1", "--X", "prod_id", "--n", "64", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let corner = field_rows(&out).into_iter().find(|r| r[0] == 1.0 && r[1] == 1.0).unwrap();
    assert!((corner[2] - 2.2795853).abs() <= 1e-2, "{}", corner[2]);
}

#[test]
fn solve_reports_tile_underflow() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("y.csv");
    let o = hypersew(&[
        "solve", "--f", "id", "--xi", "const1", "--X", "prod_id", "--x-scale", "100", "--n", "5", "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&o), 5, "{}", stderr(&o));
}

#[test]
fn convergence_smooth_case_has_first_order() {
    let o = hypersew(&["convergence", "--Y", "prod_id", "--X", "prod_id", "--levels", "8"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "fitted_order").unwrap();
    for l in lines {
        let order: f64 = l.split(',').nth(col).unwrap().parse().unwrap();
        assert!(order >= 0.9, "order {order}");
    }
}

#[test]
fn delta_check_passes() {
    let o = hypersew(&["delta-check", "--k", "2", "--cases", "100", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("two_dim_form"));
}

#[test]
fn stability_sweep_has_three_finite_rows() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s.csv");
    let o = hypersew(&["stability", "--n", "17", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "ratio").unwrap();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        let ratio: f64 = r.split(',').nth(col).unwrap().parse().unwrap();
        assert!(ratio.is_finite() && ratio > 0.0);
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("f.csv");
    fs::write(&cfg, format!(r#"{{"kind": "fbm", "k": 2, "H": [0.7, 0.6], "n": 9, "seed": 4, "out": "{}"}}"#, path_str(&out))).unwrap();
    let o = hypersew(&["--config", path_str(&cfg), "gen-field"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(field_rows(&out).len(), 81);
    let o = hypersew(&["--config", path_str(&cfg), "gen-field", "--n", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(field_rows(&out).len(), 25);
}

#[test]
fn config_errors_name_the_key() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"kind": "fbm", "H": 0.7, "nodes": 9}"#).unwrap();
    let o = hypersew(&["--config", path_str(&cfg), "gen-field"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("`nodes`"), "{}", stderr(&o));

    fs::write(&cfg, r#"{"kind": "fbm", "H": 0.7, "seed": "soon"}"#).unwrap();
    let o = hypersew(&["--config", path_str(&cfg), "gen-field"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("`seed`"), "{}", stderr(&o));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("y{threads}.csv"));
        let o = Command::new(env!("CARGO_BIN_EXE_hypersew"))
            .args(["solve", "--f", "sin", "--xi", "const1", "--X", "weierstrass:0.7", "--n", "33", "--tile", "0.5"])
            .args(["--out", path_str(&out)])
            .env("HYPERSEW_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}
