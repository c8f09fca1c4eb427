use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dyadic-bumps"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dyadic-bumps-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn double_scan_has_one_row_per_block() {
    let o = run(&["counterexample", "--mode", "double", "--n-max", "30"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,product,product_over_log,global_product");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 29);
    assert!(rows.iter().all(|r| r.split(',').count() == 4));
    assert!(stderr(&o).contains("band"));
}

#[test]
fn norm_of_a_constant() {
    let dir = scratch("norm");
    let f = write(&dir, "f.json", r#"{"breakpoints":[0,2],"values":[5]}"#);
    let young = r#"{"family":"logbump","p":2,"delta":1}"#;
    let o = run(&["orlicz-norm", "--input", f.to_str().unwrap(), "--young", young]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: f64 = stdout(&o).lines().nth(1).unwrap().parse().unwrap();
    // ‖c‖_A = c/A⁻¹(1) on any set
    let a = 1.0 / young_inverse_at_one();
    assert!((v - 5.0 * a).abs() < 1e-10 * v, "{v}");
}

/// `t² log(e+t)²` equals 1 at the root of that equation.
fn young_inverse_at_one() -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid * (std::f64::consts::E + mid).ln().powi(2) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[test]
fn corrupted_grid_fails_with_a_witness() {
    let dir = scratch("corrupt");
    let o = run(&["grid-build", "--k-max", "3"]);
    assert!(o.status.success());
    let mut grid: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    // stretch one child past its parent
    let cube = grid["cubes"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .find(|c| c["generation"] == 2)
        .unwrap();
    cube["members"]["hi"] = serde_json::json!(0.6);
    let path = write(&dir, "grid.json", &grid.to_string());
    let o = run(&["grid-verify", "--grid", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains(",false,\""), "{}", stdout(&o));
    assert!(stderr(&o).contains("fails"));
}

#[test]
fn bad_parameters_exit_with_two() {
    let dir = scratch("bad");
    let f = write(&dir, "f.json", r#"{"breakpoints":[0,1],"values":[1]}"#);
    let f = f.to_str().unwrap();
    for args in [
        vec!["hilbert", "--input", f, "--h", "-1"],
        vec!["orlicz-norm", "--input", f, "--young", "{\"family\":\"power\",\"p\":0.5}"],
        vec!["counterexample", "--n-max", "1"],
        vec!["orlicz-norm", "--input", "/nonexistent/f.json"],
        vec!["verify-thm", "cz", "--q", "2"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).starts_with("error: "));
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = scratch("config");
    let cfg = write(&dir, "run.toml", "mode = \"build\"\nn_max = 12\n");
    let cfg = cfg.to_str().unwrap();
    let o = run(&["--config", cfg, "counterexample"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 1 + 11);
    let o = run(&["--config", cfg, "counterexample", "--n-max", "5"]);
    assert_eq!(stdout(&o).lines().count(), 1 + 4);
    let bad = write(&dir, "bad.toml", "n_max = 12\nlambda = 3\n");
    let o = run(&["--config", bad.to_str().unwrap(), "counterexample"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lambda"));
}

#[test]
fn out_directory_receives_data_and_summary() {
    let dir = scratch("out");
    let o = run(&["--out", dir.to_str().unwrap(), "verify-thm", "maximal", "--count", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(dir.join("maximal.csv")).unwrap();
    assert!(csv.starts_with("instance,seed,size,param,lhs,rhs,ratio"));
    assert!(dir.join("maximal.summary.txt").exists());
}

#[test]
fn runs_are_deterministic() {
    let args = ["verify-thm", "double", "--count", "4", "--seed", "9"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn grid_pipeline_on_a_finite_space() {
    let dir = scratch("finite");
    let space = write(
        &dir,
        "space.json",
        r#"{"points":[[0,0],[1,0],[2,0],[3,0],[0,1],[1,1],[2,1],[3,1]]}"#,
    );
    let o = run(&["--out", dir.to_str().unwrap(), "grid-build", "--space", space.to_str().unwrap(), "--seed", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let grid = dir.join("grid.json");
    let o = run(&["grid-verify", "--grid", grid.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let values = write(&dir, "v.json", "[9, 0, 0, 0, 0, 0, 0, 1]");
    let o = run(&["cz-decompose", "--input", values.to_str().unwrap(), "--grid", grid.to_str().unwrap(), "--lambda", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("atom,lo,hi,f,g,b\n"));
}
