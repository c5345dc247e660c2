use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dsurf::report::stable_body;

fn dsurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsurf")).args(args).output().expect("spawn dsurf")
}

fn body_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn classify_table_for_steep_cone() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = dsurf(&["classify", "--alpha", "-2", "--k", "0..3", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = body_rows(&out.join("classify.csv"));
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][1..5], ["limit-circle", "limit-circle", "limit-point", "limit-point"]);
    for row in &rows[1..] {
        assert!(row[1..5].iter().all(|c| c == "limit-point"), "{row:?}");
        assert_eq!(row[6..8], ["0", "0"]);
    }
}

#[test]
fn bridging_keeps_constant_mass() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e");
    let o = dsurf(&[
        "evolve", "--alpha", "0.5", "--extension", "bridging", "--n-cells", "64", "--t-final", "0.01", "--dt", "1e-3",
        "--output", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = body_rows(&out.join("series.csv"));
    let m0: f64 = rows[0][1].parse().unwrap();
    for row in &rows {
        let m: f64 = row[1].parse().unwrap();
        assert!((m - m0).abs() <= 1e-10 * m0.abs(), "mass {m} vs {m0}");
    }
    assert!(out.join("final_state.csv").exists());
    assert!(out.join("series.gp").exists());
}

#[test]
fn malformed_extension_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad");
    let o = dsurf(&["evolve", "--alpha", "0.5", "--extension", "disjoint c+=oops", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.trim().lines().count(), 1, "{err}");
    assert!(err.contains("model.extension"), "{err}");
    assert!(!out.exists());
}

#[test]
fn unknown_flag_exits_with_config_code() {
    let o = dsurf(&["classify", "--bogus", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    let ini = dir.path().join("run.ini");
    fs::write(
        &ini,
        format!("[run]\ncommand = geometry\noutput = {}\n[model]\nalpha = 0.5\n[grid]\nn_cells = 32\n", out.display()),
    )
    .unwrap();
    let o = dsurf(&["--config", ini.to_str().unwrap(), "--alpha", "-2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("curvature.csv")).unwrap();
    assert!(text.contains("# model.alpha = -2"));
    assert_eq!(body_rows(&out.join("curvature.csv")).len(), 32);
    // alpha <= -1 embeds as a surface of revolution
    assert!(out.join("profile.csv").exists());
}

#[test]
fn reruns_are_identical_apart_from_the_stamp() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = dsurf(&[
            "evolve", "--alpha", "-0.5", "--extension", "neumann", "--n-cells", "32", "--t-final", "0.005", "--dt",
            "1e-3", "--initial", "gaussian(0.5, 0.1, +)", "--output", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = fs::read_to_string(out.join("series.csv")).unwrap();
        // the output directory is echoed, so leave that line out
        stable_body(&text).lines().filter(|l| !l.starts_with("# run.output")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn failed_run_removes_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f");
    // a directory squatting on the plot script's name makes the second write fail
    fs::create_dir_all(out.join("series.gp")).unwrap();
    let o = dsurf(&["evolve", "--alpha", "0.5", "--n-cells", "32", "--t-final", "0.002", "--dt", "1e-3", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.join("series.csv").exists());
    assert!(!out.join("final_state.csv").exists());
}
