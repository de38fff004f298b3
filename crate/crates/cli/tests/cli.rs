use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn okb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_okb")).args(args).output().expect("binary runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn cfg(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn report(dir: &Path, command: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{command}.json"))).unwrap()).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn okounkov_on_the_projective_line_is_the_unit_interval() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = okb(&["okounkov", "--config", &cfg("sg.json"), "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(dir.path(), "okounkov");
    assert_eq!(r["status"], "ok");
    assert_eq!(r["result"]["body"]["exact_vertices"], serde_json::json!([["0"], ["1"]]));
    assert!((r["result"]["body"]["volume"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
    assert!(r["version"]["okounkov_core"].is_string());
    for row in rows(&dir.path().join("volumes.csv")) {
        assert_eq!(row[1].parse::<f64>().unwrap(), 1.0);
    }
}

#[test]
fn unit_square_has_volume_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = okb(&["okounkov", "--config", &cfg("square.json"), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(dir.path(), "okounkov");
    assert!((r["result"]["body"]["volume"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(r["result"]["lattice_counts"].as_array().unwrap().iter().all(|c| c["ok"] == true));
}

#[test]
fn constant_shift_gives_the_volume() {
    let dir = tempfile::tempdir().unwrap();
    let o = okb(&[
        "toric-energy",
        "--psi",
        &cfg("fs.json"),
        "--phi",
        &cfg("fs_plus_one.json"),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = rows(&dir.path().join("energies.csv"));
    assert_eq!(table.len(), 2);
    for row in table {
        let v: f64 = row[1].parse().unwrap();
        assert!((v - 1.0).abs() < 1e-6, "{row:?}");
    }
}

#[test]
fn identical_weights_give_a_zero_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let o = okb(&[
        "lk-ladder",
        "--k",
        "16,32,64",
        "--psi",
        &cfg("fs.json"),
        "--phi",
        &cfg("fs.json"),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = rows(&dir.path().join("ladder.csv"));
    assert_eq!(table.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["16", "32", "64"]);
    for row in table {
        for cell in &row[1..] {
            assert_eq!(cell.parse::<f64>().unwrap(), 0.0, "{row:?}");
        }
    }
    assert!(dir.path().join("ladder.svg").exists());
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let runs: [&[&str]; 4] = [
        &["lk-ladder", "--k", "8,16"],
        &["cheb1d", "--k-max", "8"],
        &["envelope", "--k-max", "40"],
        &["directional", "--k", "2,4"],
    ];
    for args in runs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        for d in [&a, &b] {
            let mut full = args.to_vec();
            full.extend(["--out", d.path().to_str().unwrap()]);
            let o = okb(&full);
            assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        }
        let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(names.len() >= 2);
        for n in names {
            let (x, y) = (fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap());
            let x = String::from_utf8(x).unwrap().replace(a.path().to_str().unwrap(), "");
            let y = String::from_utf8(y).unwrap().replace(b.path().to_str().unwrap(), "");
            assert_eq!(x, y, "{args:?}: {n:?} differs");
        }
    }
}

#[test]
fn printed_configs_reproduce_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = okb(&["cheb1d", "--k-max", "6", "--print-config"]);
    assert!(o.status.success());
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed["command"], "cheb1d");
    assert_eq!(printed["k_max"], 6);
    let path = dir.path().join("cfg.json");
    fs::write(&path, &o.stdout).unwrap();
    let again = okb(&["cheb1d", "--config", path.to_str().unwrap(), "--print-config"]);
    assert_eq!(o.stdout, again.stdout);
    // The report embeds the resolved config.
    let out = dir.path().join("run");
    let run = okb(&["cheb1d", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", stderr(&run));
    let r = report(&out, "cheb1d");
    assert_eq!(r["config"]["k_max"], 6);
}

#[test]
fn schema_violations_exit_two_with_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"k": [16, "x"]}"#).unwrap();
    let o = okb(&["lk-ladder", "--config", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("k[1]"), "{}", stderr(&o));
    let wrong = dir.path().join("wrong.json");
    fs::write(&wrong, r#"{"command": "verify"}"#).unwrap();
    let o = okb(&["cheb1d", "--config", wrong.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = okb(&["toric-energy", "--psi", "/nonexistent/psi.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_inputs_are_reported_in_the_json() {
    let dir = tempfile::tempdir().unwrap();
    let square = dir.path().join("square_weight.json");
    fs::write(
        &square,
        r#"{"n": 2, "polytope": [[0,0],[1,0],[1,1],[0,1]], "g": {"kind": "fubini_study", "scale": 1.0, "coords": [0]}}"#,
    )
    .unwrap();
    let o = okb(&["toric-energy", "--psi", &cfg("fs.json"), "--phi", square.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let r = report(dir.path(), "toric-energy");
    assert_eq!(r["status"], "input_error");
    assert!(r["error"].as_str().unwrap().contains("slope polytopes"));
}

#[test]
fn quick_verify_passes_and_the_tolerance_hook_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = okb(&["verify", "--profile", "quick", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("criterion")).count(), 10);
    assert_eq!(report(dir.path(), "verify")["status"], "ok");

    let o = okb(&["verify", "--criteria", "1,5", "--tolerance-scale", "1e-12", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("criterion  1 FAIL volume identity"), "{stdout}");
    let r = report(dir.path(), "verify");
    assert_eq!(r["status"], "acceptance_failure");
    assert!(r["result"]["failures"].as_array().unwrap().contains(&Value::from(1)));
}

#[test]
fn plot_renders_tables_and_rejects_empty_ones() {
    let dir = tempfile::tempdir().unwrap();
    let o = okb(&["cheb1d", "--k-max", "6", "--no-svg", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(!dir.path().join("field.svg").exists());
    let field = dir.path().join("field.csv");
    let svg = dir.path().join("f.svg");
    let o = okb(&["plot", "--table", field.to_str().unwrap(), "--kind", "field", "--out", svg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = fs::read(&svg).unwrap();
    okb(&["plot", "--table", field.to_str().unwrap(), "--kind", "field", "--out", svg.to_str().unwrap()]);
    assert_eq!(first, fs::read(&svg).unwrap());
    assert!(String::from_utf8(first).unwrap().starts_with("<svg"));

    let o = okb(&["plot", "--table", field.to_str().unwrap(), "--kind", "ladder", "--out", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "field table is not a ladder");

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "k,lk_sum_form\n").unwrap();
    let target = dir.path().join("empty.svg");
    let o = okb(&["plot", "--table", empty.to_str().unwrap(), "--kind", "ladder", "--out", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty"));
    assert!(!target.exists());
}
