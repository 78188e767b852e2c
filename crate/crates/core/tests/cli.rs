use std::fs;
use std::path::Path;
use std::process::Command;

use xyqaoa::circuits::parse_circuit;
use xyqaoa::cli;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_xyqaoa"))
}

fn run_in(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).current_dir(dir).env("XYQAOA_CACHE_DIR", dir.join("cache")).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn solve_triangle_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run_in(dir.path(), &["solve", "--graph", "triangle", "--kappa", "3", "--p", "0", "--out", "o"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("p=0 r=0.666667"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("o/run_result.json")).unwrap()).unwrap();
    assert!((json["result"]["approximation_ratio"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert!(json["result"]["cost_distribution"]["infeasible"].is_number());
    for file in ["level_curve.csv", "cost_distribution.csv"] {
        let text = fs::read_to_string(dir.path().join("o").join(file)).unwrap();
        let first = text.lines().next().unwrap();
        assert!(first.starts_with("# xyqaoa ") && first.contains("config=") && first.contains("seed=0"));
    }
}

#[test]
fn solve_is_reproducible_across_thread_settings() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["solve", "--graph", "prism", "--kappa", "3", "--p", "2", "--hops", "2", "--seed", "9", "--out", "o"];
    assert_eq!(run_in(a.path(), &args).0, 0);
    let mut single = args.to_vec();
    single.extend(["--threads", "1"]);
    assert_eq!(run_in(b.path(), &single).0, 0);
    for file in ["run_result.json", "level_curve.csv", "cost_distribution.csv"] {
        let x = fs::read(a.path().join("o").join(file)).unwrap();
        let y = fs::read(b.path().join("o").join(file)).unwrap();
        assert!(x == y, "{file} differs");
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run_in(dir.path(), &["solve", "--graph", "triangle", "--kappa", "1"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("kappa"));
    fs::write(dir.path().join("bad.json"), r#"{"graph": {"builtin": "prism"}, "kapa": 3}"#).unwrap();
    assert_eq!(run_in(dir.path(), &["solve", "--config", "bad.json"]).0, 2);
    assert_eq!(run_in(dir.path(), &["solve", "--graph", "nonsense", "--kappa", "3"]).0, 2);
    assert_eq!(run_in(dir.path(), &["frobnicate"]).0, 2);
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("exp.json"),
        r#"{"graph": {"builtin": "triangle"}, "kappa": 3, "mixer": {"family": "xy_complete"}, "p": 1, "optimizer": {"hops": 1}}"#,
    )
    .unwrap();
    let (code, stdout, _) = run_in(dir.path(), &["solve", "--config", "exp.json", "--p", "0", "--out", "o"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().count(), 1);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("o/run_result.json")).unwrap()).unwrap();
    assert_eq!(json["mixer"]["family"], "xy_complete");
}

#[test]
fn resource_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // K9 with κ = 9 needs 9⁹ feasible amplitudes, past the cap
    let (code, _, stderr) = run_in(dir.path(), &["solve", "--graph", "K9", "--kappa", "9", "--p", "0"]);
    assert_eq!(code, 3, "{stderr}");
}

#[test]
fn wstate_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut sink = Vec::new();
    let report = cli::cmd_wstate(2, cli::WStateMethod::Sequential, dir.path(), &mut sink).unwrap();
    assert!(report.fidelity.unwrap() > 1.0 - 1e-9);
    let text = fs::read_to_string(&report.circuit_file).unwrap();
    let parsed = parse_circuit(&text).unwrap();
    assert_eq!(parsed, xyqaoa::circuits::wstate_sequential_circuit(2).unwrap());

    let report = cli::cmd_wstate(3, cli::WStateMethod::Recursive, dir.path(), &mut sink).unwrap();
    assert!(report.fidelity.unwrap() > 1.0 - 1e-9);
    assert_eq!(report.cnot_count, 4);

    let report = cli::cmd_wstate(100, cli::WStateMethod::BiasedPostselect, dir.path(), &mut sink).unwrap();
    assert!((report.success_probability.unwrap() - 0.3697).abs() < 1e-4);
    assert!(report.fidelity.is_none());

    let report = cli::cmd_wstate(6, cli::WStateMethod::BiasedPostselect, dir.path(), &mut sink).unwrap();
    assert!((report.success_probability.unwrap() - report.simulated_success_probability.unwrap()).abs() < 1e-12);
}

#[test]
fn enumerate_counts() {
    let dir = tempfile::tempdir().unwrap();
    for (n, chi, count) in [("3", "2", 1), ("7", "6", 5), ("7", "5", 46)] {
        let file = format!("g{n}_{chi}.g6");
        let (code, stdout, _) = run_in(dir.path(), &["enumerate", "--n", n, "--chi", chi, "--out", &file]);
        assert_eq!(code, 0);
        assert_eq!(stdout.trim(), count.to_string());
        assert_eq!(fs::read_to_string(dir.path().join(&file)).unwrap().lines().count(), count);
    }
    let (_, stdout, _) = run_in(dir.path(), &["enumerate", "--n", "3", "--chi", "2"]);
    assert_eq!(stdout.trim(), "BW");
}

#[test]
fn landscape_grid_and_zoom() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run_in(dir.path(), &["landscape", "--graph", "envelope", "--kappa", "3", "--points", "11", "--out", "full"]);
    assert_eq!(code, 0, "{stdout}");
    let text = fs::read_to_string(dir.path().join("full/landscape.csv")).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 121);
    // (0, 0) is the first cell and equals the W-state baseline
    let r0: f64 = rows[0].split(',').nth(2).unwrap().parse().unwrap();
    let (_, base, _) = run_in(dir.path(), &["solve", "--graph", "envelope", "--kappa", "3", "--p", "0", "--out", "b"]);
    let base_r: f64 = base.split("r=").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap();
    assert!((r0 - base_r).abs() < 1e-6);

    let (code, _, _) = run_in(
        dir.path(),
        &["landscape", "--graph", "envelope", "--kappa", "3", "--points", "5", "--gamma-range", "0.1", "0.2", "--beta-range", "1.0", "1.5", "--out", "zoom"],
    );
    assert_eq!(code, 0);
    let text = fs::read_to_string(dir.path().join("zoom/landscape.csv")).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 25);
    assert!(rows[0].starts_with("0.1,1.0,"));
}

#[test]
fn bench_small_set() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = run_in(dir.path(), &["bench", "--n", "5", "--chi", "3", "--p", "1", "--hops", "1", "--out", "b"]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("12 graphs"));
    let instances = fs::read_to_string(dir.path().join("b/instances.csv")).unwrap();
    let ring_p1 = data_rows(&instances).into_iter().filter(|r| r.contains(",xy_ring,1,")).count();
    assert_eq!(ring_p1, 12);
    let paired = fs::read_to_string(dir.path().join("b/paired.csv")).unwrap();
    assert_eq!(data_rows(&paired).len(), 24);
    let aggregate = fs::read_to_string(dir.path().join("b/aggregate.csv")).unwrap();
    assert_eq!(data_rows(&aggregate).len(), 4);
}

#[test]
fn bench_spread_is_small_for_chi3_n6() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bench.json"),
        r#"{"graph": {"enumerate": {"n": 6, "chi": 3}}, "p": 1, "optimizer": {"hops": 2},
            "bench": {"mixers": [{"family": "xy_ring"}]}, "output_dir": "b"}"#,
    )
    .unwrap();
    let (code, _, stderr) = run_in(dir.path(), &["bench", "--config", "bench.json"]);
    assert_eq!(code, 0, "{stderr}");
    let aggregate = fs::read_to_string(dir.path().join("b/aggregate.csv")).unwrap();
    for row in data_rows(&aggregate) {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[2], "64");
        let std: f64 = cols[5].parse().unwrap();
        assert!(std < 0.1, "{row}");
    }
}
