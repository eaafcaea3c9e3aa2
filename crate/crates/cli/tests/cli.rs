//! End-to-end tests of the `dtsim` binary: exit codes, artifact layout,
//! byte-level determinism, and the documented behavior of every subcommand.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dtsim"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_rk4_writes_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--scenario",
        data("ieee39.json").to_str().unwrap(),
        "--method",
        "rk4",
        "--duration",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    // header + initial sample + one row per 1/1200 s step over 1 s
    assert_eq!(csv.lines().count(), 1 + 1201);
    assert!(csv.starts_with("t,delta_1,omega_1,epq_1,epd_1,pe_1,"));
    assert!(dir.path().join("manifest.json").exists());
    assert!(dir.path().join("timing.json").exists());
    assert!(dir.path().join("trajectory.svg").exists());
}

#[test]
fn identical_configuration_reproduces_byte_identical_csv() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let args = |out: &Path| {
        vec![
            "simulate".to_string(),
            "--scenario".into(),
            data("ieee39.json").display().to_string(),
            "--order".into(),
            "10".into(),
            "--window".into(),
            "0.2".into(),
            "--duration".into(),
            "2".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    assert_ok(&bin().args(args(d1.path())).output().unwrap());
    assert_ok(&bin().args(args(d2.path())).output().unwrap());
    let a = fs::read(d1.path().join("trajectory.csv")).unwrap();
    let b = fs::read(d2.path().join("trajectory.csv")).unwrap();
    assert_eq!(a, b, "trajectory bytes differ between identical runs");
    // manifests agree on everything but the output directory
    let mut ma = json(&d1.path().join("manifest.json"));
    let mut mb = json(&d2.path().join("manifest.json"));
    ma["out_dir"] = serde_json::Value::Null;
    mb["out_dir"] = serde_json::Value::Null;
    assert_eq!(ma, mb);
}

#[test]
fn invalid_input_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap().to_string();

    let missing = run(&["simulate", "--scenario", "/nonexistent.json", "--out", &out_dir]);
    assert_eq!(missing.status.code(), Some(2));

    let bad_order = run(&[
        "simulate",
        "--scenario",
        data("ieee39.json").to_str().unwrap(),
        "--order",
        "0",
        "--out",
        &out_dir,
    ]);
    assert_eq!(bad_order.status.code(), Some(2));

    // compare on a sample grid that misses the reference step grid
    let misaligned = run(&[
        "compare",
        "--scenario",
        data("ieee39.json").to_str().unwrap(),
        "--step",
        "0.001",
        "--duration",
        "2",
        "--out",
        &out_dir,
    ]);
    assert_eq!(misaligned.status.code(), Some(2));
}

#[test]
fn series_blow_up_exits_with_code_three_and_reports_last_good_time() {
    let dir = tempfile::tempdir().unwrap();
    let scen = dir.path().join("blowup.json");
    fs::write(
        &scen,
        r#"{"kind":"smib","name":"blow-up","h":3.0,"d":3.0,"p_max":1e300,
            "p_m":0.44,"omega_s":376.99111843077515,"delta0":0.26,"omega0":0.002}"#,
    )
    .unwrap();
    let out = run(&[
        "simulate",
        "--scenario",
        scen.to_str().unwrap(),
        "--order",
        "20",
        "--window",
        "0.1",
        "--duration",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("last good time"),
        "stderr must report the last good time: {stderr}"
    );
}

#[test]
fn self_comparison_reports_exactly_zero_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "compare",
        "--scenario",
        data("ieee39.json").to_str().unwrap(),
        "--method",
        "dtm",
        "--order",
        "12",
        "--window",
        "0.2",
        "--duration",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    let s = json(&dir.path().join("summary.json"));
    for key in ["max_delta", "max_omega", "max_epq", "max_epd", "max_pe"] {
        assert_eq!(s[key].as_f64().unwrap(), 0.0, "{key} must be exactly zero");
    }
}

#[test]
fn lower_order_yields_strictly_larger_error_than_higher_order() {
    let err_at = |order: &str| -> f64 {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&[
            "compare",
            "--scenario",
            data("ieee39.json").to_str().unwrap(),
            "--order",
            order,
            "--window",
            "0.2",
            "--duration",
            "3",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_ok(&out);
        let s = json(&dir.path().join("summary.json"));
        s["max_delta"].as_f64().unwrap()
    };
    let (e4, e12) = (err_at("4"), err_at("12"));
    assert!(
        e4 > e12,
        "order 4 error ({e4:.3e}) must exceed order 12 error ({e12:.3e})"
    );
    assert!(e4 > 10.0 * e12, "orders should be clearly separated");
}

#[test]
fn compare_writes_the_error_series_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "compare",
        "--scenario",
        data("ieee39.json").to_str().unwrap(),
        "--order",
        "12",
        "--window",
        "0.2",
        "--duration",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    let csv = fs::read_to_string(dir.path().join("error.csv")).unwrap();
    assert!(csv.starts_with("t,delta_err_1,omega_err_1,epq_err_1,epd_err_1,pe_err_1,"));
    // shared 1/240 s grid over 2 s plus the initial sample and header
    assert_eq!(csv.lines().count(), 1 + 481);
    // the first row is the shared initial condition: zero error everywhere
    let first: Vec<f64> = csv
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(first[1..].iter().all(|&v| v == 0.0));
}

#[test]
fn reduce_emits_symmetric_machine_sized_matrices_and_is_idempotent() {
    let d1 = tempfile::tempdir().unwrap();
    let out = run(&[
        "reduce",
        "--scenario",
        data("ieee39.json").to_str().unwrap(),
        "--out",
        d1.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    let reduced_path = d1.path().join("ieee39_reduced.json");
    let doc = json(&reduced_path);
    assert_eq!(doc["kind"], "multi_machine");
    for stage in ["y_pre", "y_fault", "y_post"] {
        let m = doc["network"][stage].as_array().unwrap();
        assert_eq!(m.len(), 10, "{stage} must be machine-sized");
        for (i, row) in m.iter().enumerate() {
            let row = row.as_array().unwrap();
            assert_eq!(row.len(), 10);
            for (j, cell) in row.iter().enumerate() {
                for part in 0..2 {
                    let a = cell[part].as_f64().unwrap();
                    let b = m[j][i][part].as_f64().unwrap();
                    assert!(
                        (a - b).abs() <= 1e-9,
                        "{stage}[{i}][{j}] asymmetric: {a} vs {b}"
                    );
                }
            }
        }
    }

    // an already-reduced scenario passes through byte-identically
    let d2 = tempfile::tempdir().unwrap();
    let out = run(&[
        "reduce",
        "--scenario",
        reduced_path.to_str().unwrap(),
        "--out",
        d2.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    let a = fs::read(&reduced_path).unwrap();
    let b = fs::read(d2.path().join("ieee39_reduced.json")).unwrap();
    assert_eq!(a, b, "pass-through must not rewrite any value");
}

#[test]
fn reduced_scenario_reproduces_the_full_network_run() {
    // the staged matrices written by `reduce` must drive the fault-on and
    // post-fault dynamics exactly as the full bus-level data does
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "reduce",
        "--scenario",
        data("ieee39.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    let reduced = dir.path().join("ieee39_reduced.json");

    let traj = |scen: &Path| -> Vec<u8> {
        let d = tempfile::tempdir().unwrap();
        let out = run(&[
            "simulate",
            "--scenario",
            scen.to_str().unwrap(),
            "--order",
            "10",
            "--window",
            "0.2",
            "--duration",
            "2",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_ok(&out);
        fs::read(d.path().join("trajectory.csv")).unwrap()
    };
    assert_eq!(
        traj(&data("ieee39.json")),
        traj(&reduced),
        "full and reduced scenarios must produce identical trajectories"
    );
}

#[test]
fn sweep_recommends_windows_matching_the_error_map() {
    let run_sweep = |tol: &str, windows: &str| -> serde_json::Value {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&[
            "sweep",
            "--scenario",
            data("ieee39.json").to_str().unwrap(),
            "--sweep-orders",
            "12..12",
            "--sweep-windows",
            windows,
            "--tol",
            tol,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_ok(&out);
        for f in ["error_map.csv", "error_map.svg", "cost.csv", "recommendation.json", "manifest.json"] {
            assert!(dir.path().join(f).exists(), "{f} missing");
        }
        json(&dir.path().join("recommendation.json"))
    };

    // K = 12: the longest window meeting 1e-5 sits near 0.2 s, and meeting
    // 1e-3 near 0.3 s (factor-2 acceptance either way)
    let tight = run_sweep("1e-5", "0.1,0.15,0.2,0.25,0.3,0.4");
    let w5 = tight["best_window"].as_f64().unwrap();
    assert!(
        (0.1..=0.4).contains(&w5),
        "t_w* at tol 1e-5 should be near 0.2 s, got {w5}"
    );

    let loose = run_sweep("1e-3", "0.15,0.2,0.25,0.3,0.35,0.4,0.5,0.6");
    let w3 = loose["best_window"].as_f64().unwrap();
    assert!(
        (0.15..=0.6).contains(&w3),
        "t_w* at tol 1e-3 should be near 0.3 s, got {w3}"
    );
    assert!(w3 > w5, "looser tolerance must admit a longer window");
    assert_eq!(loose["best_order"].as_u64(), Some(12));
}

#[test]
fn sweep_rejects_scenarios_without_a_fault_event() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "sweep",
        "--scenario",
        data("smib.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
