//! `dtsim` — command-line front end for the power-series transient
//! stability simulator.
//!
//! Subcommands:
//! - `simulate`: run one scenario with the series method or the RK4
//!   reference and write the trajectory CSV, a timing report, a plot, and a
//!   run manifest.
//! - `compare`: run the series method against a baseline on a shared sample
//!   grid and write the per-channel error series plus a max-abs summary.
//! - `sweep`: map accuracy over (order, window) candidates and report the
//!   projected-cost-optimal pair for a tolerance.
//! - `reduce`: rewrite a bus-level scenario with its reduced stage matrices.
//!
//! Exit codes: 0 success, 2 invalid input or configuration, 3 divergence
//! (the last good time is reported on stderr).

mod plot;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dtsim_core::rk4::{rk4_simulate, Rk4Config};
use dtsim_core::sas::{simulate, SimConfig};
use dtsim_core::scenario::{Scenario, SystemScenario};
use dtsim_core::smib;
use dtsim_core::trajectory::Trajectory;
use dtsim_core::tuning::{
    error_map, max_window, optimal_order, probe_states, write_cost_csv, write_error_map_csv,
    TuningConfig,
};
use dtsim_core::SimError;

const RK4_H_DEFAULT: f64 = 1.0 / 1200.0;

#[derive(Parser)]
#[command(name = "dtsim", version, about = "Transient stability simulation by recursive power series", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write the trajectory.
    Simulate(SimulateArgs),
    /// Run the series method against a baseline and write the error series.
    Compare(CompareArgs),
    /// Map accuracy over (order, window) and recommend a pair for a tolerance.
    Sweep(SweepArgs),
    /// Rewrite a scenario with its network reduced to the machine nodes.
    Reduce(ReduceArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Recursive power-series windows.
    Dtm,
    /// Fixed-step fourth-order Runge-Kutta reference.
    Rk4,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Dtm => "dtm",
            Method::Rk4 => "rk4",
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Integration method.
    #[arg(long, value_enum, default_value = "dtm")]
    method: Method,
    /// Series truncation order K (dtm).
    #[arg(long, default_value_t = 12)]
    order: usize,
    /// Window length in seconds (dtm).
    #[arg(long, default_value_t = 0.2)]
    window: f64,
    /// Output sample step in seconds; for rk4 also the integration step.
    /// Defaults: 1/240 s (dtm), 1/1200 s (rk4).
    #[arg(long)]
    step: Option<f64>,
    /// Total simulated time in seconds.
    #[arg(long, default_value_t = 6.0)]
    duration: f64,
    /// Build window coefficients on a worker pool (dtm, multi-machine).
    #[arg(long)]
    parallel: bool,
    /// Worker count for --parallel (0 = all available cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Baseline the series run is compared against. `rk4` is the reference
    /// integrator at 1/1200 s; `dtm` re-runs the identical series
    /// configuration (a self-check that must report zero error).
    #[arg(long, value_enum, default_value = "rk4")]
    method: Method,
    /// Series truncation order K.
    #[arg(long, default_value_t = 12)]
    order: usize,
    /// Window length in seconds.
    #[arg(long, default_value_t = 0.2)]
    window: f64,
    /// Shared sample step in seconds; must be an integer multiple of the
    /// reference step 1/1200 s.
    #[arg(long, default_value_t = 1.0 / 240.0)]
    step: f64,
    /// Total simulated time in seconds.
    #[arg(long, default_value_t = 6.0)]
    duration: f64,
    /// Build window coefficients on a worker pool (multi-machine).
    #[arg(long)]
    parallel: bool,
    /// Worker count for --parallel (0 = all available cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Scenario JSON file (must carry a fault event).
    #[arg(long)]
    scenario: PathBuf,
    /// Inclusive order range, e.g. `4..16`.
    #[arg(long, default_value = "4..16")]
    sweep_orders: String,
    /// Comma-separated window lengths in seconds, e.g. `0.05,0.1,0.2,0.3`.
    /// Defaults to a grid spanning 0.005 s .. 0.5 s.
    #[arg(long)]
    sweep_windows: Option<String>,
    /// Accuracy tolerance on the post-fault angle/speed error.
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    /// Projected run duration used for the cost model.
    #[arg(long, default_value_t = 6.0)]
    duration: f64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ReduceArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

/// Failure classified into the process exit code.
enum Failure {
    /// Exit 2: bad input file, bad flags, inconsistent configuration.
    Invalid(String),
    /// Exit 3: the method diverged; `last_good` is the latest time with a
    /// trustworthy state.
    Divergence { last_good: f64, detail: String },
}

impl Failure {
    fn from_sim(e: SimError) -> Failure {
        match e {
            SimError::WindowBlowUp { window, t_start } => Failure::Divergence {
                last_good: t_start,
                detail: format!("series blow-up in window {window}"),
            },
            SimError::Divergence { step, t } => Failure::Divergence {
                last_good: t - (t / step as f64),
                detail: format!("non-finite state at t = {t:.6} s"),
            },
            other => Failure::Invalid(other.to_string()),
        }
    }
}

/// Everything needed to reproduce a run: inputs, fully resolved
/// configuration, and the artifacts written. Timings are deliberately
/// excluded; re-running with an identical manifest reproduces every CSV
/// byte for byte.
#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    command: String,
    scenario: String,
    scenario_name: String,
    config: serde_json::Value,
    out_dir: String,
    outputs: Vec<String>,
}

fn write_manifest(
    out: &Path,
    command: &str,
    scenario_path: &Path,
    scenario_name: &str,
    config: serde_json::Value,
    outputs: &[&str],
) -> Result<(), Failure> {
    let manifest = RunManifest {
        tool: "dtsim",
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        scenario: scenario_path.display().to_string(),
        scenario_name: scenario_name.to_string(),
        config,
        out_dir: out.display().to_string(),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(out.join("manifest.json"), text + "\n")
        .map_err(|e| Failure::Invalid(format!("writing manifest: {e}")))
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    Scenario::from_path(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn scenario_name(s: &Scenario) -> &str {
    match s {
        Scenario::Smib(s) => &s.name,
        Scenario::MultiMachine(s) => &s.name,
    }
}

fn ensure_out(out: &Path) -> Result<(), Failure> {
    fs::create_dir_all(out).map_err(|e| Failure::Invalid(format!("{}: {e}", out.display())))
}

fn write_out(out: &Path, file: &str, content: &str) -> Result<(), Failure> {
    fs::write(out.join(file), content)
        .map_err(|e| Failure::Invalid(format!("writing {file}: {e}")))
}

/// Run one scenario with the requested method and resolved sample step.
fn run_method(
    scenario: &Scenario,
    method: Method,
    order: usize,
    window: f64,
    step: f64,
    duration: f64,
    parallel: bool,
    workers: usize,
) -> Result<Trajectory, Failure> {
    match (scenario, method) {
        (Scenario::Smib(s), Method::Dtm) => {
            if order < 1 || window <= 0.0 || step <= 0.0 || duration < window {
                return Err(Failure::Invalid(
                    "require order >= 1 and 0 < step, window <= duration".into(),
                ));
            }
            smib::sas_simulate(&s.params, order, window, duration, step)
                .map_err(Failure::from_sim)
        }
        (Scenario::Smib(s), Method::Rk4) => {
            if step <= 0.0 || duration <= 0.0 {
                return Err(Failure::Invalid("step and duration must be positive".into()));
            }
            Ok(smib::rk4_simulate(&s.params, step, duration))
        }
        (Scenario::MultiMachine(sys), Method::Dtm) => {
            let case = sys
                .build()
                .map_err(|e| Failure::Invalid(e.to_string()))?;
            let mut cfg = SimConfig::new(order, window, duration, step);
            cfg.parallel = parallel;
            cfg.workers = if workers == 0 {
                std::thread::available_parallelism().map_or(1, |n| n.get())
            } else {
                workers
            };
            simulate(&case.model, &case.initial, &cfg).map_err(Failure::from_sim)
        }
        (Scenario::MultiMachine(sys), Method::Rk4) => {
            let case = sys
                .build()
                .map_err(|e| Failure::Invalid(e.to_string()))?;
            let cfg = Rk4Config {
                h: step,
                duration,
                sample_step: step,
            };
            rk4_simulate(&case.model, &case.initial, &cfg).map_err(Failure::from_sim)
        }
    }
}

fn cmd_simulate(a: &SimulateArgs) -> Result<(), Failure> {
    let scenario = load_scenario(&a.scenario)?;
    let step = a.step.unwrap_or(match a.method {
        Method::Dtm => 1.0 / 240.0,
        Method::Rk4 => RK4_H_DEFAULT,
    });
    ensure_out(&a.out)?;

    let traj = run_method(
        &scenario, a.method, a.order, a.window, step, a.duration, a.parallel, a.workers,
    )?;

    let mut csv = Vec::new();
    traj.write_csv(&mut csv)
        .map_err(|e| Failure::Invalid(format!("trajectory CSV: {e}")))?;
    write_out(&a.out, "trajectory.csv", &String::from_utf8(csv).unwrap())?;

    #[derive(Serialize)]
    struct Timing {
        method: &'static str,
        windows: usize,
        window_starts: Vec<f64>,
        per_window_ms: Vec<f64>,
        total_ms: f64,
    }
    let timing = Timing {
        method: a.method.name(),
        windows: traj.window_starts.len(),
        window_starts: traj.window_starts.clone(),
        per_window_ms: traj.window_wall.iter().map(|s| s * 1e3).collect(),
        total_ms: traj.total_wall * 1e3,
    };
    write_out(
        &a.out,
        "timing.json",
        &(serde_json::to_string_pretty(&timing).unwrap() + "\n"),
    )?;
    write_out(
        &a.out,
        "trajectory.svg",
        &plot::trajectory_svg(&traj, &format!("rotor angles — {}", a.method.name())),
    )?;

    write_manifest(
        &a.out,
        "simulate",
        &a.scenario,
        scenario_name(&scenario),
        serde_json::json!({
            "method": a.method.name(),
            "order": a.order,
            "window": a.window,
            "step": step,
            "duration": a.duration,
            "parallel": a.parallel,
            "workers": a.workers,
        }),
        &["trajectory.csv", "timing.json", "trajectory.svg"],
    )?;

    println!(
        "simulate: {} samples, {} machines, {} windows, {:.1} ms",
        traj.times.len(),
        traj.n_machines(),
        traj.window_starts.len(),
        traj.total_wall * 1e3
    );
    Ok(())
}

/// Per-channel absolute error series of `a` against `b` on their shared
/// (identical) time grid.
fn error_series(a: &Trajectory, b: &Trajectory) -> Result<(Trajectory, [f64; 5]), Failure> {
    if a.n_machines() != b.n_machines() {
        return Err(Failure::Invalid("machine counts differ".into()));
    }
    if a.times.len() != b.times.len()
        || a.times
            .iter()
            .zip(&b.times)
            .any(|(x, y)| (x - y).abs() > 1e-9)
    {
        return Err(Failure::Invalid(
            "sample grids are misaligned; choose a step that is an integer multiple of the reference step".into(),
        ));
    }
    let mut err = Trajectory {
        machines: vec![Default::default(); a.n_machines()],
        ..Default::default()
    };
    let mut max = [0.0f64; 5];
    for (row, &t) in a.times.iter().enumerate() {
        let per: Vec<(f64, f64, f64, f64, f64)> = a
            .machines
            .iter()
            .zip(&b.machines)
            .map(|(ca, cb)| {
                let e = (
                    (ca.delta[row] - cb.delta[row]).abs(),
                    (ca.omega[row] - cb.omega[row]).abs(),
                    (ca.ep_q[row] - cb.ep_q[row]).abs(),
                    (ca.ep_d[row] - cb.ep_d[row]).abs(),
                    (ca.p_e[row] - cb.p_e[row]).abs(),
                );
                max[0] = max[0].max(e.0);
                max[1] = max[1].max(e.1);
                max[2] = max[2].max(e.2);
                max[3] = max[3].max(e.3);
                max[4] = max[4].max(e.4);
                e
            })
            .collect();
        err.push_sample(t, &per);
    }
    Ok((err, max))
}

fn cmd_compare(a: &CompareArgs) -> Result<(), Failure> {
    let scenario = load_scenario(&a.scenario)?;
    ensure_out(&a.out)?;

    // reference grid check up front: the shared sample step must sit on the
    // reference integrator's step grid
    let ratio = a.step / RK4_H_DEFAULT;
    if a.method == Method::Rk4 && ((ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 - 1e-9) {
        return Err(Failure::Invalid(format!(
            "sample step {} is not an integer multiple of the reference step {RK4_H_DEFAULT}",
            a.step
        )));
    }

    let dtm = run_method(
        &scenario, Method::Dtm, a.order, a.window, a.step, a.duration, a.parallel, a.workers,
    )?;
    let baseline = match a.method {
        Method::Dtm => run_method(
            &scenario, Method::Dtm, a.order, a.window, a.step, a.duration, a.parallel, a.workers,
        )?,
        Method::Rk4 => {
            // integrate at the reference step, sample on the shared grid
            match &scenario {
                Scenario::Smib(s) => {
                    let fine = smib::rk4_simulate(&s.params, RK4_H_DEFAULT, a.duration);
                    subsample(&fine, a.step)?
                }
                Scenario::MultiMachine(sys) => {
                    let case = sys.build().map_err(|e| Failure::Invalid(e.to_string()))?;
                    let cfg = Rk4Config {
                        h: RK4_H_DEFAULT,
                        duration: a.duration,
                        sample_step: a.step,
                    };
                    rk4_simulate(&case.model, &case.initial, &cfg).map_err(Failure::from_sim)?
                }
            }
        }
    };

    let (err, max) = error_series(&dtm, &baseline)?;
    let mut csv = Vec::new();
    err.write_csv(&mut csv)
        .map_err(|e| Failure::Invalid(format!("error CSV: {e}")))?;
    // same layout as a trajectory, but every channel is an absolute error
    let csv = String::from_utf8(csv).unwrap();
    let (header, body) = csv.split_once('\n').unwrap_or((csv.as_str(), ""));
    let header = header
        .replace("delta_", "delta_err_")
        .replace("omega_", "omega_err_")
        .replace("epq_", "epq_err_")
        .replace("epd_", "epd_err_")
        .replace("pe_", "pe_err_");
    write_out(&a.out, "error.csv", &format!("{header}\n{body}"))?;

    #[derive(Serialize)]
    struct Summary {
        baseline: &'static str,
        compared: usize,
        max_delta: f64,
        max_omega: f64,
        max_epq: f64,
        max_epd: f64,
        max_pe: f64,
    }
    let summary = Summary {
        baseline: a.method.name(),
        compared: err.times.len(),
        max_delta: max[0],
        max_omega: max[1],
        max_epq: max[2],
        max_epd: max[3],
        max_pe: max[4],
    };
    write_out(
        &a.out,
        "summary.json",
        &(serde_json::to_string_pretty(&summary).unwrap() + "\n"),
    )?;

    write_manifest(
        &a.out,
        "compare",
        &a.scenario,
        scenario_name(&scenario),
        serde_json::json!({
            "baseline": a.method.name(),
            "order": a.order,
            "window": a.window,
            "step": a.step,
            "duration": a.duration,
            "parallel": a.parallel,
            "workers": a.workers,
        }),
        &["error.csv", "summary.json"],
    )?;

    println!(
        "compare vs {}: max |Δδ| = {:.3e}, |Δω| = {:.3e}, |Δe'_q| = {:.3e}, |Δe'_d| = {:.3e}, |ΔP_e| = {:.3e} over {} samples",
        a.method.name(),
        max[0],
        max[1],
        max[2],
        max[3],
        max[4],
        err.times.len()
    );
    Ok(())
}

/// Keep only the samples lying on the `step` grid.
fn subsample(traj: &Trajectory, step: f64) -> Result<Trajectory, Failure> {
    let mut out = Trajectory {
        machines: vec![Default::default(); traj.n_machines()],
        ..Default::default()
    };
    let mut next = 0usize;
    for (row, &t) in traj.times.iter().enumerate() {
        let want = next as f64 * step;
        if (t - want).abs() <= 1e-9 {
            let per: Vec<(f64, f64, f64, f64, f64)> = traj
                .machines
                .iter()
                .map(|ch| (ch.delta[row], ch.omega[row], ch.ep_q[row], ch.ep_d[row], ch.p_e[row]))
                .collect();
            out.push_sample(t, &per);
            next += 1;
        }
    }
    if out.times.len() < 2 {
        return Err(Failure::Invalid(
            "sample grids are misaligned; choose a step that is an integer multiple of the reference step".into(),
        ));
    }
    Ok(out)
}

fn parse_order_range(s: &str) -> Result<Vec<usize>, Failure> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| Failure::Invalid(format!("--sweep-orders expects A..B, got {s:?}")))?;
    let a: usize = a
        .trim()
        .parse()
        .map_err(|_| Failure::Invalid(format!("bad order {a:?}")))?;
    let b: usize = b
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|_| Failure::Invalid(format!("bad order {b:?}")))?;
    if a < 1 || b < a {
        return Err(Failure::Invalid(format!(
            "--sweep-orders needs 1 <= A <= B, got {s:?}"
        )));
    }
    Ok((a..=b).collect())
}

fn parse_window_list(s: &str, rk4_h: f64) -> Result<Vec<usize>, Failure> {
    let mut units = Vec::new();
    for part in s.split(',') {
        let w: f64 = part
            .trim()
            .parse()
            .map_err(|_| Failure::Invalid(format!("bad window {part:?}")))?;
        let u = (w / rk4_h).round() as i64;
        if u < 1 || (w / rk4_h - u as f64).abs() > 1e-6 {
            return Err(Failure::Invalid(format!(
                "window {w} is not a positive multiple of the reference step {rk4_h}"
            )));
        }
        units.push(u as usize);
    }
    units.sort_unstable();
    units.dedup();
    Ok(units)
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), Failure> {
    let scenario = load_scenario(&a.scenario)?;
    let sys: &SystemScenario = match &scenario {
        Scenario::MultiMachine(s) => s,
        Scenario::Smib(_) => {
            return Err(Failure::Invalid(
                "sweep needs a multi-machine scenario with a fault event".into(),
            ))
        }
    };
    if !(a.tol > 0.0 && a.duration > 0.0) {
        return Err(Failure::Invalid("tol and duration must be positive".into()));
    }
    let orders = parse_order_range(&a.sweep_orders)?;
    let mut cfg = TuningConfig::default();
    if let Some(list) = &a.sweep_windows {
        cfg.candidates = parse_window_list(list, cfg.rk4_h)?;
    }
    ensure_out(&a.out)?;

    let case = sys.build().map_err(|e| Failure::Invalid(e.to_string()))?;
    let probes = probe_states(&case.model, &case.initial).map_err(Failure::from_sim)?;

    let cells = error_map(&case.model, &probes[0], &orders, &cfg);
    let mut csv = Vec::new();
    write_error_map_csv(&cells, &mut csv)
        .map_err(|e| Failure::Invalid(format!("error-map CSV: {e}")))?;
    write_out(&a.out, "error_map.csv", &String::from_utf8(csv).unwrap())?;
    write_out(
        &a.out,
        "error_map.svg",
        &plot::heatmap_svg(&cells, "max window error by order and window length"),
    )?;

    let report = optimal_order(&case.model, &probes, a.tol, &orders, a.duration, &cfg)
        .map_err(Failure::from_sim)?;
    let mut csv = Vec::new();
    write_cost_csv(&report, &mut csv).map_err(|e| Failure::Invalid(format!("cost CSV: {e}")))?;
    write_out(&a.out, "cost.csv", &String::from_utf8(csv).unwrap())?;

    let (best_k, best_w) = report.best.expect("optimal_order errors when empty");
    #[derive(Serialize)]
    struct Recommendation {
        tol: f64,
        duration: f64,
        best_order: usize,
        best_window: f64,
        /// Longest tolerance-satisfying window per order.
        max_window_by_order: Vec<(usize, Option<f64>)>,
    }
    let rec = Recommendation {
        tol: a.tol,
        duration: a.duration,
        best_order: best_k,
        best_window: best_w,
        max_window_by_order: orders
            .iter()
            .map(|&k| (k, max_window(&case.model, &probes, k, a.tol, &cfg)))
            .collect(),
    };
    write_out(
        &a.out,
        "recommendation.json",
        &(serde_json::to_string_pretty(&rec).unwrap() + "\n"),
    )?;

    write_manifest(
        &a.out,
        "sweep",
        &a.scenario,
        scenario_name(&scenario),
        serde_json::json!({
            "orders": orders,
            "windows": cfg.candidates.iter().map(|&c| c as f64 * cfg.rk4_h).collect::<Vec<_>>(),
            "tol": a.tol,
            "duration": a.duration,
        }),
        &["error_map.csv", "error_map.svg", "cost.csv", "recommendation.json"],
    )?;

    println!(
        "sweep: tol {:.1e} -> recommended K* = {best_k}, t_w* = {best_w:.4} s",
        a.tol
    );
    Ok(())
}

fn cmd_reduce(a: &ReduceArgs) -> Result<(), Failure> {
    let scenario = load_scenario(&a.scenario)?;
    let sys = match &scenario {
        Scenario::MultiMachine(s) => s,
        Scenario::Smib(_) => {
            return Err(Failure::Invalid(
                "reduce needs a multi-machine scenario".into(),
            ))
        }
    };
    ensure_out(&a.out)?;
    let reduced = sys
        .to_reduced()
        .map_err(|e| Failure::Invalid(e.to_string()))?;
    let stem = a
        .scenario
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scenario");
    let file = if stem.ends_with("_reduced") {
        format!("{stem}.json")
    } else {
        format!("{stem}_reduced.json")
    };
    Scenario::MultiMachine(reduced)
        .to_path(&a.out.join(&file))
        .map_err(|e| Failure::Invalid(e.to_string()))?;

    write_manifest(
        &a.out,
        "reduce",
        &a.scenario,
        scenario_name(&scenario),
        serde_json::json!({}),
        &[&file],
    )?;
    println!("reduce: wrote {}", a.out.join(&file).display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Reduce(a) => cmd_reduce(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Divergence { last_good, detail }) => {
            eprintln!("divergence: {detail}; last good time t = {last_good:.6} s");
            ExitCode::from(3)
        }
    }
}
