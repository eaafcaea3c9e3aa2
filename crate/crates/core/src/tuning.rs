//! Order/window tuning: measure the longest window each series order keeps
//! within a tolerance, map the (order, window) error surface, and pick the
//! order that minimizes projected total simulation time
//! `t_total = t_one · T / t_w`.

use std::io::Write;
use std::time::Instant;

use crate::error::SimError;
use crate::machine::MachineState;
use crate::network::Stage;
use crate::rk4::{rk4_step, Rk4Config};
use crate::sas::build_window;
use crate::system::SystemModel;

/// Measurement setup shared by the tuning operations. Window candidates are
/// integer multiples of the reference step so the RK4 comparison is exact at
/// shared grid points.
#[derive(Clone, Debug)]
pub struct TuningConfig {
    /// Reference integrator step (s).
    pub rk4_h: f64,
    /// Window candidates in units of `rk4_h`, ascending.
    pub candidates: Vec<usize>,
    /// Sample step used when costing one window's evaluations.
    pub sample_step: f64,
    /// Timing repetitions per cost measurement (median taken).
    pub timing_reps: usize,
}

impl Default for TuningConfig {
    fn default() -> Self {
        TuningConfig {
            rk4_h: 1.0 / 1200.0,
            candidates: default_window_candidates(),
            sample_step: 1.0 / 240.0,
            timing_reps: 20,
        }
    }
}

/// Default candidate grid, 1/1200 s units spanning 0.005 s .. 0.5 s.
pub fn default_window_candidates() -> Vec<usize> {
    vec![
        6, 12, 18, 24, 36, 48, 60, 72, 96, 120, 144, 168, 192, 216, 240, 288, 336, 360, 420, 480,
        540, 600,
    ]
}

/// Post-fault probe states: the state at fault clearing plus three states
/// sampled from the first post-fault swing, where the window error peaks.
pub fn probe_states(
    model: &SystemModel,
    initial: &[MachineState],
) -> Result<Vec<Vec<MachineState>>, SimError> {
    let t_clear = model.network.t_clear;
    if !t_clear.is_finite() {
        return Err(SimError::BadConfig(
            "tuning needs a scenario with a fault event".into(),
        ));
    }
    let offsets = [0.0, 0.2, 0.4, 0.6];
    let horizon = t_clear + offsets[offsets.len() - 1];
    let cfg = Rk4Config {
        h: 1.0 / 1200.0,
        duration: horizon,
        sample_step: 1.0 / 1200.0,
    };
    // re-run and pick the states at the probe instants
    let mut state = initial.to_vec();
    let steps = (horizon / cfg.h + 1e-9).round() as usize;
    let mut probes = Vec::new();
    let mut want: Vec<usize> = offsets
        .iter()
        .map(|o| ((t_clear + o) / cfg.h).round() as usize)
        .collect();
    want.reverse();
    for step in 0..=steps {
        if want.last() == Some(&step) {
            probes.push(state.clone());
            want.pop();
        }
        if step == steps {
            break;
        }
        let t_mid = step as f64 * cfg.h + 0.5 * cfg.h;
        let stage = model.network.stage_at(t_mid);
        state = rk4_step(&state, cfg.h, model, stage);
    }
    if probes.len() != offsets.len() {
        return Err(SimError::BadConfig("probe sampling failed".into()));
    }
    Ok(probes)
}

/// Per-grid-point error prefix maxima of one SAS window against a fine RK4
/// reference from the same state (post-fault stage). Entry `j` is the max
/// over the first `j + 1` grid points of the max angle/speed deviation
/// across machines.
fn window_error_profile(
    model: &SystemModel,
    probe: &[MachineState],
    order: usize,
    h: f64,
    max_steps: usize,
) -> Vec<f64> {
    let sas = match build_window(probe, model, Stage::PostFault, order) {
        Ok(w) => w,
        Err(_) => return vec![f64::INFINITY; max_steps],
    };
    let mut profile = Vec::with_capacity(max_steps);
    let mut state = probe.to_vec();
    let mut running = 0.0f64;
    for step in 1..=max_steps {
        state = rk4_step(&state, h, model, Stage::PostFault);
        let t = step as f64 * h;
        let (s_sas, _) = sas.evaluate(t);
        let mut e = 0.0f64;
        for (a, b) in s_sas.iter().zip(&state) {
            e = e.max((a.delta - b.delta).abs()).max((a.omega - b.omega).abs());
        }
        if !e.is_finite() {
            e = f64::INFINITY;
        }
        running = running.max(e);
        profile.push(running);
    }
    profile
}

/// Largest candidate window such that every probe state stays within `tol`
/// of the fine RK4 reference over the whole window. `None` when no
/// candidate satisfies the tolerance at this order.
pub fn max_window(
    model: &SystemModel,
    probes: &[Vec<MachineState>],
    order: usize,
    tol: f64,
    cfg: &TuningConfig,
) -> Option<f64> {
    let max_c = *cfg.candidates.iter().max()?;
    let profiles: Vec<Vec<f64>> = probes
        .iter()
        .map(|p| window_error_profile(model, p, order, cfg.rk4_h, max_c))
        .collect();
    cfg.candidates
        .iter()
        .rev()
        .find(|&&c| profiles.iter().all(|prof| prof[c - 1] <= tol))
        .map(|&c| c as f64 * cfg.rk4_h)
}

/// One cell of the error surface.
#[derive(Clone, Debug)]
pub struct ErrorCell {
    pub order: usize,
    pub t_w: f64,
    pub max_err: f64,
}

/// Max error over one post-fault window for each (order, window) pair;
/// divergent cells carry `+inf`.
pub fn error_map(
    model: &SystemModel,
    probe: &[MachineState],
    orders: &[usize],
    cfg: &TuningConfig,
) -> Vec<ErrorCell> {
    let max_c = cfg.candidates.iter().copied().max().unwrap_or(0);
    let mut cells = Vec::new();
    for &order in orders {
        let profile = window_error_profile(model, probe, order, cfg.rk4_h, max_c);
        for &c in &cfg.candidates {
            cells.push(ErrorCell {
                order,
                t_w: c as f64 * cfg.rk4_h,
                max_err: profile[c - 1],
            });
        }
    }
    cells
}

/// Median wall time of building one window and evaluating it on the sample
/// grid, warmup discarded.
pub fn measure_t_one(
    model: &SystemModel,
    probe: &[MachineState],
    order: usize,
    t_w: f64,
    cfg: &TuningConfig,
) -> f64 {
    let evals = (t_w / cfg.sample_step).ceil().max(1.0) as usize;
    let reps = cfg.timing_reps.max(5);
    let mut samples = Vec::with_capacity(reps);
    for rep in 0..reps + 3 {
        let start = Instant::now();
        let w = build_window(probe, model, Stage::PostFault, order).expect("finite window");
        let mut acc = 0.0;
        for j in 1..=evals {
            let (s, _) = w.evaluate(j as f64 * t_w / evals as f64);
            acc += s[0].delta;
        }
        std::hint::black_box(acc);
        if rep >= 3 {
            samples.push(start.elapsed().as_secs_f64());
        }
    }
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    samples[samples.len() / 2]
}

#[derive(Clone, Debug)]
pub struct CostRow {
    pub order: usize,
    pub tol: f64,
    /// Longest accurate window (s); `None` when the tolerance is
    /// unreachable at this order.
    pub t_w_max: Option<f64>,
    /// Measured cost of one window (s).
    pub t_one: f64,
    /// Projected window count for the duration.
    pub n_w: f64,
    /// Projected total simulation time (s).
    pub t_total: f64,
}

#[derive(Clone, Debug)]
pub struct CostReport {
    pub duration: f64,
    pub rows: Vec<CostRow>,
    /// `(order, t_w)` minimizing projected total time, ties toward the
    /// smaller order.
    pub best: Option<(usize, f64)>,
}

/// Pick the order minimizing `t_one(K) · T / t_w_max(K, tol)` over the
/// candidate orders. Errors only when every candidate misses the tolerance.
pub fn optimal_order(
    model: &SystemModel,
    probes: &[Vec<MachineState>],
    tol: f64,
    orders: &[usize],
    duration: f64,
    cfg: &TuningConfig,
) -> Result<CostReport, SimError> {
    let mut rows = Vec::new();
    let mut best: Option<(usize, f64, f64)> = None;
    for &order in orders {
        let t_w_max = max_window(model, probes, order, tol, cfg);
        let row = match t_w_max {
            None => CostRow {
                order,
                tol,
                t_w_max: None,
                t_one: f64::NAN,
                n_w: f64::NAN,
                t_total: f64::INFINITY,
            },
            Some(t_w) => {
                let t_one = measure_t_one(model, &probes[0], order, t_w, cfg);
                let n_w = duration / t_w;
                let t_total = t_one * n_w;
                if best.map_or(true, |(_, _, bt)| t_total < bt) {
                    best = Some((order, t_w, t_total));
                }
                CostRow {
                    order,
                    tol,
                    t_w_max: Some(t_w),
                    t_one,
                    n_w,
                    t_total,
                }
            }
        };
        rows.push(row);
    }
    if best.is_none() {
        return Err(SimError::BadConfig(format!(
            "tolerance {tol} unreachable at every candidate order"
        )));
    }
    Ok(CostReport {
        duration,
        rows,
        best: best.map(|(k, t_w, _)| (k, t_w)),
    })
}

/// Shared CSV layout: `K,t_w,tol,max_err,t_one,t_total`, empty fields where
/// a quantity does not apply.
pub fn write_error_map_csv<W: Write>(cells: &[ErrorCell], mut w: W) -> std::io::Result<()> {
    writeln!(w, "K,t_w,tol,max_err,t_one,t_total")?;
    for c in cells {
        writeln!(w, "{},{},,{},,", c.order, c.t_w, c.max_err)?;
    }
    Ok(())
}

pub fn write_cost_csv<W: Write>(report: &CostReport, mut w: W) -> std::io::Result<()> {
    writeln!(w, "K,t_w,tol,max_err,t_one,t_total")?;
    for r in &report.rows {
        match r.t_w_max {
            Some(t_w) => writeln!(
                w,
                "{},{},{},,{},{}",
                r.order, t_w, r.tol, r.t_one, r.t_total
            )?,
            None => writeln!(w, "{},,{},,,", r.order, r.tol)?,
        }
    }
    Ok(())
}
