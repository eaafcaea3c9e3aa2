//! Semi-analytical solution engine: recursive generation of the power-series
//! coefficients of one time window, window evaluation, and the multi-window
//! simulation driver with fault-event handling.
//!
//! Coefficients are generated strictly order by order. At order `k` the
//! algebraic images are formed from the state images of orders `0..=k`
//! (rotations become convolutions against each machine's trig pair, the
//! network map is applied linearly per order), then the state images at
//! `k + 1` follow from the differential equations. Every window re-anchors
//! `t = 0` at its start, so coefficients stay local and high powers of
//! absolute time never appear.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::SimError;
use crate::machine::{AlgebraicState, MachineState};
use crate::network::Stage;
use crate::series::{conv_range, Series, TrigPair};
use crate::system::SystemModel;
use crate::trajectory::{ChannelSet, Trajectory};

/// All series of one machine for one window: the four state images, the
/// nine algebraic images and the coupled trig pair.
#[derive(Clone, Debug)]
pub struct MachineWindow {
    pub delta: Series,
    pub omega: Series,
    pub ep_q: Series,
    pub ep_d: Series,
    pub i_d: Series,
    pub i_q: Series,
    pub p_e: Series,
    pub e_x: Series,
    pub e_y: Series,
    pub i_x: Series,
    pub i_y: Series,
    pub e_d: Series,
    pub e_q: Series,
    pub trig: TrigPair,
}

impl MachineWindow {
    fn new(initial: &MachineState, order: usize) -> Self {
        MachineWindow {
            delta: Series::constant(initial.delta, order),
            omega: Series::constant(initial.omega, order),
            ep_q: Series::constant(initial.ep_q, order),
            ep_d: Series::constant(initial.ep_d, order),
            i_d: Series::zeros(order),
            i_q: Series::zeros(order),
            p_e: Series::zeros(order),
            e_x: Series::zeros(order),
            e_y: Series::zeros(order),
            i_x: Series::zeros(order),
            i_y: Series::zeros(order),
            e_d: Series::zeros(order),
            e_q: Series::zeros(order),
            trig: TrigPair::seeded(initial.delta, order),
        }
    }

    fn order_is_finite(&self, k: usize) -> bool {
        [
            &self.delta, &self.omega, &self.ep_q, &self.ep_d, &self.i_d, &self.i_q, &self.p_e,
            &self.e_x, &self.e_y, &self.i_x, &self.i_y, &self.e_d, &self.e_q,
        ]
        .iter()
        .all(|s| s.coeff(k).is_finite())
    }
}

/// The SAS of one time window: every machine's series, anchored at
/// `anchor_time`, built against one stage matrix.
#[derive(Clone, Debug)]
pub struct WindowSAS {
    pub anchor_time: f64,
    /// Window length (s); zero until the window is placed by the simulator.
    pub len: f64,
    pub order: usize,
    pub stage: Stage,
    pub machines: Vec<MachineWindow>,
}

impl WindowSAS {
    /// Horner-evaluate every series at the offset `t` from the window anchor.
    pub fn evaluate(&self, t: f64) -> (Vec<MachineState>, Vec<AlgebraicState>) {
        let states = self
            .machines
            .iter()
            .map(|m| MachineState {
                delta: m.delta.eval(t),
                omega: m.omega.eval(t),
                ep_q: m.ep_q.eval(t),
                ep_d: m.ep_d.eval(t),
            })
            .collect();
        let alg = self
            .machines
            .iter()
            .map(|m| AlgebraicState {
                i_d: m.i_d.eval(t),
                i_q: m.i_q.eval(t),
                e_d: m.e_d.eval(t),
                e_q: m.e_q.eval(t),
                e_x: m.e_x.eval(t),
                e_y: m.e_y.eval(t),
                i_x: m.i_x.eval(t),
                i_y: m.i_y.eval(t),
                p_e: m.p_e.eval(t),
            })
            .collect();
        (states, alg)
    }

    /// Largest `|coeff|·len^k` over all state series; a crude bound on the
    /// magnitude of any term inside the window.
    fn max_term_magnitude(&self, len: f64) -> f64 {
        let mut max = 0.0f64;
        for m in &self.machines {
            for s in [&m.delta, &m.omega, &m.ep_q, &m.ep_d] {
                let mut p = 1.0;
                for k in 0..=self.order {
                    max = max.max(s.coeff(k).abs() * p);
                    p *= len;
                }
            }
        }
        max
    }
}

/// Convolution at order `k` split into two contiguous half-range addends
/// summed in fixed order, the partition used to spread one coefficient over
/// workers without changing the reduction order.
fn conv_split(x: &Series, y: &Series, k: usize) -> f64 {
    let mid = (k + 1) / 2;
    conv_range(x.coeffs(), y.coeffs(), k, 0, mid) + conv_range(x.coeffs(), y.coeffs(), k, mid, k + 1)
}

fn each_machine<F>(machines: &mut [MachineWindow], pool: Option<&ThreadPool>, f: F)
where
    F: Fn(usize, &mut MachineWindow) + Sync + Send,
{
    match pool {
        None => machines.iter_mut().enumerate().for_each(|(i, m)| f(i, m)),
        Some(p) => p.install(|| {
            machines
                .par_iter_mut()
                .enumerate()
                .for_each(|(i, m)| f(i, m))
        }),
    }
}

fn build_window_impl(
    initial: &[MachineState],
    model: &SystemModel,
    stage: Stage,
    order: usize,
    pool: Option<&ThreadPool>,
) -> Result<WindowSAS, SimError> {
    if order < 1 {
        return Err(SimError::BadConfig("series order must be at least 1".into()));
    }
    if initial.len() != model.n() {
        return Err(SimError::BadConfig(format!(
            "initial state length {} does not match machine count {}",
            initial.len(),
            model.n()
        )));
    }
    let y = model.network.matrix(stage);
    let params = &model.machines;
    let mut machines: Vec<MachineWindow> =
        initial.iter().map(|s| MachineWindow::new(s, order)).collect();

    for k in 0..=order {
        // row 1: trig extension (order 0 is seeded from the anchor angle)
        if k > 0 {
            each_machine(&mut machines, pool, |_, m| {
                let (s, c) = m
                    .trig
                    .extend_at(&m.delta, k)
                    .expect("k >= 1 by construction");
                m.trig.sin.set_coeff(k, s);
                m.trig.cos.set_coeff(k, c);
            });
        }

        // row 2: internal voltages rotated to the network frame
        each_machine(&mut machines, pool, |_, m| {
            let ex = conv_split(&m.trig.sin, &m.ep_d, k) + conv_split(&m.trig.cos, &m.ep_q, k);
            let ey = -conv_split(&m.trig.cos, &m.ep_d, k) + conv_split(&m.trig.sin, &m.ep_q, k);
            m.e_x.set_coeff(k, ex);
            m.e_y.set_coeff(k, ey);
        });

        // row 3: network map, applied linearly per order
        let e_xy: Vec<Complex64> = machines
            .iter()
            .map(|m| Complex64::new(m.e_x.coeff(k), m.e_y.coeff(k)))
            .collect();
        each_machine(&mut machines, pool, |i, m| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, e) in e_xy.iter().enumerate() {
                acc += y[(i, j)] * e;
            }
            m.i_x.set_coeff(k, acc.re);
            m.i_y.set_coeff(k, acc.im);
        });

        // row 4: currents rotated back to dq
        each_machine(&mut machines, pool, |_, m| {
            let id = conv_split(&m.trig.sin, &m.i_x, k) - conv_split(&m.trig.cos, &m.i_y, k);
            let iq = conv_split(&m.trig.cos, &m.i_x, k) + conv_split(&m.trig.sin, &m.i_y, k);
            m.i_d.set_coeff(k, id);
            m.i_q.set_coeff(k, iq);
        });

        // row 5: terminal voltages from the stator-impedance drop
        each_machine(&mut machines, pool, |i, m| {
            let p = &params[i];
            let id = m.i_d.coeff(k);
            let iq = m.i_q.coeff(k);
            m.e_d.set_coeff(k, m.ep_d.coeff(k) - (p.r_a * id - p.xp_q * iq));
            m.e_q.set_coeff(k, m.ep_q.coeff(k) - (p.xp_d * id + p.r_a * iq));
        });

        // row 6: electrical power
        each_machine(&mut machines, pool, |_, m| {
            let pe = conv_split(&m.e_d, &m.i_d, k) + conv_split(&m.e_q, &m.i_q, k);
            m.p_e.set_coeff(k, pe);
        });

        // state images at the next order from the differential equations
        if k < order {
            let kp = (k + 1) as f64;
            let omega_s = model.omega_s;
            each_machine(&mut machines, pool, |i, m| {
                let p = &params[i];
                let kron = |c: f64| if k == 0 { c } else { 0.0 };
                let d_next = omega_s * m.omega.coeff(k) / kp;
                let w_next =
                    (kron(p.p_m) - m.p_e.coeff(k) - p.d * m.omega.coeff(k)) / (2.0 * p.h * kp);
                let eq_next = (kron(p.e_fd) - m.ep_q.coeff(k) - (p.x_d - p.xp_d) * m.i_d.coeff(k))
                    / (p.tp_d0 * kp);
                let ed_next =
                    (-m.ep_d.coeff(k) + (p.x_q - p.xp_q) * m.i_q.coeff(k)) / (p.tp_q0 * kp);
                m.delta.set_coeff(k + 1, d_next);
                m.omega.set_coeff(k + 1, w_next);
                m.ep_q.set_coeff(k + 1, eq_next);
                m.ep_d.set_coeff(k + 1, ed_next);
            });
        }

        for (i, m) in machines.iter().enumerate() {
            if !m.order_is_finite(k) {
                return Err(SimError::NonFiniteCoefficient {
                    order: k,
                    machine: i,
                    variable: "series",
                });
            }
        }
    }

    Ok(WindowSAS {
        anchor_time: 0.0,
        len: 0.0,
        order,
        stage,
        machines,
    })
}

/// Build the SAS of one window sequentially.
pub fn build_window(
    initial: &[MachineState],
    model: &SystemModel,
    stage: Stage,
    order: usize,
) -> Result<WindowSAS, SimError> {
    build_window_impl(initial, model, stage, order, None)
}

/// Build the SAS of one window with the coefficient evaluations of each
/// order spread over a worker pool. Within an order the row groups run as
/// sequential stages with a barrier between them; each worker writes
/// disjoint coefficient slots, and partial sums recombine in a fixed order,
/// so the result equals the sequential build exactly.
pub fn parallel_build_window(
    initial: &[MachineState],
    model: &SystemModel,
    stage: Stage,
    order: usize,
    workers: usize,
) -> Result<WindowSAS, SimError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SimError::BadConfig(format!("worker pool: {e}")))?;
    build_window_impl(initial, model, stage, order, Some(&pool))
}

/// Pool-reusing variant for the simulation driver.
pub fn build_window_pooled(
    initial: &[MachineState],
    model: &SystemModel,
    stage: Stage,
    order: usize,
    pool: &ThreadPool,
) -> Result<WindowSAS, SimError> {
    build_window_impl(initial, model, stage, order, Some(pool))
}

/// Configuration of one multi-window run.
#[derive(Clone, Debug)]
pub struct SimConfig {
    /// Series truncation order K.
    pub order: usize,
    /// Window length (s); event times force shorter windows.
    pub window: f64,
    /// Total simulated time (s).
    pub duration: f64,
    /// Output sample step (s).
    pub sample_step: f64,
    /// Evaluate algebraic outputs from their own series (`true`) or
    /// recompute them point-wise from the evaluated states (`false`).
    pub algebraic_from_series: bool,
    pub parallel: bool,
    pub workers: usize,
}

impl SimConfig {
    pub fn new(order: usize, window: f64, duration: f64, sample_step: f64) -> Self {
        SimConfig {
            order,
            window,
            duration,
            sample_step,
            algebraic_from_series: true,
            parallel: false,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.order < 1 {
            return Err(SimError::BadConfig("order must be >= 1".into()));
        }
        if !(self.window > 0.0 && self.window <= self.duration) {
            return Err(SimError::BadConfig(
                "window length must satisfy 0 < t_w <= duration".into(),
            ));
        }
        if !(self.sample_step > 0.0 && self.sample_step <= self.window + 1e-12) {
            return Err(SimError::BadConfig(
                "sample step must satisfy 0 < step <= t_w".into(),
            ));
        }
        Ok(())
    }
}

/// Consecutive `(start, length)` windows covering `[0, duration]`, with
/// boundaries forced exactly at the event times. States are continuous
/// across a topology switch but algebraic variables jump, so a fresh window
/// with the new stage matrix starts at each event.
pub fn window_plan(window: f64, duration: f64, events: &[f64]) -> Vec<(f64, f64)> {
    let mut breaks: Vec<f64> = events
        .iter()
        .copied()
        .filter(|&t| t > 1e-12 && t < duration - 1e-12)
        .collect();
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut plan = Vec::new();
    let mut start = 0.0f64;
    let mut next_break = breaks.iter().copied().peekable();
    while duration - start > 1e-9 {
        while let Some(&b) = next_break.peek() {
            if b <= start + 1e-12 {
                next_break.next();
            } else {
                break;
            }
        }
        let limit = next_break.peek().copied().unwrap_or(duration).min(duration);
        let len = window.min(limit - start);
        plan.push((start, len));
        start += len;
        // snap onto the boundary to keep stage selection exact
        if (start - limit).abs() < 1e-9 {
            start = limit;
        }
    }
    plan
}

/// Multi-window SAS simulation: each window's initial state is the previous
/// window's final evaluated state; the stage matrix switches exactly at the
/// event times; samples are emitted on the global `sample_step` grid.
pub fn simulate(
    model: &SystemModel,
    initial: &[MachineState],
    cfg: &SimConfig,
) -> Result<Trajectory, SimError> {
    simulate_with_windows(model, initial, cfg).map(|(t, _)| t)
}

/// As [`simulate`], additionally returning every window's SAS.
pub fn simulate_with_windows(
    model: &SystemModel,
    initial: &[MachineState],
    cfg: &SimConfig,
) -> Result<(Trajectory, Vec<WindowSAS>), SimError> {
    cfg.validate()?;
    model.validate()?;
    let pool = if cfg.parallel {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers.max(1))
                .build()
                .map_err(|e| SimError::BadConfig(format!("worker pool: {e}")))?,
        )
    } else {
        None
    };

    let events = [model.network.t_fault, model.network.t_clear];
    let plan = window_plan(cfg.window, cfg.duration, &events);

    let n_samples = (cfg.duration / cfg.sample_step + 1e-9).floor() as usize;
    let sample_times: Vec<f64> = (0..=n_samples).map(|j| j as f64 * cfg.sample_step).collect();

    let mut traj = Trajectory {
        machines: vec![ChannelSet::default(); model.n()],
        ..Default::default()
    };
    let mut windows: Vec<WindowSAS> = Vec::with_capacity(plan.len());
    let total_start = Instant::now();
    let mut state = initial.to_vec();
    let mut sample_idx = 0usize;

    for (w_idx, &(start, len)) in plan.iter().enumerate() {
        let stage = model.network.stage_at(start);
        let wall = Instant::now();
        let mut window = build_window_impl(&state, model, stage, cfg.order, pool.as_ref())
            .map_err(|e| match e {
                SimError::NonFiniteCoefficient { .. } => SimError::WindowBlowUp {
                    window: w_idx,
                    t_start: start,
                },
                other => other,
            })?;
        window.anchor_time = start;
        window.len = len;
        if window.max_term_magnitude(len) > 1e6 {
            return Err(SimError::WindowBlowUp {
                window: w_idx,
                t_start: start,
            });
        }

        let last_window = w_idx + 1 == plan.len();
        while sample_idx < sample_times.len() {
            let t = sample_times[sample_idx];
            let inside = t >= start - 1e-9 && (t < start + len - 1e-9 || last_window && t <= start + len + 1e-9);
            if !inside {
                break;
            }
            let offset = (t - start).max(0.0);
            let (states, alg) = window.evaluate(offset);
            let alg = if cfg.algebraic_from_series {
                alg
            } else {
                crate::system::algebraic_eval(&states, model.network.matrix(stage), &model.machines)
            };
            let per: Vec<(f64, f64, f64, f64, f64)> = states
                .iter()
                .zip(&alg)
                .map(|(s, a)| (s.delta, s.omega, s.ep_q, s.ep_d, a.p_e))
                .collect();
            traj.push_sample(t, &per);
            sample_idx += 1;
        }

        // the evaluated end state is stored and reused verbatim as the next
        // window's order-0 coefficients
        let (end_state, _) = window.evaluate(len);
        state = end_state;
        traj.window_starts.push(start);
        traj.window_wall.push(wall.elapsed().as_secs_f64());
        if state.iter().any(|s| !s.is_finite()) {
            return Err(SimError::WindowBlowUp {
                window: w_idx,
                t_start: start,
            });
        }
        windows.push(window);
    }
    traj.total_wall = total_start.elapsed().as_secs_f64();
    Ok((traj, windows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_plan_thirty_windows() {
        let plan = window_plan(0.2, 6.0, &[f64::INFINITY, f64::INFINITY]);
        assert_eq!(plan.len(), 30);
        let total: f64 = plan.iter().map(|p| p.1).sum();
        assert!((total - 6.0).abs() < 1e-9);
    }

    #[test]
    fn window_plan_event_splits() {
        let t_clear = 1.0 + 5.0 / 60.0;
        let plan = window_plan(0.2, 7.0, &[1.0, t_clear]);
        // boundaries must land exactly on the event times
        assert!(plan.iter().any(|&(s, _)| (s - 1.0).abs() < 1e-12));
        assert!(plan.iter().any(|&(s, _)| (s - t_clear).abs() < 1e-12));
        let total: f64 = plan.iter().map(|p| p.1).sum();
        assert!((total - 7.0).abs() < 1e-9);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(0, 0.2, 6.0, 0.1).validate().is_err());
        assert!(SimConfig::new(4, 0.0, 6.0, 0.1).validate().is_err());
        assert!(SimConfig::new(4, 0.2, 6.0, 0.5).validate().is_err());
        assert!(SimConfig::new(4, 0.2, 6.0, 0.1).validate().is_ok());
    }
}
