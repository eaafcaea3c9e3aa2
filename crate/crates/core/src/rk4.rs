//! Fixed-step classical Runge–Kutta 4th-order integration of the
//! multi-machine model, used as the accuracy benchmark and speedup baseline.
//! Algebraic variables are recomputed inside every stage-derivative call;
//! nothing is frozen across stages.

use std::time::Instant;

use crate::error::SimError;
use crate::machine::MachineState;
use crate::network::Stage;
use crate::system::{algebraic_eval, derivatives, SystemModel};
use crate::trajectory::{ChannelSet, Trajectory};

/// Configuration of one benchmark run. Event times come from the model's
/// staged network and must land on the step grid.
#[derive(Clone, Debug)]
pub struct Rk4Config {
    /// Step size (s); 1/1200 s by default.
    pub h: f64,
    /// Total simulated time (s).
    pub duration: f64,
    /// Output sample step (s); must be an integer multiple of `h`.
    pub sample_step: f64,
}

impl Rk4Config {
    pub fn new(duration: f64) -> Self {
        Rk4Config {
            h: 1.0 / 1200.0,
            duration,
            sample_step: 1.0 / 1200.0,
        }
    }

    fn validate(&self, model: &SystemModel) -> Result<(), SimError> {
        if self.h <= 0.0 || self.duration <= 0.0 {
            return Err(SimError::BadConfig("h and duration must be positive".into()));
        }
        let ratio = self.sample_step / self.h;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 - 1e-9 {
            return Err(SimError::BadConfig(
                "sample step must be an integer multiple of h".into(),
            ));
        }
        for (name, t) in [
            ("t_fault", model.network.t_fault),
            ("t_clear", model.network.t_clear),
        ] {
            if t.is_finite() && t < self.duration {
                let steps = t / self.h;
                if (steps - steps.round()).abs() > 1e-6 {
                    return Err(SimError::BadConfig(format!(
                        "{name} = {t} is not on the step grid (h = {})",
                        self.h
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One classical four-stage RK4 step against the given stage matrix.
pub fn rk4_step(
    states: &[MachineState],
    h: f64,
    model: &SystemModel,
    stage: Stage,
) -> Vec<MachineState> {
    let advance = |base: &[MachineState], dirs: &[crate::system::StateDerivative], dt: f64| {
        base.iter()
            .zip(dirs)
            .map(|(s, d)| MachineState {
                delta: s.delta + dt * d.d_delta,
                omega: s.omega + dt * d.d_omega,
                ep_q: s.ep_q + dt * d.d_ep_q,
                ep_d: s.ep_d + dt * d.d_ep_d,
            })
            .collect::<Vec<_>>()
    };

    let k1 = derivatives(states, model, stage);
    let s2 = advance(states, &k1, 0.5 * h);
    let k2 = derivatives(&s2, model, stage);
    let s3 = advance(states, &k2, 0.5 * h);
    let k3 = derivatives(&s3, model, stage);
    let s4 = advance(states, &k3, h);
    let k4 = derivatives(&s4, model, stage);

    states
        .iter()
        .enumerate()
        .map(|(i, s)| MachineState {
            delta: s.delta
                + h / 6.0 * (k1[i].d_delta + 2.0 * k2[i].d_delta + 2.0 * k3[i].d_delta + k4[i].d_delta),
            omega: s.omega
                + h / 6.0 * (k1[i].d_omega + 2.0 * k2[i].d_omega + 2.0 * k3[i].d_omega + k4[i].d_omega),
            ep_q: s.ep_q
                + h / 6.0 * (k1[i].d_ep_q + 2.0 * k2[i].d_ep_q + 2.0 * k3[i].d_ep_q + k4[i].d_ep_q),
            ep_d: s.ep_d
                + h / 6.0 * (k1[i].d_ep_d + 2.0 * k2[i].d_ep_d + 2.0 * k3[i].d_ep_d + k4[i].d_ep_d),
        })
        .collect()
}

/// Step through `[0, duration]`, switching the stage matrix exactly at the
/// event times (states carried across the switch) and sampling on the
/// configured grid.
pub fn rk4_simulate(
    model: &SystemModel,
    initial: &[MachineState],
    cfg: &Rk4Config,
) -> Result<Trajectory, SimError> {
    model.validate()?;
    cfg.validate(model)?;
    let steps = (cfg.duration / cfg.h + 1e-9).round() as usize;
    let sample_every = (cfg.sample_step / cfg.h).round() as usize;

    let mut traj = Trajectory {
        machines: vec![ChannelSet::default(); model.n()],
        ..Default::default()
    };
    let start = Instant::now();
    let mut state = initial.to_vec();

    let push = |traj: &mut Trajectory, t: f64, state: &[MachineState], stage: Stage| {
        let alg = algebraic_eval(state, model.network.matrix(stage), &model.machines);
        let per: Vec<(f64, f64, f64, f64, f64)> = state
            .iter()
            .zip(&alg)
            .map(|(s, a)| (s.delta, s.omega, s.ep_q, s.ep_d, a.p_e))
            .collect();
        traj.push_sample(t, &per);
    };

    push(&mut traj, 0.0, &state, model.network.stage_at(0.0));
    for step in 1..=steps {
        let t_prev = (step - 1) as f64 * cfg.h;
        let stage = model.network.stage_at(t_prev + 0.5 * cfg.h);
        state = rk4_step(&state, cfg.h, model, stage);
        if state.iter().any(|s| !s.is_finite()) {
            return Err(SimError::Divergence {
                step,
                t: step as f64 * cfg.h,
            });
        }
        if step % sample_every == 0 {
            let t = step as f64 * cfg.h;
            push(&mut traj, t, &state, model.network.stage_at(t));
        }
    }
    traj.total_wall = start.elapsed().as_secs_f64();
    Ok(traj)
}
