//! Multi-machine system model: point-wise algebraic evaluation against a
//! reduced network, state derivatives, and steady-state initialization.
//!
//! Frame conventions. Network-frame phasors relate to machine dq quantities
//! through `x_x + j·x_y = (x_d + j·x_q)·e^{j(δ − π/2)}`, applied uniformly to
//! internal voltages, terminal currents and terminal voltages. Written out,
//! the dq→xy rotation and its inverse are
//!
//! ```text
//! e_x =  sin δ · e'_d + cos δ · e'_q        i_d = sin δ · i_x − cos δ · i_y
//! e_y = −cos δ · e'_d + sin δ · e'_q        i_q = cos δ · i_x + sin δ · i_y
//! ```
//!
//! which keeps the power bookkeeping consistent: the sum of machine
//! electrical powers equals the total absorption of the reduced network.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::ModelError;
use crate::machine::{AlgebraicState, MachineParams, MachineState};
use crate::network::{CMat, Stage, StagedNetwork};

/// Immutable system description shared by both integrators.
#[derive(Clone, Debug)]
pub struct SystemModel {
    pub machines: Vec<MachineParams>,
    /// Synchronous frequency (rad/s).
    pub omega_s: f64,
    pub network: StagedNetwork,
}

impl SystemModel {
    pub fn n(&self) -> usize {
        self.machines.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.machines.is_empty() {
            return Err(ModelError::Dimension {
                what: "machines",
                expected: 1,
                got: 0,
            });
        }
        for (i, m) in self.machines.iter().enumerate() {
            m.validate(i)?;
        }
        if self.network.n() != self.n() {
            return Err(ModelError::Dimension {
                what: "network",
                expected: self.n(),
                got: self.network.n(),
            });
        }
        self.network.validate()
    }
}

/// Time derivatives of one machine's state.
#[derive(Clone, Copy, Debug)]
pub struct StateDerivative {
    pub d_delta: f64,
    pub d_omega: f64,
    pub d_ep_q: f64,
    pub d_ep_d: f64,
}

/// Evaluate all algebraic quantities for the given states against one stage
/// matrix: internal voltages rotated to the network frame, the shared
/// matrix-vector product, currents rotated back, terminal voltages from the
/// stator-impedance drop, and electrical power.
pub fn algebraic_eval(
    states: &[MachineState],
    stage_matrix: &CMat,
    params: &[MachineParams],
) -> Vec<AlgebraicState> {
    let n = states.len();
    assert_eq!(params.len(), n, "params/state length mismatch");
    assert_eq!(stage_matrix.nrows(), n, "stage matrix dimension mismatch");

    let e_xy = DVector::from_fn(n, |i, _| {
        let s = states[i].delta.sin();
        let c = states[i].delta.cos();
        Complex64::new(
            s * states[i].ep_d + c * states[i].ep_q,
            -c * states[i].ep_d + s * states[i].ep_q,
        )
    });
    let i_xy = stage_matrix * &e_xy;

    (0..n)
        .map(|i| {
            let s = states[i].delta.sin();
            let c = states[i].delta.cos();
            let (ix, iy) = (i_xy[i].re, i_xy[i].im);
            let i_d = s * ix - c * iy;
            let i_q = c * ix + s * iy;
            let p = &params[i];
            let e_d = states[i].ep_d - (p.r_a * i_d - p.xp_q * i_q);
            let e_q = states[i].ep_q - (p.xp_d * i_d + p.r_a * i_q);
            AlgebraicState {
                i_d,
                i_q,
                e_d,
                e_q,
                e_x: e_xy[i].re,
                e_y: e_xy[i].im,
                i_x: ix,
                i_y: iy,
                p_e: e_d * i_d + e_q * i_q,
            }
        })
        .collect()
}

/// Right-hand side of the machine differential equations at one point.
pub fn derivatives(
    states: &[MachineState],
    model: &SystemModel,
    stage: Stage,
) -> Vec<StateDerivative> {
    let alg = algebraic_eval(states, model.network.matrix(stage), &model.machines);
    derivatives_from_algebraic(states, &alg, model)
}

pub fn derivatives_from_algebraic(
    states: &[MachineState],
    alg: &[AlgebraicState],
    model: &SystemModel,
) -> Vec<StateDerivative> {
    states
        .iter()
        .zip(alg)
        .zip(&model.machines)
        .map(|((st, a), p)| StateDerivative {
            d_delta: model.omega_s * st.omega,
            d_omega: (p.p_m - a.p_e - p.d * st.omega) / (2.0 * p.h),
            d_ep_q: (p.e_fd - st.ep_q - (p.x_d - p.xp_d) * a.i_d) / p.tp_d0,
            d_ep_d: (-st.ep_d + (p.x_q - p.xp_q) * a.i_q) / p.tp_q0,
        })
        .collect()
}

/// Initialize one machine from its power-flow terminal condition.
///
/// Rotor angle from the q-axis phasor `E_Q = V + (R_a + j·x_q)·I`, then the
/// dq projections give `e'_q`, `e'_d`; `e_fd` and `P_m` are set so the
/// machine equations balance at the terminal condition. Returns the state
/// and the parameters with `p_m`, `e_fd` filled in.
pub fn init_steady_state(
    terminal_voltage: Complex64,
    injected_power: Complex64,
    params: &MachineParams,
) -> Result<(MachineState, MachineParams), ModelError> {
    if terminal_voltage.norm() == 0.0 {
        return Err(ModelError::ZeroVoltage { machine: 0 });
    }
    let v = terminal_voltage;
    let i = (injected_power / v).conj();
    let e_q_phasor = v + Complex64::new(params.r_a, params.x_q) * i;
    let delta = e_q_phasor.arg();

    // dq projection: x_d + j x_q = X_xy · e^{-j(δ - π/2)}
    let rot = Complex64::from_polar(1.0, -(delta - std::f64::consts::FRAC_PI_2));
    let v_dq = v * rot;
    let i_dq = i * rot;
    let (v_d, v_q) = (v_dq.re, v_dq.im);
    let (i_d, i_q) = (i_dq.re, i_dq.im);

    let ep_q = v_q + params.r_a * i_q + params.xp_d * i_d;
    let ep_d = v_d + params.r_a * i_d - params.xp_q * i_q;

    let mut out = params.clone();
    out.e_fd = ep_q + (params.x_d - params.xp_d) * i_d;
    out.p_m = v_d * i_d + v_q * i_q + params.r_a * (i_d * i_d + i_q * i_q);

    Ok((
        MachineState {
            delta,
            omega: 0.0,
            ep_q,
            ep_d,
        },
        out,
    ))
}

/// Refine per-machine initial states into an exact equilibrium of the
/// reduced-network model.
///
/// The per-machine initialization is exact only when the machine branch
/// folded into the reduced matrix (`R_a + j·x'_d`) matches the q-axis
/// transient reactance. With saliency (`x'_q ≠ x'_d`) the reduced-network
/// currents differ slightly from the power-flow currents, so `e'_d`, `P_m`
/// and `e_fd` are re-solved against the reduced algebra: `i_q` is affine in
/// the `e'_d` vector, which makes `e'_d = (x_q − x'_q)·i_q(e'_d)` one
/// linear solve. Afterwards the pre-fault right-hand side is zero to
/// rounding.
pub fn refine_equilibrium(
    states: &mut [MachineState],
    params: &mut [MachineParams],
    y_pre: &CMat,
) -> Result<(), ModelError> {
    let n = states.len();

    let iq_of = |epd: &DVector<f64>, states: &[MachineState]| -> DVector<f64> {
        let probe: Vec<MachineState> = states
            .iter()
            .enumerate()
            .map(|(i, s)| MachineState {
                ep_d: epd[i],
                ..*s
            })
            .collect();
        let alg = algebraic_eval(&probe, y_pre, params);
        DVector::from_fn(n, |i, _| alg[i].i_q)
    };

    let epd0 = DVector::from_fn(n, |i, _| states[i].ep_d);
    let iq0 = iq_of(&epd0, states);
    // columns of the (exact, since affine) Jacobian ∂i_q/∂e'_d
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut e = epd0.clone();
        e[j] += 1.0;
        let col = iq_of(&e, states) - &iq0;
        jac.set_column(j, &col);
    }
    let d = DVector::from_fn(n, |i, _| params[i].x_q - params[i].xp_q);
    let b_eff = &iq0 - &jac * &epd0;

    // (I − D·J) e'_d = D·b_eff
    let mut a = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] -= d[i] * jac[(i, j)];
        }
    }
    let rhs = DVector::from_fn(n, |i, _| d[i] * b_eff[i]);
    let epd = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| ModelError::InitFailed("singular saliency system".into()))?;

    for i in 0..n {
        states[i].ep_d = epd[i];
        states[i].omega = 0.0;
    }
    let alg = algebraic_eval(states, y_pre, params);
    for i in 0..n {
        params[i].p_m = alg[i].p_e;
        params[i].e_fd = states[i].ep_q + (params[i].x_d - params[i].xp_d) * alg[i].i_d;
    }
    Ok(())
}

/// Max-abs right-hand side over all machines and state equations; zero at an
/// equilibrium of the given stage.
pub fn equilibrium_residual(states: &[MachineState], model: &SystemModel, stage: Stage) -> f64 {
    derivatives(states, model, stage)
        .iter()
        .flat_map(|d| [d.d_delta, d.d_omega, d.d_ep_q, d.d_ep_d])
        .fold(0.0f64, |m, v| m.max(v.abs()))
}
