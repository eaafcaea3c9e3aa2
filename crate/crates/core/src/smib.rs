//! Single-machine infinite-bus swing equation: the classical two-state test
//! case used for convergence and accuracy studies.
//!
//! ```text
//! δ̇ = ω_s ω
//! ω̇ = (P_m − P_max·sin δ − D·ω) / (2H)
//! ```
//!
//! The electrical power image is `P_max·F(k)` with `F` the sine series of
//! the machine's trig pair, so the recursion closes without a network map.

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::series::{Series, TrigPair};
use crate::trajectory::{ChannelSet, Trajectory};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmibParams {
    /// Inertia constant (s).
    pub h: f64,
    /// Damping (p.u.).
    pub d: f64,
    /// Maximum electrical power (p.u.).
    pub p_max: f64,
    /// Mechanical power (p.u.).
    pub p_m: f64,
    /// Synchronous frequency (rad/s).
    pub omega_s: f64,
    /// Initial rotor angle (rad).
    pub delta0: f64,
    /// Initial speed deviation (p.u.).
    pub omega0: f64,
}

impl SmibParams {
    /// The parameter set of the classical convergence study: H = 3 s,
    /// D = 3 p.u., P_max = 1.7, P_m = 0.44, δ(0) = 0.26 rad, ω(0) = 0.002.
    pub fn study_case() -> Self {
        SmibParams {
            h: 3.0,
            d: 3.0,
            p_max: 1.7,
            p_m: 0.44,
            omega_s: 2.0 * std::f64::consts::PI * 60.0,
            delta0: 0.26,
            omega0: 0.002,
        }
    }
}

/// One SAS window of the two-state system.
#[derive(Clone, Debug)]
pub struct SmibWindow {
    pub delta: Series,
    pub omega: Series,
    pub p_e: Series,
    pub trig: TrigPair,
}

impl SmibWindow {
    pub fn evaluate(&self, t: f64) -> (f64, f64) {
        (self.delta.eval(t), self.omega.eval(t))
    }
}

/// Recursive coefficient generation for one window anchored at
/// `(delta0, omega0)`:
///
/// ```text
/// Δ(k+1) = ω_s·W(k) / (k+1)
/// W(k+1) = (P_m·1{k=0} − P_max·F(k) − D·W(k)) / (2H·(k+1))
/// ```
pub fn build_window(
    p: &SmibParams,
    delta0: f64,
    omega0: f64,
    order: usize,
) -> Result<SmibWindow, SimError> {
    if order < 1 {
        return Err(SimError::BadConfig("series order must be at least 1".into()));
    }
    let mut delta = Series::constant(delta0, order);
    let mut omega = Series::constant(omega0, order);
    let mut p_e = Series::zeros(order);
    let mut trig = TrigPair::seeded(delta0, order);

    for k in 0..=order {
        if k > 0 {
            trig.extend(&delta, k).expect("k >= 1");
        }
        p_e.set_coeff(k, p.p_max * trig.sin.coeff(k));
        if k < order {
            let kp = (k + 1) as f64;
            let kron = if k == 0 { p.p_m } else { 0.0 };
            delta.set_coeff(k + 1, p.omega_s * omega.coeff(k) / kp);
            omega.set_coeff(
                k + 1,
                (kron - p_e.coeff(k) - p.d * omega.coeff(k)) / (2.0 * p.h * kp),
            );
        }
        if !(delta.coeff(k).is_finite() && omega.coeff(k).is_finite()) {
            return Err(SimError::NonFiniteCoefficient {
                order: k,
                machine: 0,
                variable: "smib",
            });
        }
    }
    Ok(SmibWindow {
        delta,
        omega,
        p_e,
        trig,
    })
}

fn rhs(p: &SmibParams, delta: f64, omega: f64) -> (f64, f64) {
    (
        p.omega_s * omega,
        (p.p_m - p.p_max * delta.sin() - p.d * omega) / (2.0 * p.h),
    )
}

/// One classical RK4 step of the swing equation.
pub fn rk4_step(p: &SmibParams, delta: f64, omega: f64, h: f64) -> (f64, f64) {
    let (k1d, k1w) = rhs(p, delta, omega);
    let (k2d, k2w) = rhs(p, delta + 0.5 * h * k1d, omega + 0.5 * h * k1w);
    let (k3d, k3w) = rhs(p, delta + 0.5 * h * k2d, omega + 0.5 * h * k2w);
    let (k4d, k4w) = rhs(p, delta + h * k3d, omega + h * k3w);
    (
        delta + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d),
        omega + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w),
    )
}

/// Fixed-step RK4 trajectory sampled at every step.
pub fn rk4_simulate(p: &SmibParams, h: f64, duration: f64) -> Trajectory {
    let steps = (duration / h + 1e-9).round() as usize;
    let mut traj = Trajectory {
        machines: vec![ChannelSet::default()],
        ..Default::default()
    };
    let (mut d, mut w) = (p.delta0, p.omega0);
    traj.push_sample(0.0, &[(d, w, 0.0, 0.0, p.p_max * d.sin())]);
    for s in 1..=steps {
        let (nd, nw) = rk4_step(p, d, w, h);
        d = nd;
        w = nw;
        traj.push_sample(s as f64 * h, &[(d, w, 0.0, 0.0, p.p_max * d.sin())]);
    }
    traj
}

/// Multi-window SAS trajectory of the SMIB system, sampled at `sample_step`.
pub fn sas_simulate(
    p: &SmibParams,
    order: usize,
    window: f64,
    duration: f64,
    sample_step: f64,
) -> Result<Trajectory, SimError> {
    let mut traj = Trajectory {
        machines: vec![ChannelSet::default()],
        ..Default::default()
    };
    let n_samples = (duration / sample_step + 1e-9).floor() as usize;
    let mut sample_idx = 0usize;
    let (mut d, mut w) = (p.delta0, p.omega0);
    let mut start = 0.0f64;
    let mut w_idx = 0usize;
    while duration - start > 1e-9 {
        let len = window.min(duration - start);
        let sas = build_window(p, d, w, order).map_err(|e| match e {
            SimError::NonFiniteCoefficient { .. } => SimError::WindowBlowUp {
                window: w_idx,
                t_start: start,
            },
            other => other,
        })?;
        traj.window_starts.push(start);
        let last = duration - (start + len) <= 1e-9;
        while sample_idx <= n_samples {
            let t = sample_idx as f64 * sample_step;
            let inside = t >= start - 1e-9 && (t < start + len - 1e-9 || last && t <= start + len + 1e-9);
            if !inside {
                break;
            }
            let (dv, wv) = sas.evaluate(t - start);
            traj.push_sample(t, &[(dv, wv, 0.0, 0.0, sas.p_e.eval(t - start))]);
            sample_idx += 1;
        }
        let (nd, nw) = sas.evaluate(len);
        d = nd;
        w = nw;
        start += len;
        w_idx += 1;
    }
    Ok(traj)
}

/// Largest offset within one window, on the `h_ref` grid, where the SAS
/// angle stays within `tol` of the RK4 reference started from the same
/// state.
pub fn max_accurate_window(p: &SmibParams, order: usize, tol: f64, h_ref: f64, t_max: f64) -> f64 {
    let sas = build_window(p, p.delta0, p.omega0, order).expect("finite coefficients");
    let steps = (t_max / h_ref).round() as usize;
    let (mut d, mut w) = (p.delta0, p.omega0);
    let mut last_ok = 0.0;
    for s in 1..=steps {
        let (nd, nw) = rk4_step(p, d, w, h_ref);
        d = nd;
        w = nw;
        let t = s as f64 * h_ref;
        let (ds, _) = sas.evaluate(t);
        if (ds - d).abs() <= tol {
            last_ok = t;
        } else {
            break;
        }
    }
    last_ok
}

/// Accuracy window from the truncation bound: the largest `t` (capped at
/// `t_max`) where the last retained angle term satisfies
/// `|Δ(K)|·t^K ≤ tol`. This is the window length an order-K SAS reports as
/// trustworthy without a reference solution; inside it the actual error
/// against a reference integrator is well below `tol` because the omitted
/// tail is dominated by the bounded last term.
pub fn guaranteed_window(p: &SmibParams, order: usize, tol: f64, t_max: f64) -> f64 {
    let sas = build_window(p, p.delta0, p.omega0, order).expect("finite coefficients");
    let last = sas.delta.coeff(order).abs();
    if last == 0.0 {
        return t_max;
    }
    (tol / last).powf(1.0 / order as f64).min(t_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn first_coefficients_match_closed_forms() {
        let p = SmibParams::study_case();
        let w = build_window(&p, p.delta0, p.omega0, 3).unwrap();
        // closed forms of the low-order coefficients
        let d1 = p.omega_s * p.omega0;
        let w1 = (p.p_m - p.p_max * p.delta0.sin() - p.d * p.omega0) / (2.0 * p.h);
        let d2 = p.omega_s * w1 / 2.0;
        assert_relative_eq!(w.delta.coeff(0), 0.26, epsilon = 1e-15);
        assert_relative_eq!(w.delta.coeff(1), d1, max_relative = 1e-14);
        assert_relative_eq!(w.delta.coeff(1), 0.753982, max_relative = 1e-5);
        assert_relative_eq!(w.delta.coeff(2), d2, max_relative = 1e-14);
        assert_relative_eq!(w.delta.coeff(2), -0.09542, max_relative = 1e-3);
    }

    #[test]
    fn rk4_is_exact_on_polynomial_solutions() {
        // with P_max = 0, D = 0 the solution is quadratic in t: RK4 must
        // reproduce it to machine precision in one step
        let p = SmibParams {
            h: 3.0,
            d: 0.0,
            p_max: 0.0,
            p_m: 0.44,
            omega_s: 2.0 * std::f64::consts::PI * 60.0,
            delta0: 0.1,
            omega0: 0.002,
        };
        let h = 0.05;
        let (d, w) = rk4_step(&p, p.delta0, p.omega0, h);
        let a = p.p_m / (2.0 * p.h);
        let w_exact = p.omega0 + a * h;
        let d_exact = p.delta0 + p.omega_s * (p.omega0 * h + 0.5 * a * h * h);
        assert_relative_eq!(w, w_exact, max_relative = 1e-14);
        assert_relative_eq!(d, d_exact, max_relative = 1e-14);
    }

    #[test]
    fn equilibrium_window_is_constant() {
        // δ* = asin(P_m / P_max), ω = 0: all higher coefficients vanish
        let mut p = SmibParams::study_case();
        p.delta0 = (p.p_m / p.p_max).asin();
        p.omega0 = 0.0;
        let w = build_window(&p, p.delta0, p.omega0, 10).unwrap();
        for k in 1..=10 {
            assert!(w.delta.coeff(k).abs() < 1e-12);
            assert!(w.omega.coeff(k).abs() < 1e-12);
        }
    }

    #[test]
    fn sas_matches_rk4_inside_window() {
        let p = SmibParams::study_case();
        let sas = sas_simulate(&p, 15, 0.1, 0.5, 1.0 / 1200.0).unwrap();
        let rk4 = rk4_simulate(&p, 1.0 / 1200.0, 0.5);
        let err = crate::trajectory::compare(&sas, &rk4).unwrap();
        assert!(err.max_delta < 1e-6, "delta error {}", err.max_delta);
    }
}
