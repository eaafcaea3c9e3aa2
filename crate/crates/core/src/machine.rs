//! Per-generator data: two-axis model parameters, dynamic state and the
//! algebraic quantities derived from the network solution.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Two-axis synchronous generator constants, all per unit on the system base
/// except the time constants (`tp_d0`, `tp_q0`) and the inertia `h`, which
/// are in seconds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MachineParams {
    /// Inertia constant (s).
    pub h: f64,
    /// Damping constant (p.u.).
    pub d: f64,
    /// d-axis synchronous reactance.
    pub x_d: f64,
    /// q-axis synchronous reactance.
    pub x_q: f64,
    /// d-axis transient reactance.
    pub xp_d: f64,
    /// q-axis transient reactance.
    pub xp_q: f64,
    /// d-axis open-circuit transient time constant (s).
    pub tp_d0: f64,
    /// q-axis open-circuit transient time constant (s).
    pub tp_q0: f64,
    /// Armature resistance.
    #[serde(default)]
    pub r_a: f64,
    /// Mechanical power, held constant.
    #[serde(default)]
    pub p_m: f64,
    /// Field voltage, held constant.
    #[serde(default)]
    pub e_fd: f64,
}

impl MachineParams {
    pub fn validate(&self, machine: usize) -> Result<(), ModelError> {
        let checks: [(&str, bool); 8] = [
            ("H > 0", self.h > 0.0),
            ("T'_d0 > 0", self.tp_d0 > 0.0),
            ("T'_q0 > 0", self.tp_q0 > 0.0),
            ("x'_d > 0", self.xp_d > 0.0),
            ("x'_q > 0", self.xp_q > 0.0),
            ("x_d >= x'_d", self.x_d >= self.xp_d),
            ("x_q >= x'_q", self.x_q >= self.xp_q),
            ("D >= 0", self.d >= 0.0),
        ];
        for (what, ok) in checks {
            if !ok {
                return Err(ModelError::BadMachineParams {
                    machine,
                    reason: what.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Dynamic state of one machine. `omega` is the per-unit speed deviation
/// from synchronous, so `δ̇ = ω_s·ω` and equilibrium has `omega = 0`.
///
/// No range constraints: an unstable trajectory must stay representable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MachineState {
    /// Rotor angle (rad).
    pub delta: f64,
    /// Speed deviation (p.u. of synchronous speed).
    pub omega: f64,
    /// q-axis transient voltage.
    pub ep_q: f64,
    /// d-axis transient voltage.
    pub ep_d: f64,
}

impl MachineState {
    pub fn is_finite(&self) -> bool {
        self.delta.is_finite()
            && self.omega.is_finite()
            && self.ep_q.is_finite()
            && self.ep_d.is_finite()
    }
}

/// Algebraic quantities of one machine at one time point, computed from the
/// dynamic states and the active stage's reduced admittance matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AlgebraicState {
    /// d-axis stator current.
    pub i_d: f64,
    /// q-axis stator current.
    pub i_q: f64,
    /// d-axis terminal voltage.
    pub e_d: f64,
    /// q-axis terminal voltage.
    pub e_q: f64,
    /// Internal voltage, network frame.
    pub e_x: f64,
    pub e_y: f64,
    /// Injected current, network frame.
    pub i_x: f64,
    pub i_y: f64,
    /// Electrical power `e_d·i_d + e_q·i_q`.
    pub p_e: f64,
}
