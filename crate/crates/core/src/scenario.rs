//! Scenario files: one JSON document describing either a multi-machine case
//! (machines, network, event) or an SMIB case. The network comes either as
//! bus/branch/load lists plus a power-flow solution — from which the staged
//! reduced matrices and initial states are computed — or directly as the
//! reduced matrices with explicit machine states.
//!
//! All quantities are per unit on the system base except time constants and
//! inertia (s). Loads are folded in as constant shunt admittances computed
//! from the power-flow voltages; the fault stage grounds the faulted bus
//! through a very large shunt (1e7 p.u.); the post-fault stage removes the
//! tripped branch.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::machine::{MachineParams, MachineState};
use crate::network::{build_ybus, kron_reduce, Branch, CMat, StagedNetwork};
use crate::smib::SmibParams;
use crate::system::{init_steady_state, refine_equilibrium, SystemModel};

/// Admittance of the bolted three-phase fault applied at the faulted bus.
pub const FAULT_SHUNT: f64 = 1e7;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    Smib(SmibScenario),
    MultiMachine(SystemScenario),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmibScenario {
    #[serde(default)]
    pub name: String,
    #[serde(flatten)]
    pub params: SmibParams,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemScenario {
    #[serde(default)]
    pub name: String,
    #[serde(default = "default_base_frequency")]
    pub base_frequency_hz: f64,
    /// System base power (MVA); informational, all inputs are already p.u.
    #[serde(default)]
    pub base_mva: f64,
    pub machines: Vec<MachineRecord>,
    pub network: NetworkInput,
    pub event: Option<EventRecord>,
}

fn default_base_frequency() -> f64 {
    60.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MachineRecord {
    /// 1-based terminal bus number.
    pub bus: usize,
    #[serde(flatten)]
    pub params: MachineParams,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NetworkInput {
    /// Bus-level data plus the power-flow solution.
    Full(FullNetwork),
    /// Pre-reduced stage matrices plus explicit initial states; machine
    /// records must carry `p_m` and `e_fd`.
    Reduced(ReducedNetwork),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FullNetwork {
    pub n_bus: usize,
    pub branches: Vec<Branch>,
    #[serde(default)]
    pub loads: Vec<LoadRecord>,
    #[serde(default)]
    pub shunts: Vec<ShuntRecord>,
    /// Bus voltage solution, one record per bus that matters (all generator
    /// and load buses).
    pub power_flow: Vec<BusVoltage>,
    /// Generator dispatch (P, Q injections) per machine bus.
    pub dispatch: Vec<Dispatch>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoadRecord {
    pub bus: usize,
    pub p: f64,
    pub q: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShuntRecord {
    pub bus: usize,
    #[serde(default)]
    pub g: f64,
    #[serde(default)]
    pub b: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BusVoltage {
    pub bus: usize,
    /// Voltage magnitude (p.u.).
    pub vm: f64,
    /// Voltage angle (degrees).
    pub va_deg: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Dispatch {
    pub bus: usize,
    pub p: f64,
    pub q: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReducedNetwork {
    pub y_pre: Vec<Vec<[f64; 2]>>,
    pub y_fault: Vec<Vec<[f64; 2]>>,
    pub y_post: Vec<Vec<[f64; 2]>>,
    pub initial_states: Vec<MachineState>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EventRecord {
    pub t_fault: f64,
    pub t_clear: f64,
    pub faulted_bus: usize,
    /// `(from, to)` bus pair of the line removed at clearing.
    pub tripped_branch: (usize, usize),
}

/// A loaded, validated multi-machine case ready to simulate.
#[derive(Clone, Debug)]
pub struct Case {
    pub model: SystemModel,
    pub initial: Vec<MachineState>,
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_path(&self, path: &Path) -> Result<(), ScenarioError> {
        let text = serde_json::to_string_pretty(self)?;
        Ok(std::fs::write(path, text)?)
    }
}

impl SystemScenario {
    /// Build the simulation case: staged reduced matrices and an exact
    /// equilibrium initial state.
    pub fn build(&self) -> Result<Case, ScenarioError> {
        let omega_s = 2.0 * std::f64::consts::PI * self.base_frequency_hz;
        match &self.network {
            NetworkInput::Reduced(r) => self.build_reduced(r, omega_s),
            NetworkInput::Full(f) => self.build_full(f, omega_s),
        }
    }

    fn build_reduced(&self, r: &ReducedNetwork, omega_s: f64) -> Result<Case, ScenarioError> {
        let n = self.machines.len();
        if r.initial_states.len() != n {
            return Err(ScenarioError::Invalid(format!(
                "{} initial states for {} machines",
                r.initial_states.len(),
                n
            )));
        }
        let parse = |m: &Vec<Vec<[f64; 2]>>, what: &str| -> Result<CMat, ScenarioError> {
            if m.len() != n || m.iter().any(|row| row.len() != n) {
                return Err(ScenarioError::Invalid(format!("{what} is not {n}x{n}")));
            }
            Ok(CMat::from_fn(n, n, |i, j| {
                Complex64::new(m[i][j][0], m[i][j][1])
            }))
        };
        let (t_fault, t_clear) = match &self.event {
            Some(e) => (e.t_fault, e.t_clear),
            None => (f64::INFINITY, f64::INFINITY),
        };
        let network = StagedNetwork {
            y_pre: parse(&r.y_pre, "y_pre")?,
            y_fault: parse(&r.y_fault, "y_fault")?,
            y_post: parse(&r.y_post, "y_post")?,
            t_fault,
            t_clear,
        };
        let model = SystemModel {
            machines: self.machines.iter().map(|m| m.params.clone()).collect(),
            omega_s,
            network,
        };
        model.validate()?;
        Ok(Case {
            model,
            initial: r.initial_states.clone(),
        })
    }

    fn build_full(&self, f: &FullNetwork, omega_s: f64) -> Result<Case, ScenarioError> {
        let staged = self.reduce_stages(f)?;
        let n = self.machines.len();

        // per-machine initialization from the power-flow terminal condition
        let mut states = Vec::with_capacity(n);
        let mut params = Vec::with_capacity(n);
        for (i, m) in self.machines.iter().enumerate() {
            let v = self.bus_voltage(f, m.bus)?;
            let d = f
                .dispatch
                .iter()
                .find(|d| d.bus == m.bus)
                .ok_or_else(|| {
                    ScenarioError::Invalid(format!("no dispatch for machine bus {}", m.bus))
                })?;
            let (st, p) = init_steady_state(v, Complex64::new(d.p, d.q), &m.params)
                .map_err(|e| ScenarioError::Invalid(format!("machine {i}: {e}")))?;
            states.push(st);
            params.push(p);
        }
        // exact equilibrium of the reduced-network algebra
        refine_equilibrium(&mut states, &mut params, &staged.y_pre)?;

        let model = SystemModel {
            machines: params,
            omega_s,
            network: staged,
        };
        model.validate()?;
        Ok(Case {
            model,
            initial: states,
        })
    }

    fn bus_voltage(&self, f: &FullNetwork, bus: usize) -> Result<Complex64, ScenarioError> {
        f.power_flow
            .iter()
            .find(|b| b.bus == bus)
            .map(|b| Complex64::from_polar(b.vm, b.va_deg.to_radians()))
            .ok_or_else(|| ScenarioError::Invalid(format!("no power-flow voltage for bus {bus}")))
    }

    /// Compute the three staged reduced admittance matrices from bus-level
    /// data: loads folded in as constant shunts, machines attached at
    /// appended internal nodes through `1/(R_a + j·x'_d)`, then everything
    /// but the internal nodes eliminated.
    pub fn reduce_stages(&self, f: &FullNetwork) -> Result<StagedNetwork, ScenarioError> {
        let n = self.machines.len();
        let m_total = f.n_bus + n;

        let mut shunts: Vec<(usize, Complex64)> = Vec::new();
        for l in &f.loads {
            let v = self.bus_voltage(f, l.bus)?;
            let vm2 = v.norm_sqr();
            if vm2 == 0.0 {
                return Err(ScenarioError::Invalid(format!(
                    "zero voltage at load bus {}",
                    l.bus
                )));
            }
            shunts.push((l.bus, Complex64::new(l.p, -l.q) / vm2));
        }
        for s in &f.shunts {
            shunts.push((s.bus, Complex64::new(s.g, s.b)));
        }

        // machine branches to appended internal nodes
        let mut branches = f.branches.clone();
        for (i, m) in self.machines.iter().enumerate() {
            if m.bus == 0 || m.bus > f.n_bus {
                return Err(ScenarioError::Invalid(format!(
                    "machine bus {} out of range",
                    m.bus
                )));
            }
            branches.push(Branch {
                from: m.bus,
                to: f.n_bus + i + 1,
                r: m.params.r_a,
                x: m.params.xp_d,
                b: 0.0,
                tap: 1.0,
            });
        }
        let internal: Vec<usize> = (f.n_bus..m_total).collect();

        let y_full = build_ybus(m_total, &branches, &shunts);
        let y_pre = kron_reduce(&y_full, &internal)?;

        let (y_fault, y_post, t_fault, t_clear) = match &self.event {
            None => (y_pre.clone(), y_pre.clone(), f64::INFINITY, f64::INFINITY),
            Some(e) => {
                if e.faulted_bus == 0 || e.faulted_bus > f.n_bus {
                    return Err(ScenarioError::Invalid(format!(
                        "faulted bus {} out of range",
                        e.faulted_bus
                    )));
                }
                let mut fault_shunts = shunts.clone();
                fault_shunts.push((e.faulted_bus, Complex64::new(FAULT_SHUNT, 0.0)));
                let y_fault_full = build_ybus(m_total, &branches, &fault_shunts);
                let y_fault = kron_reduce(&y_fault_full, &internal)?;

                let (a, b) = e.tripped_branch;
                let before = branches.len();
                let post_branches: Vec<Branch> = {
                    // remove one circuit of the tripped line
                    let mut removed = false;
                    branches
                        .iter()
                        .filter(|br| {
                            let hit = !removed
                                && ((br.from == a && br.to == b) || (br.from == b && br.to == a));
                            if hit {
                                removed = true;
                            }
                            !hit
                        })
                        .cloned()
                        .collect()
                };
                if post_branches.len() == before {
                    return Err(ScenarioError::Invalid(format!(
                        "tripped branch {a}-{b} not found"
                    )));
                }
                let y_post_full = build_ybus(m_total, &post_branches, &shunts);
                let y_post = kron_reduce(&y_post_full, &internal)?;
                (y_fault, y_post, e.t_fault, e.t_clear)
            }
        };

        Ok(StagedNetwork {
            y_pre,
            y_fault,
            y_post,
            t_fault,
            t_clear,
        })
    }

    /// Rewrite this scenario with the network replaced by its reduced form
    /// and machine records carrying the solved `p_m` / `e_fd`. A scenario
    /// that is already reduced passes through unchanged.
    pub fn to_reduced(&self) -> Result<SystemScenario, ScenarioError> {
        if matches!(self.network, NetworkInput::Reduced(_)) {
            return Ok(self.clone());
        }
        let case = self.build()?;
        let dump = |m: &CMat| -> Vec<Vec<[f64; 2]>> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect()
        };
        let machines = self
            .machines
            .iter()
            .zip(&case.model.machines)
            .map(|(rec, p)| MachineRecord {
                bus: rec.bus,
                params: p.clone(),
            })
            .collect();
        Ok(SystemScenario {
            name: self.name.clone(),
            base_frequency_hz: self.base_frequency_hz,
            base_mva: self.base_mva,
            machines,
            network: NetworkInput::Reduced(ReducedNetwork {
                y_pre: dump(&case.model.network.y_pre),
                y_fault: dump(&case.model.network.y_fault),
                y_post: dump(&case.model.network.y_post),
                initial_states: case.initial.clone(),
            }),
            event: self.event.clone(),
        })
    }
}
