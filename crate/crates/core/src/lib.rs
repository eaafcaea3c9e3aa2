//! Transient stability simulation of multi-machine power systems by
//! semi-analytical power-series solutions.
//!
//! Each state and algebraic variable is represented over one time window as
//! a truncated power series in time whose coefficients are generated
//! recursively from the system equations. Evaluating the series over
//! consecutive windows — re-anchoring on each window's final state and
//! switching the reduced admittance matrix at fault events — produces the
//! full trajectory with far fewer sequential macro-steps than a fixed-step
//! integrator. A classical RK4 integrator over the same model serves as the
//! accuracy benchmark and speed baseline, and the tuning module measures
//! which series order minimizes total simulation time for a given accuracy.

pub mod error;
pub mod machine;
pub mod network;
pub mod rk4;
pub mod sas;
pub mod scenario;
pub mod series;
pub mod smib;
pub mod system;
pub mod trajectory;
pub mod tuning;

pub use error::{DtError, ModelError, ScenarioError, SimError};
pub use machine::{AlgebraicState, MachineParams, MachineState};
pub use network::{kron_reduce, CMat, Stage, StagedNetwork};
pub use sas::{build_window, parallel_build_window, simulate, SimConfig, WindowSAS};
pub use scenario::{Case, Scenario, SystemScenario};
pub use series::{Series, TrigPair};
pub use system::{algebraic_eval, init_steady_state, SystemModel};
pub use trajectory::{compare, Trajectory};
