//! Error types shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DtError {
    #[error("series order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("trig pair order 0 is seeded from the anchor angle, not extended")]
    TrigSeedOrder,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("eliminated block is numerically singular (reciprocal condition ≈ {rcond:.3e})")]
    SingularEliminatedBlock { rcond: f64 },

    #[error("retained bus index {index} out of range or repeated")]
    BadRetainedIndex { index: usize },

    #[error("terminal voltage magnitude is zero at machine {machine}")]
    ZeroVoltage { machine: usize },

    #[error("invalid machine parameters at machine {machine}: {reason}")]
    BadMachineParams { machine: usize, reason: String },

    #[error("steady-state refinement failed: {0}")]
    InitFailed(String),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("non-finite series coefficient at order {order} (machine {machine}, {variable})")]
    NonFiniteCoefficient {
        order: usize,
        machine: usize,
        variable: &'static str,
    },

    #[error("series blow-up in window {window} starting at t = {t_start:.6} s")]
    WindowBlowUp { window: usize, t_start: f64 },

    #[error("non-finite state at step {step} (t = {t:.6} s)")]
    Divergence { step: usize, t: f64 },

    #[error("invalid configuration: {0}")]
    BadConfig(String),

    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid scenario: {0}")]
    Invalid(String),

    #[error(transparent)]
    Model(#[from] ModelError),
}
