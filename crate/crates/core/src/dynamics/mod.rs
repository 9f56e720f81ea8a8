//! Floating-base inverse dynamics of the replayed motion, the Laevo
//! spring/hysteresis torque, and the split of the net lumbar load into human
//! and exoskeleton shares.

mod derivatives;
mod inverse;
mod laevo;
mod torque;

pub use derivatives::{
    estimate_derivatives, DerivativeOptions, Derivatives, DEFAULT_SMOOTHING_HZ, SMOOTHING_ORDER,
};
pub use inverse::{inverse_dynamics, kinetic_energy, potential_energy, GRAVITY};
pub use laevo::{Branch, LaevoModel, LaevoParams};
pub use torque::{
    decompose_torque, differentiate, lumbar_effort_report, lumbar_flexion_moment,
    median_reduction_percent, net_lumbar_torque, with_laevo, without_exoskeleton, EffortReport,
    EffortRow, NetTorque, TorqueSeries, LUMBAR_FLEXION_DOF,
};

use crate::motion::MotionError;
use crate::signal::FilterError;
use crate::skeleton::ModelError;
use crate::stats::StatsError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("expected {expected} values, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("need at least 3 frames to estimate derivatives, got {0}")]
    TooFewFrames(usize),
    #[error("time step {0} must be positive")]
    InvalidTimeStep(f64),
    #[error("{what} has {got} samples, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid exoskeleton parameters: {0}")]
    InvalidParams(String),
    #[error("segment {0} contains no samples")]
    EmptySegment(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}
