//! Hierarchical velocity-level inverse kinematics replaying captured segment
//! poses on the model.

mod capture;
mod solver;
mod tasks;
mod trajectory;

pub use capture::{CapturedFrame, CapturedTrajectory, SegmentPose};
pub use solver::{references_from_pose, solve_frame, task_residuals, FrameSolution, TaskResidual};
pub use tasks::{
    default_task_stack, default_task_stack_with_gain, AliasTable, SolverSettings, TaskReference,
    TaskSpec, DEFAULT_EPSILON, DEFAULT_GAIN, DEFAULT_VELOCITY_BOUND,
};
pub use trajectory::{
    retarget_trajectory, retarget_trajectory_with, FrameDiagnostics, RetargetOptions,
    RetargetResult,
};

use crate::qp::QpError;
use crate::skeleton::ModelError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RetargetError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Qp(#[from] QpError),
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error("invalid solver settings: {0}")]
    InvalidSettings(String),
    #[error("invalid captured trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("time step {0} must be positive")]
    InvalidTimeStep(f64),
    #[error("no reference for task `{0}`")]
    MissingReference(String),
    #[error("frame {index}: {source}")]
    Frame {
        index: usize,
        source: Box<RetargetError>,
    },
}

impl RetargetError {
    /// Empty bound intervals or an infeasible start: the frame is skipped.
    pub fn is_infeasible(&self) -> bool {
        match self {
            RetargetError::Qp(QpError::InfeasibleBounds { .. } | QpError::InfeasibleStart(_)) => {
                true
            }
            RetargetError::Frame { source, .. } => source.is_infeasible(),
            _ => false,
        }
    }

    pub fn is_numerical(&self) -> bool {
        match self {
            RetargetError::Qp(QpError::NotConverged { .. } | QpError::Numerical(_)) => true,
            RetargetError::Frame { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
