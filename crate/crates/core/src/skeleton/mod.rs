//! The scaled 19-segment human model: anthropometric scaling, canonical
//! joint layout, forward kinematics and task Jacobians.

mod anthropometry;
mod config;
mod kinematics;
pub mod layout;
mod model;

pub use anthropometry::{
    AnthropometricProfile, CoefficientTable, SegmentCoefficients, TableRegistry, DEFAULT_TABLE_ID,
};
pub use config::{JointConfiguration, LimitViolation};
pub use kinematics::{forward_kinematics, frame_jacobian, task_jacobian, Kinematics, TaskKind};
pub use model::{
    build_model, build_model_with, Dof, Frame, Joint, Segment, SkeletonModel, ACTUATED_DOFS,
    BASE_DOFS, COM_FRAME, VELOCITY_DIM,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid anthropometric profile: {0}")]
    InvalidProfile(String),
    #[error("unknown coefficient table `{0}`")]
    UnknownTable(String),
    #[error("invalid coefficient table: {0}")]
    InvalidTable(String),
    #[error("unknown frame `{0}`")]
    UnknownFrame(String),
    #[error("frame `{0}` has no orientation")]
    NoOrientation(String),
    #[error("expected {expected} values, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("base quaternion norm {0} is not 1")]
    NonUnitQuaternion(f64),
}
