//! Whole-body motion replay on a scaled digital human model, lumbar (L5/S1)
//! load estimation with and without a passive back-support exoskeleton, and
//! the physiological-signal and questionnaire analyses that accompany it.
//!
//! The crate is organised by stage:
//!
//! - [`skeleton`]: the 19-segment / 43-DoF human model, anthropometric
//!   scaling, forward kinematics, centre of mass and task Jacobians.
//! - [`qp`]: a small dense active-set QP solver for bound- and
//!   equality-constrained problems.
//! - [`retarget`]: per-frame two-level hierarchical velocity IK that replays
//!   captured segment poses on the model.
//! - [`dynamics`]: floating-base inverse dynamics, derivative estimation, the
//!   Laevo spring/hysteresis torque model and torque decomposition.
//! - [`motion`]: back-flexion angle, trial segmentation, postural exposure
//!   and distribution summaries.
//! - [`biosignals`]: EMG envelopes and change tables, R-peak detection and
//!   heart-rate statistics.
//! - [`surveys`]: questionnaire schemas, validation and construct scoring.
//! - [`io`] and [`pipeline`]: file formats and the end-to-end report run.

pub mod biosignals;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod math;
pub mod motion;
pub mod pipeline;
pub mod qp;
pub mod retarget;
pub mod signal;
pub mod skeleton;
pub mod stats;
pub mod surveys;
pub mod synth;

pub use error::{Error, Result};
